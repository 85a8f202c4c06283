// latq: the lattice-circuit workbench. Generates circuits, scores them
// against a machine, compiles with simulated annealing, emulates the exact
// annealing dynamics, validates rule libraries, runs the noisy statevector
// check, and replays the shipped experiment presets.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error. All stochastic
// subcommands take --seed and identical invocations produce byte-identical
// output.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "latq/adiabatic.hpp"
#include "latq/anneal.hpp"
#include "latq/cost.hpp"
#include "latq/generators.hpp"
#include "latq/io.hpp"
#include "latq/lattice.hpp"
#include "latq/noise.hpp"
#include "latq/rng.hpp"
#include "latq/rules.hpp"
#include "latq/unitary.hpp"

namespace {

using namespace latq;

std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

// Configuration fingerprint carried by every record of one invocation so
// that mixed record streams stay attributable. Seeds stay out of the tag;
// they are separate record fields.
std::string config_tag(const std::vector<std::string>& parts) {
    std::string joined;
    for (const std::string& p : parts) {
        joined += p;
        joined += '\x1f';
    }
    return hex64(fnv1a64(joined));
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << std::flush;
    } else {
        write_text_file(out_path, text);
    }
}

std::string lines_of(const std::vector<ResultRecord>& records) {
    std::string text;
    for (const ResultRecord& rec : records) {
        text += rec.to_line();
        text += '\n';
    }
    return text;
}

// ---- generate ----

struct GenQftOpts {
    int qubits = 3;
    bool swap_area = false;
    std::string out;
};

struct GenThsOpts {
    int rows = 4;
    int cols = 4;
    int periods = 8;
    std::int64_t k1 = 2;
    std::int64_t k2 = 4;
    std::int64_t k3 = 2;
    std::int64_t modulus = 16;
    std::string out;
};

int run_generate_qft(const GenQftOpts& o) {
    emit(format_circuit(gen_qft(o.qubits, o.swap_area)), o.out);
    return 0;
}

int run_generate_ths(const GenThsOpts& o) {
    emit(format_circuit(gen_ths(o.rows, o.cols, o.periods, o.k1, o.k2, o.k3, o.modulus)), o.out);
    return 0;
}

int run_generate_example1(const std::string& out) {
    emit(format_circuit(example1_input()), out);
    return 0;
}

// ---- cost ----

struct CostOpts {
    std::string circuit;
    std::string machine;
    std::string out;
};

int run_cost(const CostOpts& o) {
    const CircuitTensor tensor = load_circuit(o.circuit);
    const MachineSpec machine = load_machine(o.machine);
    const double total = total_infidelity(tensor, machine);
    ResultRecord rec;
    rec.put("id", "cost");
    rec.put("cfg", config_tag({"cost", o.circuit, o.machine}));
    rec.put("steps", static_cast<std::int64_t>(tensor.dims.time_steps));
    rec.put("qubits", static_cast<std::int64_t>(tensor.dims.qubit_count()));
    rec.put("I", total);
    emit(lines_of({rec}), o.out);
    return 0;
}

// ---- simulated annealing ----

std::vector<ResultRecord> sa_records(const std::string& id, const std::string& tag,
                                     const EnsembleRecord& ens, std::uint64_t base_seed) {
    std::vector<ResultRecord> recs;
    for (std::size_t r = 0; r < ens.chains.size(); ++r) {
        const ChainRecord& ch = ens.chains[r];
        for (const ChainSample& s : ch.samples) {
            ResultRecord rec;
            rec.put("id", id);
            rec.put("cfg", tag);
            rec.put("seed", ch.seed);
            rec.put("replica", static_cast<std::int64_t>(r));
            rec.put("k", s.k);
            rec.put("T", s.temperature);
            rec.put("I", s.current);
            rec.put("I_best", s.best);
            rec.put("accepted", s.accepted);
            recs.push_back(std::move(rec));
        }
    }
    for (std::size_t r = 0; r < ens.chains.size(); ++r) {
        const ChainRecord& ch = ens.chains[r];
        ResultRecord rec;
        rec.put("id", id + "-chain");
        rec.put("cfg", tag);
        rec.put("seed", ch.seed);
        rec.put("replica", static_cast<std::int64_t>(r));
        rec.put("steps", ch.steps);
        rec.put("accepted", ch.accepted);
        rec.put("t_max", ch.t_max);
        rec.put("t_min", ch.t_min);
        rec.put("i_input", ch.i_input);
        rec.put("i_opt", ch.i_opt);
        rec.put("I_I", ch.improvement);
        recs.push_back(std::move(rec));
    }
    ResultRecord rec;
    rec.put("id", id + "-ensemble");
    rec.put("cfg", tag);
    rec.put("seed", base_seed);
    rec.put("replicas", static_cast<std::int64_t>(ens.chains.size()));
    rec.put("i_input", ens.i_input);
    rec.put("i_opt", ens.i_opt);
    rec.put("I_I", ens.improvement);
    rec.put("I_I_mean", ens.mean_improvement);
    rec.put("I_I_min", ens.min_improvement);
    rec.put("I_I_max", ens.max_improvement);
    recs.push_back(std::move(rec));
    return recs;
}

struct CompileOpts {
    std::string circuit;
    std::string machine;
    std::string rules;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    int replicas = 1;
    double t_max = 0.0;
    double t_min = 0.0;
    std::int64_t stride = 0;
    int threads = 1;
    std::string out;
    std::string save_best;
};

int run_compile(const CompileOpts& o) {
    const CircuitTensor input = load_circuit(o.circuit);
    const MachineSpec machine = load_machine(o.machine);
    const RuleSet rules = load_ruleset(o.rules);
    SAConfig cfg;
    cfg.t_max = o.t_max;
    cfg.t_min = o.t_min;
    cfg.n_steps = o.steps;
    cfg.record_stride = o.stride;
    cfg.replicas = o.replicas;
    cfg.seed = o.seed;
    cfg.ruleset = &rules;
    cfg.machine = &machine;
    const EnsembleRecord ens = run_ensemble(input, cfg);
    const std::string tag =
        config_tag({"compile", o.circuit, o.machine, o.rules, format_int(o.steps),
                    format_double(o.t_max), format_double(o.t_min), format_int(o.stride),
                    format_int(o.replicas)});
    emit(lines_of(sa_records("compile", tag, ens, o.seed)), o.out);
    if (!o.save_best.empty()) write_text_file(o.save_best, format_circuit(ens.best_circuit));
    return 0;
}

// ---- exact annealing emulation ----

void append_qa_records(std::vector<ResultRecord>& recs, const std::string& id,
                       const std::string& tag, const QAResult& res) {
    for (const QACheckpoint& cp : res.checkpoints) {
        ResultRecord rec;
        rec.put("id", id);
        rec.put("cfg", tag);
        rec.put("tau", res.tau);
        rec.put("t_over_tau", cp.t_over_tau);
        rec.put("energy", cp.energy);
        rec.put("norm", cp.norm);
        recs.push_back(std::move(rec));
    }
    ResultRecord rec;
    rec.put("id", id + "-final");
    rec.put("cfg", tag);
    rec.put("tau", res.tau);
    rec.put("steps", res.n_steps);
    rec.put("class", res.basis.size());
    rec.put("lambda", res.lambda);
    rec.put("i_input", res.i_input);
    rec.put("i_min", res.i_min);
    rec.put("i_exp", res.i_exp);
    rec.put("p_ground", res.p_ground);
    rec.put("I_I_exp", res.improvement_exp);
    rec.put("I_I_opt", res.improvement_opt);
    rec.put("norm_drift", res.norm_drift);
    recs.push_back(std::move(rec));
}

void append_measure_record(std::vector<ResultRecord>& recs, const std::string& id,
                           const std::string& tag, double tau, std::int64_t samples,
                           const MeasureRecord& mr) {
    ResultRecord rec;
    rec.put("id", id + "-measure");
    rec.put("cfg", tag);
    rec.put("tau", tau);
    rec.put("samples", samples);
    rec.put("p_ground", mr.p_ground);
    rec.put("p_equiv_ratio", mr.p_equiv_over_p_tot);
    rec.put("verifier", mr.verifier_ran ? 1 : 0);
    recs.push_back(std::move(rec));
}

// Step count giving two propagator steps per unit of annealing time, with a
// floor so short schedules still resolve the crossover.
std::int64_t auto_qa_steps(double tau) {
    return std::max<std::int64_t>(500, static_cast<std::int64_t>(std::llround(std::ceil(2.0 * tau))));
}

struct AnnealOpts {
    std::string circuit;
    std::string machine;
    std::string rules;
    double tau = 1000.0;
    std::int64_t steps = 0;
    std::int64_t cap = 20000;
    double lambda = 0.0;
    std::int64_t stride = 0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

int run_anneal(const AnnealOpts& o) {
    const CircuitTensor input = load_circuit(o.circuit);
    const MachineSpec machine = load_machine(o.machine);
    const RuleSet rules = load_ruleset(o.rules);
    QAConfig cfg;
    cfg.tau = o.tau;
    cfg.n_steps = o.steps > 0 ? o.steps : auto_qa_steps(o.tau);
    cfg.cap = o.cap;
    cfg.lambda = o.lambda;
    cfg.record_stride = o.stride;
    cfg.ruleset = &rules;
    cfg.machine = &machine;
    const QAResult res = evolve(input, cfg);
    const std::string tag =
        config_tag({"anneal", o.circuit, o.machine, o.rules, format_double(o.tau),
                    format_int(cfg.n_steps), format_int(o.cap), format_double(o.lambda),
                    format_int(o.stride)});
    std::vector<ResultRecord> recs;
    append_qa_records(recs, "anneal", tag, res);
    if (o.samples > 0) {
        Rng rng(o.seed);
        const MeasureRecord mr = measure(res, o.samples, rng);
        append_measure_record(recs, "anneal", tag, res.tau, o.samples, mr);
    }
    emit(lines_of(recs), o.out);
    return 0;
}

// ---- verify ----

struct VerifyOpts {
    std::string circuit;
    std::string against;
    bool against_dft = false;
    double tol = 1e-9;
    std::string out;
};

int run_verify(const VerifyOpts& o) {
    const CircuitTensor tensor = load_circuit(o.circuit);
    const Eigen::MatrixXcd u = circuit_unitary(tensor);
    Eigen::MatrixXcd v;
    const char* mode = "circuit";
    if (o.against_dft) {
        mode = "dft";
        v = dft_matrix(tensor.dims.qubit_count());
    } else {
        const CircuitTensor other = load_circuit(o.against);
        if (tensor.dims.qubit_extents != other.dims.qubit_extents)
            throw VerifyError(VerifyError::Code::DimensionMismatch,
                              "circuits have different qubit extents");
        v = circuit_unitary(other);
    }
    const double deficit = phase_deficit(u, v);
    const bool ok = deficit <= o.tol;
    ResultRecord rec;
    rec.put("id", "verify");
    rec.put("cfg", config_tag({"verify", o.circuit, o.against, mode, format_double(o.tol)}));
    rec.put("mode", mode);
    rec.put("deficit", deficit);
    rec.put("distance", phase_distance(u, v));
    rec.put("tol", o.tol);
    rec.put("equivalent", ok ? 1 : 0);
    emit(lines_of({rec}), o.out);
    if (!ok) {
        std::cerr << "not equivalent: phase deficit " << format_double(deficit) << " exceeds "
                  << format_double(o.tol) << '\n';
        return 2;
    }
    return 0;
}

// ---- validate-rules ----

struct ValidateRulesOpts {
    std::string rules;
    std::int64_t modulus = 0;
    std::string out;
};

int run_validate_rules(const ValidateRulesOpts& o) {
    const RuleSet rs = read_ruleset(o.rules);
    const std::int64_t m = o.modulus > 0 ? o.modulus : natural_modulus(rs);
    const std::string tag = config_tag({"validate-rules", o.rules, format_int(m)});
    std::vector<ResultRecord> recs;
    int passed = 0;
    for (const Rule& rule : rs.rules) {
        const ValidationResult vr = validate_rule(rule, m);
        ResultRecord rec;
        rec.put("id", "validate-rules");
        rec.put("cfg", tag);
        rec.put("rule", rule.name);
        rec.put("modulus", m);
        rec.put("bindings", vr.bindings_checked);
        rec.put("sampled", vr.sampled ? 1 : 0);
        rec.put("max_deficit", vr.max_deficit);
        rec.put("status", vr.pass ? "pass" : "fail");
        recs.push_back(std::move(rec));
        if (vr.pass) ++passed;
    }
    const int total = static_cast<int>(rs.rules.size());
    ResultRecord rec;
    rec.put("id", "validate-rules-summary");
    rec.put("cfg", tag);
    rec.put("modulus", m);
    rec.put("rules", total);
    rec.put("passed", passed);
    rec.put("failed", total - passed);
    recs.push_back(std::move(rec));
    emit(lines_of(recs), o.out);
    if (passed != total) {
        std::cerr << "rule validation failed for " << (total - passed) << " of " << total
                  << " rules\n";
        return 2;
    }
    return 0;
}

// ---- noisy-sim ----

std::set<GateKind> kinds_used(const CircuitTensor& tensor) {
    std::set<GateKind> kinds;
    for (const Instruction& ins : decode_instructions(tensor)) kinds.insert(ins.kind);
    return kinds;
}

NoiseSpec build_noise(const CircuitTensor& tensor, double calibrate_target,
                      const std::vector<std::string>& sigma_args, int n_traj) {
    NoiseSpec noise;
    noise.n_traj = n_traj;
    if (calibrate_target > 0.0) {
        for (GateKind kind : kinds_used(tensor))
            noise.sigma[kind] = calibrate_sigma(kind, calibrate_target);
    }
    for (const std::string& arg : sigma_args) {
        const std::size_t eq = arg.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--sigma expects KIND=VALUE, got '" + arg + "'");
        const std::optional<GateKind> kind = kind_from_name(arg.substr(0, eq));
        if (!kind || *kind == GateKind::Idle || *kind == GateKind::Busy)
            throw std::invalid_argument("--sigma names an unknown gate kind in '" + arg + "'");
        noise.sigma[*kind] = parse_double(arg.substr(eq + 1));
    }
    return noise;
}

void append_sigma_fields(ResultRecord& rec, const NoiseSpec& noise) {
    for (const auto& [kind, sigma] : noise.sigma)
        rec.put(std::string("sigma_") + kind_name(kind), sigma);
}

struct NoisySimOpts {
    std::string circuit;
    std::string machine;
    std::uint64_t seed = 0;
    int traj = 100;
    double calibrate = 0.0;
    std::vector<std::string> sigmas;
    bool no_crosstalk = false;
    int threads = 1;
    std::string out;
};

int run_noisy_sim(const NoisySimOpts& o) {
    const CircuitTensor tensor = load_circuit(o.circuit);
    const MachineSpec machine = load_machine(o.machine);
    const NoiseSpec noise = build_noise(tensor, o.calibrate, o.sigmas, o.traj);
    const SimResult sim =
        simulate_circuit_infidelity(tensor, noise, o.no_crosstalk ? nullptr : &machine, o.seed);
    const double i_cost = total_infidelity(tensor, machine);
    std::string tag_sigma;
    for (const auto& [kind, sigma] : noise.sigma)
        tag_sigma += std::string(kind_name(kind)) + "=" + format_double(sigma) + ";";
    ResultRecord rec;
    rec.put("id", "noisy-sim");
    rec.put("cfg", config_tag({"noisy-sim", o.circuit, o.machine, tag_sigma,
                               format_int(o.traj), o.no_crosstalk ? "nox" : "x"}));
    rec.put("seed", o.seed);
    rec.put("traj", static_cast<std::int64_t>(sim.n_traj));
    rec.put("i_sim", sim.i_sim);
    rec.put("std_error", sim.std_error);
    rec.put("i_cost", i_cost);
    append_sigma_fields(rec, noise);
    emit(lines_of({rec}), o.out);
    return 0;
}

// ---- experiment presets ----

struct ExpQaOpts {
    std::vector<double> taus = {125.0, 250.0, 500.0, 1000.0, 2000.0};
    double dt = 0.5;
    std::int64_t cap = 20000;
    std::int64_t samples = 4096;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

int run_experiment_qa(const ExpQaOpts& o) {
    const CircuitTensor input = load_circuit("example1-qa");
    const MachineSpec machine = load_machine("example1");
    const RuleSet rules = load_ruleset("example1-qa");
    if (o.dt <= 0.0) throw std::invalid_argument("--dt must be positive");
    std::string tau_list;
    for (double tau : o.taus) tau_list += format_double(tau) + ";";
    const std::string tag = config_tag(
        {"example1-qa", tau_list, format_double(o.dt), format_int(o.cap), format_int(o.samples)});
    std::vector<ResultRecord> recs;
    for (double tau : o.taus) {
        QAConfig cfg;
        cfg.tau = tau;
        cfg.n_steps =
            std::max<std::int64_t>(500, static_cast<std::int64_t>(std::llround(std::ceil(tau / o.dt))));
        cfg.cap = o.cap;
        cfg.ruleset = &rules;
        cfg.machine = &machine;
        const QAResult res = evolve(input, cfg);
        append_qa_records(recs, "example1-qa", tag, res);
        if (o.samples > 0) {
            Rng rng(derive_seed(o.seed, static_cast<std::uint64_t>(std::llround(tau))));
            const MeasureRecord mr = measure(res, o.samples, rng);
            append_measure_record(recs, "example1-qa", tag, tau, o.samples, mr);
        }
    }
    emit(lines_of(recs), o.out);
    return 0;
}

struct ExpQftOpts {
    int qubits = 10;
    int replicas = 5;
    std::int64_t steps = 0;   // 0 = 200 x N_Q x N_T
    std::int64_t stride = -1; // -1 = steps/100
    double t_max = 0.0;
    double t_min = 0.0;
    std::uint64_t seed = 0;
    bool validate = true;
    double target = 1e-7;
    int validate_traj = 100;
    int threads = 1;
    std::string out;
};

int run_experiment_qft(const ExpQftOpts& o) {
    const CircuitTensor input = gen_qft(o.qubits);
    const MachineSpec machine = load_machine("qft");
    const RuleSet rules = load_ruleset("qft");
    const std::int64_t scale =
        static_cast<std::int64_t>(input.dims.qubit_count()) * input.dims.time_steps;
    SAConfig cfg;
    cfg.t_max = o.t_max;
    cfg.t_min = o.t_min;
    cfg.n_steps = o.steps > 0 ? o.steps : 200 * scale;
    cfg.record_stride = o.stride >= 0 ? o.stride : std::max<std::int64_t>(1, cfg.n_steps / 100);
    cfg.replicas = o.replicas;
    cfg.seed = o.seed;
    cfg.ruleset = &rules;
    cfg.machine = &machine;
    const std::string tag =
        config_tag({"qft-sa", format_int(o.qubits), format_int(cfg.n_steps),
                    format_int(cfg.record_stride), format_int(o.replicas),
                    format_double(o.t_max), format_double(o.t_min)});
    const EnsembleRecord ens = run_ensemble(input, cfg);
    std::vector<ResultRecord> recs = sa_records("qft-sa", tag, ens, o.seed);
    if (o.validate && input.dims.qubit_count() <= 12) {
        NoiseSpec noise = build_noise(input, o.target, {}, o.validate_traj);
        const std::uint64_t sim_seed = derive_seed(o.seed, 0x73696d);
        const SimResult sim_in = simulate_circuit_infidelity(input, noise, &machine, sim_seed);
        const SimResult sim_best =
            simulate_circuit_infidelity(ens.best_circuit, noise, &machine, sim_seed);
        ResultRecord rec;
        rec.put("id", "qft-sa-noisy");
        rec.put("cfg", tag);
        rec.put("seed", o.seed);
        rec.put("target", o.target);
        rec.put("traj", static_cast<std::int64_t>(o.validate_traj));
        rec.put("i_sim_input", sim_in.i_sim);
        rec.put("i_sim_best", sim_best.i_sim);
        rec.put("se_input", sim_in.std_error);
        rec.put("se_best", sim_best.std_error);
        if (sim_in.i_sim > 0.0) rec.put("I_I_sim", 1.0 - sim_best.i_sim / sim_in.i_sim);
        rec.put("I_I_cost", ens.improvement);
        append_sigma_fields(rec, noise);
        recs.push_back(std::move(rec));
    }
    emit(lines_of(recs), o.out);
    return 0;
}

struct ExpThsOpts {
    int rows = 4;
    int cols = 4;
    int periods = 8;
    int replicas = 5;
    std::int64_t steps = 0;   // 0 = 200 x N_Q x N_T
    std::int64_t stride = -1; // -1 = steps/100
    double t_max = 0.0;
    double t_min = 0.0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

int run_experiment_ths(const ExpThsOpts& o) {
    const CircuitTensor input = gen_ths(o.rows, o.cols, o.periods, 2, 4, 2);
    const MachineSpec machine = load_machine("ths");
    const RuleSet full = load_ruleset("ths");
    // The annealer proposes only from the non-insertion rules. With uniform
    // anchor proposals the three zero-gate rules own most of the table, and
    // the gates they insert clog the hop lanes; dropping them roughly doubles
    // the reachable improvement at 8x8 in equal wall time. Every move still
    // comes from the full validated library, so reachability keeps implying
    // equivalence.
    RuleSet rules;
    rules.name = full.name + "-moves";
    for (const Rule& r : full.rules) {
        if (r.name == "rz-zero" || r.name == "rx-zero" || r.name == "cp-zero") continue;
        rules.rules.push_back(r);
    }
    const std::int64_t scale =
        static_cast<std::int64_t>(input.dims.qubit_count()) * input.dims.time_steps;
    SAConfig cfg;
    cfg.t_max = o.t_max > 0.0 ? o.t_max : 2e-4;
    cfg.t_min = o.t_min > 0.0 ? o.t_min : 1e-6;
    cfg.n_steps = o.steps > 0 ? o.steps : 20000 * scale;
    cfg.record_stride = o.stride >= 0 ? o.stride : std::max<std::int64_t>(1, cfg.n_steps / 100);
    cfg.replicas = o.replicas;
    cfg.seed = o.seed;
    cfg.ruleset = &rules;
    cfg.machine = &machine;
    const std::string tag =
        config_tag({"ths-sa", format_int(o.rows), format_int(o.cols), format_int(o.periods),
                    format_int(cfg.n_steps), format_int(cfg.record_stride), format_int(o.replicas),
                    format_double(o.t_max), format_double(o.t_min)});
    const EnsembleRecord ens = run_ensemble(input, cfg);
    emit(lines_of(sa_records("ths-sa", tag, ens, o.seed)), o.out);
    return 0;
}

// ---- export-csv ----

struct ExportOpts {
    std::string in;
    std::string out;
};

int run_export_csv(const ExportOpts& o) {
    const std::vector<ResultRecord> records = parse_records(read_text_file(o.in));
    emit(records_to_csv(records), o.out);
    return 0;
}

void add_threads_flag(CLI::App* cmd, int& threads) {
    cmd->add_option("--threads", threads, "cap on worker threads (this build runs one worker)")
        ->check(CLI::Range(1, 4096));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"noise-aware lattice-circuit workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "latq 1.0");

    // generate
    CLI::App* gen = app.add_subcommand("generate", "write a circuit file");
    gen->require_subcommand(1);
    GenQftOpts gq;
    CLI::App* gen_qft_cmd = gen->add_subcommand("qft", "Fourier-transform circuit on a chain");
    gen_qft_cmd->add_option("--qubits", gq.qubits, "chain length")->required();
    gen_qft_cmd->add_flag("--swap-area", gq.swap_area, "add empty first and last steps");
    gen_qft_cmd->add_option("--out", gq.out, "output path (default stdout)");
    GenThsOpts gt;
    CLI::App* gen_ths_cmd = gen->add_subcommand("ths", "Trotterized evolution on a grid");
    gen_ths_cmd->add_option("--rows", gt.rows, "grid rows (even)")->capture_default_str();
    gen_ths_cmd->add_option("--cols", gt.cols, "grid columns (even)")->capture_default_str();
    gen_ths_cmd->add_option("--periods", gt.periods, "Trotter periods of 8 steps each")
        ->capture_default_str();
    gen_ths_cmd->add_option("--k1", gt.k1, "RZ layer grid angle")->capture_default_str();
    gen_ths_cmd->add_option("--k2", gt.k2, "RX layer grid angle")->capture_default_str();
    gen_ths_cmd->add_option("--k3", gt.k3, "CP layer grid angle")->capture_default_str();
    gen_ths_cmd->add_option("--modulus", gt.modulus, "angle grid modulus")->capture_default_str();
    gen_ths_cmd->add_option("--out", gt.out, "output path (default stdout)");
    std::string gen_example1_out;
    CLI::App* gen_ex1_cmd = gen->add_subcommand("example1", "shipped 4-qubit reference circuit");
    gen_ex1_cmd->add_option("--out", gen_example1_out, "output path (default stdout)");

    // cost
    CostOpts co;
    CLI::App* cost_cmd = app.add_subcommand("cost", "score a circuit against a machine");
    cost_cmd->add_option("--circuit", co.circuit, "circuit file or asset name")->required();
    cost_cmd->add_option("--machine", co.machine, "machine file or asset name")->required();
    cost_cmd->add_option("--out", co.out, "output path (default stdout)");

    // compile
    CompileOpts cp;
    CLI::App* compile_cmd = app.add_subcommand("compile", "simulated-annealing compiler");
    compile_cmd->add_option("--circuit", cp.circuit, "input circuit file or asset name")->required();
    compile_cmd->add_option("--machine", cp.machine, "machine file or asset name")->required();
    compile_cmd->add_option("--rules", cp.rules, "rule library file or asset name")->required();
    compile_cmd->add_option("--steps", cp.steps, "Metropolis steps per replica")->required();
    compile_cmd->add_option("--seed", cp.seed, "random seed")->required();
    compile_cmd->add_option("--replicas", cp.replicas, "independent chains")->capture_default_str();
    compile_cmd->add_option("--tmax", cp.t_max, "starting temperature (0 = auto)");
    compile_cmd->add_option("--tmin", cp.t_min, "final temperature (0 = auto)");
    compile_cmd->add_option("--stride", cp.stride, "sample stride (0 = endpoints only)");
    compile_cmd->add_option("--out", cp.out, "record output path (default stdout)");
    compile_cmd->add_option("--save-best", cp.save_best, "write the best circuit here");
    add_threads_flag(compile_cmd, cp.threads);

    // anneal
    AnnealOpts an;
    CLI::App* anneal_cmd = app.add_subcommand("anneal", "exact annealing emulation");
    anneal_cmd->add_option("--circuit", an.circuit, "input circuit file or asset name")->required();
    anneal_cmd->add_option("--machine", an.machine, "machine file or asset name")->required();
    anneal_cmd->add_option("--rules", an.rules, "rule library file or asset name")->required();
    anneal_cmd->add_option("--tau", an.tau, "annealing time")->required();
    anneal_cmd->add_option("--steps", an.steps, "propagator steps (0 = two per unit time)");
    anneal_cmd->add_option("--cap", an.cap, "equivalence-class size cap")->capture_default_str();
    anneal_cmd->add_option("--lambda", an.lambda, "problem-Hamiltonian scale (0 = auto)");
    anneal_cmd->add_option("--stride", an.stride, "checkpoint stride (0 = about 50 checkpoints)");
    anneal_cmd->add_option("--samples", an.samples, "final-state measurement samples");
    CLI::Option* anneal_seed = anneal_cmd->add_option("--seed", an.seed, "sampling seed");
    anneal_cmd->add_option("--out", an.out, "record output path (default stdout)");
    add_threads_flag(anneal_cmd, an.threads);

    // verify
    VerifyOpts vf;
    CLI::App* verify_cmd = app.add_subcommand("verify", "unitary equivalence up to global phase");
    verify_cmd->add_option("circuit", vf.circuit, "circuit file or asset name")->required();
    CLI::App* target = verify_cmd->add_option_group("target", "comparison target");
    target->add_option("--against", vf.against, "reference circuit file or asset name");
    target->add_flag("--against-dft", vf.against_dft, "compare with the Fourier matrix");
    target->require_option(1);
    verify_cmd->add_option("--tol", vf.tol, "phase-deficit tolerance")->capture_default_str();
    verify_cmd->add_option("--out", vf.out, "record output path (default stdout)");

    // validate-rules
    ValidateRulesOpts vr;
    CLI::App* validate_cmd = app.add_subcommand("validate-rules", "unitary check of a rule library");
    validate_cmd->add_option("--rules", vr.rules, "rule library file or asset name")->required();
    validate_cmd->add_option("--modulus", vr.modulus, "angle grid modulus (0 = natural)");
    validate_cmd->add_option("--out", vr.out, "record output path (default stdout)");

    // noisy-sim
    NoisySimOpts ns;
    CLI::App* noisy_cmd = app.add_subcommand("noisy-sim", "noisy statevector trajectories");
    noisy_cmd->add_option("--circuit", ns.circuit, "circuit file or asset name")->required();
    noisy_cmd->add_option("--machine", ns.machine, "machine file or asset name")->required();
    noisy_cmd->add_option("--seed", ns.seed, "random seed")->required();
    noisy_cmd->add_option("--traj", ns.traj, "trajectories")->capture_default_str();
    noisy_cmd->add_option("--calibrate", ns.calibrate,
                          "calibrate every used gate kind to this expected infidelity");
    noisy_cmd->add_option("--sigma", ns.sigmas, "per-kind noise stddev as KIND=VALUE (repeatable)");
    noisy_cmd->add_flag("--no-crosstalk", ns.no_crosstalk, "disable crosstalk phases");
    noisy_cmd->add_option("--out", ns.out, "record output path (default stdout)");
    add_threads_flag(noisy_cmd, ns.threads);

    // experiment
    CLI::App* exp = app.add_subcommand("experiment", "shipped experiment presets");
    exp->require_subcommand(1);
    ExpQaOpts eq;
    CLI::App* exp_qa_cmd = exp->add_subcommand("example1-qa", "annealing emulation preset");
    exp_qa_cmd->add_option("--taus", eq.taus, "annealing times")->delimiter(',');
    exp_qa_cmd->add_option("--dt", eq.dt, "propagator step size")->capture_default_str();
    exp_qa_cmd->add_option("--cap", eq.cap, "class size cap")->capture_default_str();
    exp_qa_cmd->add_option("--samples", eq.samples, "measurement samples per tau")
        ->capture_default_str();
    exp_qa_cmd->add_option("--seed", eq.seed, "sampling seed")->required();
    exp_qa_cmd->add_option("--out", eq.out, "record output path (default stdout)");
    add_threads_flag(exp_qa_cmd, eq.threads);
    ExpQftOpts ef;
    CLI::App* exp_qft_cmd = exp->add_subcommand("qft-sa", "Fourier-circuit annealing preset");
    exp_qft_cmd->add_option("--qubits", ef.qubits, "chain length")->capture_default_str();
    exp_qft_cmd->add_option("--replicas", ef.replicas, "independent chains")->capture_default_str();
    exp_qft_cmd->add_option("--steps", ef.steps, "Metropolis steps (0 = 200 per site)");
    exp_qft_cmd->add_option("--stride", ef.stride, "sample stride (-1 = steps/100)");
    exp_qft_cmd->add_option("--tmax", ef.t_max, "starting temperature (0 = auto)");
    exp_qft_cmd->add_option("--tmin", ef.t_min, "final temperature (0 = auto)");
    exp_qft_cmd->add_option("--seed", ef.seed, "random seed")->required();
    exp_qft_cmd->add_flag("--validate,!--no-validate", ef.validate,
                          "run the noisy statevector check on input and best");
    exp_qft_cmd->add_option("--target", ef.target, "per-gate infidelity for calibration")
        ->capture_default_str();
    exp_qft_cmd->add_option("--validate-traj", ef.validate_traj, "validation trajectories")
        ->capture_default_str();
    exp_qft_cmd->add_option("--out", ef.out, "record output path (default stdout)");
    add_threads_flag(exp_qft_cmd, ef.threads);
    ExpThsOpts et;
    CLI::App* exp_ths_cmd = exp->add_subcommand("ths-sa", "Trotter-circuit annealing preset");
    exp_ths_cmd->add_option("--rows", et.rows, "grid rows")->capture_default_str();
    exp_ths_cmd->add_option("--cols", et.cols, "grid columns")->capture_default_str();
    exp_ths_cmd->add_option("--periods", et.periods, "Trotter periods")->capture_default_str();
    exp_ths_cmd->add_option("--replicas", et.replicas, "independent chains")->capture_default_str();
    exp_ths_cmd->add_option("--steps", et.steps, "Metropolis steps (0 = 20000 per site)");
    exp_ths_cmd->add_option("--stride", et.stride, "sample stride (-1 = steps/100)");
    exp_ths_cmd->add_option("--tmax", et.t_max, "starting temperature (0 = preset 2e-4)");
    exp_ths_cmd->add_option("--tmin", et.t_min, "final temperature (0 = preset 1e-6)");
    exp_ths_cmd->add_option("--seed", et.seed, "random seed")->required();
    exp_ths_cmd->add_option("--out", et.out, "record output path (default stdout)");
    add_threads_flag(exp_ths_cmd, et.threads);

    // export-csv
    ExportOpts ex;
    CLI::App* export_cmd = app.add_subcommand("export-csv", "convert a record stream to CSV");
    export_cmd->add_option("--in", ex.in, "record file")->required();
    export_cmd->add_option("--out", ex.out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            if (gen_qft_cmd->parsed()) return run_generate_qft(gq);
            if (gen_ths_cmd->parsed()) return run_generate_ths(gt);
            return run_generate_example1(gen_example1_out);
        }
        if (cost_cmd->parsed()) return run_cost(co);
        if (compile_cmd->parsed()) return run_compile(cp);
        if (anneal_cmd->parsed()) {
            if (an.samples > 0 && anneal_seed->count() == 0) {
                std::cerr << "error: --seed is required when --samples > 0\n";
                return 1;
            }
            return run_anneal(an);
        }
        if (verify_cmd->parsed()) return run_verify(vf);
        if (validate_cmd->parsed()) return run_validate_rules(vr);
        if (noisy_cmd->parsed()) return run_noisy_sim(ns);
        if (exp->parsed()) {
            if (exp_qa_cmd->parsed()) return run_experiment_qa(eq);
            if (exp_qft_cmd->parsed()) return run_experiment_qft(ef);
            return run_experiment_ths(et);
        }
        if (export_cmd->parsed()) return run_export_csv(ex);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
