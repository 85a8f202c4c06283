#include "latq/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace latq {

namespace {

constexpr std::uint64_t kTmaxStream = 0x746d6178; // substream tag for the T_max probe
constexpr std::int64_t kResyncStride = 1 << 16;

} // namespace

double temperature(std::int64_t k, std::int64_t n, double t_max, double t_min) {
    if (n < 1) throw std::invalid_argument("temperature: n must be at least 1");
    if (!(t_min > 0.0) || t_min > t_max) {
        throw std::invalid_argument("temperature: need 0 < t_min <= t_max");
    }
    const double frac = static_cast<double>(k) / static_cast<double>(n);
    return t_max * std::pow(t_min / t_max, frac);
}

double default_t_min(const MachineSpec& machine) {
    double smallest = 0.0;
    const auto consider = [&](double v) {
        if (v > 0.0 && (smallest == 0.0 || v < smallest)) smallest = v;
    };
    for (const auto& [kind, v] : machine.gate_infidelity) {
        (void)kind;
        consider(v);
    }
    consider(machine.idle_infidelity);
    if (machine.swap_area.enabled) consider(machine.swap_area.penalty);
    return smallest > 0.0 ? 1e-3 * smallest : 1e-9;
}

double default_t_max(const CircuitTensor& input, const RuleSet& rules, const MachineSpec& machine,
                     std::uint64_t seed) {
    const auto triples = proposal_triples(rules, input.dims);
    CostEvaluator eval(machine, input.dims);
    Rng rng(derive_seed(seed, kTmaxStream));
    std::vector<double> magnitudes;
    magnitudes.reserve(1000);
    for (int i = 0; i < 1000; ++i) {
        const auto move = propose(input, rules, triples, rng);
        if (!move) continue;
        const Patch patch = make_patch(rules, input, *move);
        if (patch.empty()) continue;
        const double d = std::abs(eval.delta(input, patch));
        if (d > 0.0) magnitudes.push_back(d);
    }
    if (!magnitudes.empty()) {
        std::sort(magnitudes.begin(), magnitudes.end());
        const auto rank = static_cast<std::size_t>(
            std::ceil(0.95 * static_cast<double>(magnitudes.size())));
        return magnitudes[rank == 0 ? 0 : rank - 1];
    }
    // Nothing moved the cost; fall back to the coarsest machine scale.
    double largest = machine.idle_infidelity;
    for (const auto& [kind, v] : machine.gate_infidelity) {
        (void)kind;
        largest = std::max(largest, v);
    }
    if (machine.swap_area.enabled) largest = std::max(largest, machine.swap_area.penalty);
    return largest > 0.0 ? largest : 1e-6;
}

std::vector<ProposalTriple> proposal_triples(const RuleSet& rules, const LatticeDims& dims) {
    std::vector<ProposalTriple> out;
    for (int ri = 0; ri < static_cast<int>(rules.rules.size()); ++ri) {
        const Rule& rule = rules.rules[static_cast<std::size_t>(ri)];
        const auto [t_lo, t_hi] = anchor_time_range(rule, dims);
        for (const bool forward : {true, false}) {
            for (const PartnerDir orient : {PartnerDir::PlusX, PartnerDir::PlusY}) {
                for (std::int64_t t = t_lo; t <= t_hi; ++t) {
                    for (int qy = 0; qy < dims.extent_y(); ++qy) {
                        for (int qx = 0; qx < dims.extent_x(); ++qx) {
                            if (!pattern_fits(rule, dims, orient, t, qx, qy)) continue;
                            out.push_back({ri, forward, orient, static_cast<int>(t), qx, qy});
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::optional<Move> propose(const CircuitTensor& tensor, const RuleSet& rules,
                            const std::vector<ProposalTriple>& triples, Rng& rng) {
    if (triples.empty()) return std::nullopt;
    const auto idx = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(triples.size())));
    const ProposalTriple& trip = triples[idx];
    const Rule& rule = rules.rules[static_cast<std::size_t>(trip.rule)];
    const auto bindings = matches_at(rule, trip.forward, tensor, trip.t, trip.qx, trip.qy, trip.orient);
    if (bindings.empty()) return std::nullopt;
    const auto bi = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(bindings.size())));
    Move move;
    move.rule = trip.rule;
    move.forward = trip.forward;
    move.orient = trip.orient;
    move.t = trip.t;
    move.qx = trip.qx;
    move.qy = trip.qy;
    move.binding = bindings[bi];
    return move;
}

std::optional<Move> propose(const CircuitTensor& tensor, const RuleSet& rules, Rng& rng) {
    return propose(tensor, rules, proposal_triples(rules, tensor.dims), rng);
}

bool mh_step(CircuitTensor& tensor, double t, const RuleSet& rules, const MachineSpec& machine,
             Rng& rng) {
    const auto move = propose(tensor, rules, rng);
    if (!move) return false;
    const Patch patch = make_patch(rules, tensor, *move);
    const double delta = patch.empty() ? 0.0 : delta_infidelity(tensor, patch, machine);
    bool accept = delta <= 0.0;
    if (!accept) accept = rng.uniform01() < std::exp(-delta / t);
    if (accept && !patch.empty()) apply_patch(tensor, patch);
    return accept;
}

SAContext::SAContext(CircuitTensor input, const RuleSet& rules, const MachineSpec& machine)
    : rules_(rules), eval_(machine, input.dims), state_(std::move(input)) {
    require_valid(state_);
    machine.check_compatible(state_);
    cost_ = eval_.total(state_);
    triples_ = proposal_triples(rules_, state_.dims);
}

std::optional<Move> SAContext::propose(Rng& rng) const {
    return latq::propose(state_, rules_, triples_, rng);
}

bool SAContext::step(double t, Rng& rng) {
    const auto move = propose(rng);
    if (!move) return false;
    const Patch patch = make_patch(rules_, state_, *move);
    const double delta = patch.empty() ? 0.0 : eval_.delta(state_, patch);
    bool accept = delta <= 0.0;
    if (!accept) accept = rng.uniform01() < std::exp(-delta / t);
    if (!accept) return false;
    if (!patch.empty()) {
        apply_patch(state_, patch);
        cost_ += delta;
    }
    return true;
}

double SAContext::resync() {
    cost_ = eval_.total(state_);
    return cost_;
}

ChainRecord run_chain(const CircuitTensor& input, const SAConfig& cfg) {
    if (cfg.ruleset == nullptr || cfg.machine == nullptr) {
        throw std::invalid_argument("run_chain: config needs a ruleset and a machine");
    }
    if (cfg.n_steps < 0) throw std::invalid_argument("run_chain: n_steps must be non-negative");
    if (cfg.record_stride < 0) throw std::invalid_argument("run_chain: record_stride must be non-negative");

    double t_max = cfg.t_max > 0.0 ? cfg.t_max
                                   : default_t_max(input, *cfg.ruleset, *cfg.machine, cfg.seed);
    double t_min = cfg.t_min > 0.0 ? cfg.t_min : default_t_min(*cfg.machine);
    if (cfg.t_max < 0.0 || cfg.t_min < 0.0 || (cfg.t_min > 0.0 && cfg.t_max > 0.0 && t_min > t_max)) {
        throw std::invalid_argument("run_chain: need 0 < t_min <= t_max");
    }
    t_min = std::min(t_min, t_max); // an auto endpoint may not cross the pinned one
    t_max = std::max(t_max, t_min);

    SAContext ctx(input, *cfg.ruleset, *cfg.machine);
    const std::int64_t n = cfg.n_steps;
    const std::int64_t sched_n = std::max<std::int64_t>(1, n);

    ChainRecord rec;
    rec.seed = cfg.seed;
    rec.t_max = t_max;
    rec.t_min = t_min;
    rec.steps = n;
    rec.i_input = ctx.current_cost();

    double best_cost = rec.i_input;
    CircuitTensor best = ctx.state();
    Rng rng(cfg.seed);

    const auto push_sample = [&](std::int64_t k, double t) {
        rec.samples.push_back({k, t, ctx.current_cost(), best_cost, rec.accepted});
    };
    push_sample(0, temperature(0, sched_n, t_max, t_min));

    for (std::int64_t k = 0; k < n; ++k) {
        const double t = temperature(k, sched_n, t_max, t_min);
        if (ctx.step(t, rng)) {
            ++rec.accepted;
            if (ctx.current_cost() < best_cost) {
                best_cost = ctx.current_cost();
                best = ctx.state();
            }
        }
        if ((k + 1) % kResyncStride == 0) {
            ctx.resync();
            if (ctx.current_cost() < best_cost) {
                best_cost = ctx.current_cost();
                best = ctx.state();
            }
        }
        const bool at_end = k + 1 == n;
        if ((cfg.record_stride > 0 && (k + 1) % cfg.record_stride == 0) || at_end) {
            push_sample(k + 1, t);
        }
    }

    rec.best_circuit = std::move(best);
    rec.i_opt = total_infidelity(rec.best_circuit, *cfg.machine);
    if (rec.i_opt > rec.i_input) {
        // Running-delta drift picked a false best; the input is never worse.
        rec.best_circuit = input;
        rec.i_opt = rec.i_input;
    }
    rec.improvement = rec.i_input > 0.0 ? 1.0 - rec.i_opt / rec.i_input : 0.0;
    return rec;
}

EnsembleRecord run_ensemble(const CircuitTensor& input, const SAConfig& cfg) {
    if (cfg.replicas < 1) throw std::invalid_argument("run_ensemble: replicas must be at least 1");
    EnsembleRecord out;
    out.chains.reserve(static_cast<std::size_t>(cfg.replicas));
    for (int r = 0; r < cfg.replicas; ++r) {
        SAConfig sub = cfg;
        if (r > 0) sub.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
        out.chains.push_back(run_chain(input, sub));
    }
    out.i_input = out.chains.front().i_input;
    std::size_t best_index = 0;
    double sum = 0.0;
    out.min_improvement = out.chains.front().improvement;
    out.max_improvement = out.chains.front().improvement;
    for (std::size_t r = 0; r < out.chains.size(); ++r) {
        const ChainRecord& c = out.chains[r];
        sum += c.improvement;
        out.min_improvement = std::min(out.min_improvement, c.improvement);
        out.max_improvement = std::max(out.max_improvement, c.improvement);
        if (c.i_opt < out.chains[best_index].i_opt) best_index = r;
    }
    out.mean_improvement = sum / static_cast<double>(out.chains.size());
    out.i_opt = out.chains[best_index].i_opt;
    out.best_circuit = out.chains[best_index].best_circuit;
    out.improvement = out.i_input > 0.0 ? 1.0 - out.i_opt / out.i_input : 0.0;
    return out;
}

} // namespace latq
