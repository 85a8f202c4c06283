#include "doctest.h"

#include <cmath>
#include <vector>

#include "latq/anneal.hpp"
#include "latq/cost.hpp"
#include "latq/generators.hpp"
#include "latq/io.hpp"
#include "latq/lattice.hpp"
#include "latq/rng.hpp"
#include "latq/rules.hpp"

using namespace latq;

namespace {

// Straight-line transcription of the cost definition, written against
// decode_instructions output instead of the evaluator's caches. Slow and
// simple on purpose; every term is spelled out.
double reference_cost(const CircuitTensor& tensor, const MachineSpec& m) {
    double total = 0.0;
    for (int t = 0; t < tensor.dims.time_steps; ++t) {
        const InstructionList gates = gates_at_step(tensor, t);
        const bool swap_step =
            m.swap_area.enabled && (t == 0 || t == tensor.dims.time_steps - 1);
        if (swap_step) {
            for (const Instruction& g : gates) {
                bool allowed = false;
                for (GateKind k : m.swap_area.allowed) allowed = allowed || k == g.kind;
                if (!allowed) total += m.swap_area.penalty;
            }
            continue;
        }
        if (gates.empty()) continue; // fully idle step costs exactly zero
        int busy_sites = 0;
        for (const Instruction& g : gates) {
            total += m.gate_cost(g.kind);
            busy_sites += g.q2 ? 2 : 1;
        }
        total += m.idle_infidelity * (tensor.dims.qubit_count() - busy_sites);
        for (std::size_t a = 0; a < gates.size(); ++a) {
            for (std::size_t b = a + 1; b < gates.size(); ++b) {
                const CrosstalkKernel* k = m.kernel_for(gates[a].kind, gates[b].kind);
                if (!k) continue;
                std::vector<QubitCoord> qa{gates[a].q};
                if (gates[a].q2) qa.push_back(*gates[a].q2);
                std::vector<QubitCoord> qb{gates[b].q};
                if (gates[b].q2) qb.push_back(*gates[b].q2);
                for (QubitCoord pa : qa) {
                    for (QubitCoord pb : qb) {
                        const double dx = pa.x - pb.x;
                        const double dy = pa.y - pb.y;
                        const double r = k->metric == DistanceMetric::Euclidean
                                             ? std::sqrt(dx * dx + dy * dy)
                                             : std::abs(dx) + std::abs(dy);
                        const double term = k->value(r);
                        total += m.ordered_pairs ? 2.0 * term : term;
                    }
                }
            }
        }
    }
    return total;
}

CircuitTensor two_parallel_cps() {
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{1, {2, 2}, 16});
    c.at(0, {0, 0}) = control_token(GateKind::CP, PartnerDir::PlusX, 2);
    c.at(0, {1, 0}) = busy_token();
    c.at(0, {0, 1}) = control_token(GateKind::CP, PartnerDir::PlusX, 2);
    c.at(0, {1, 1}) = busy_token();
    return c;
}

} // namespace

TEST_CASE("crosstalk kernel value") {
    CrosstalkKernel k;
    k.coefficient = 2e-5;
    k.exponent = 6.0;
    CHECK(k.value(1.0) == 2e-5);
    CHECK(k.value(2.0) == doctest::Approx(2e-5 / 64.0).epsilon(1e-14));
    CHECK(k.value(std::sqrt(2.0)) == doctest::Approx(2e-5 / 8.0).epsilon(1e-12));
    CHECK_THROWS_AS(k.value(0.0), CostError);
    CHECK_THROWS_AS(k.value(-1.0), CostError);
}

TEST_CASE("two parallel neighbouring gates, every term by hand") {
    // Two CP gates side by side on a 2x2 grid, one time step. Gate budget
    // 2 x 5e-5. Crosstalk couples the four inter-gate qubit pairs: two at
    // distance 1 (2e-5 each) and two at sqrt(2) (2e-5 / 8 each), so
    // 4.5e-5. No idle sites. Total 1.45e-4.
    const CircuitTensor c = two_parallel_cps();
    const MachineSpec m = load_machine("ths");
    CHECK(total_infidelity(c, m) == doctest::Approx(1.45e-4).epsilon(1e-14));
    CHECK(crosstalk_term(m, GateKind::CP, 1.0) == 2e-5);
}

TEST_CASE("fully idle steps are free, partial idles charge per site") {
    MachineSpec m = load_machine("ths");
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{3, {2, 2}, 16});
    CHECK(total_infidelity(c, m) == 0.0);
    c.at(1, {0, 0}) = single_token(GateKind::RZ, 1);
    // one gate, three idle sites on that step; the other steps stay free
    CHECK(total_infidelity(c, m) ==
          doctest::Approx(2e-5 + 3 * 1e-5).epsilon(1e-14));
}

TEST_CASE("swap area steps") {
    const MachineSpec m = load_machine("example1"); // swap_area on, penalty 5e-5
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{3, {4}, 2});

    SUBCASE("swaps and idles in the area are free") {
        c.at(0, {0, 0}) = control_token(GateKind::Swap, PartnerDir::PlusX);
        c.at(0, {1, 0}) = busy_token();
        CHECK(total_infidelity(c, m) == 0.0);
    }
    SUBCASE("other gates charge the flat penalty, not their budget") {
        c.at(2, {0, 0}) = single_token(GateKind::H);
        CHECK(total_infidelity(c, m) == doctest::Approx(5e-5).epsilon(1e-14));
    }
    SUBCASE("no idle charge inside the area") {
        c.at(1, {0, 0}) = single_token(GateKind::H);
        // interior step: H budget plus three idle sites
        CHECK(total_infidelity(c, m) ==
              doctest::Approx(5e-6 + 3 * 5e-6).epsilon(1e-14));
    }
}

TEST_CASE("machine lookups and compatibility") {
    const MachineSpec ths = load_machine("ths");
    CHECK(ths.gate_cost(GateKind::CP) == 5e-5);
    CHECK_THROWS_AS(ths.gate_cost(GateKind::H), CostError);
    CHECK(ths.kernel_for(GateKind::CP, GateKind::CP) != nullptr);
    CHECK(ths.kernel_for(GateKind::CP, GateKind::RZ) == nullptr);

    // rank-2 machine rejects a chain circuit
    CircuitTensor chain = CircuitTensor::all_idle(LatticeDims{1, {4}, 16});
    CHECK_THROWS_AS(total_infidelity(chain, ths), CostError);

    // a used gate kind without a budget entry is rejected
    CircuitTensor g = CircuitTensor::all_idle(LatticeDims{1, {2, 2}, 16});
    g.at(0, {0, 0}) = single_token(GateKind::H);
    CHECK_THROWS_AS(total_infidelity(g, ths), CostError);
}

TEST_CASE("kernel lookup is symmetric in the kind pair") {
    MachineSpec m;
    m.gate_infidelity[GateKind::RZ] = 1e-5;
    m.gate_infidelity[GateKind::H] = 1e-5;
    CrosstalkKernel k;
    k.kind_a = GateKind::RZ;
    k.kind_b = GateKind::H;
    k.coefficient = 3e-6;
    m.kernels.push_back(k);
    REQUIRE(m.kernel_for(GateKind::H, GateKind::RZ) != nullptr);
    CHECK(m.kernel_for(GateKind::H, GateKind::RZ)->coefficient == 3e-6);
}

TEST_CASE("generated circuits match the straight-line reference cost") {
    struct Case {
        CircuitTensor circuit;
        MachineSpec machine;
    };
    std::vector<Case> cases;
    cases.push_back({load_circuit("example1"), load_machine("example1")});
    cases.push_back({gen_ths(4, 4, 2, 2, 4, 2), load_machine("ths")});
    cases.push_back({gen_qft(5), load_machine("qft")});
    for (const Case& c : cases) {
        const double got = total_infidelity(c.circuit, c.machine);
        const double want = reference_cost(c.circuit, c.machine);
        CHECK(got == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("reference cost agreement holds along a rule walk") {
    const RuleSet rules = load_ruleset("ths");
    const MachineSpec m = load_machine("ths");
    CircuitTensor state = gen_ths(2, 2, 2, 2, 4, 2);
    Rng rng(0x5EED);
    int applied = 0;
    long guard = 0;
    while (applied < 40 && guard++ < 100000) {
        auto mv = propose(state, rules, rng);
        if (!mv) continue;
        Patch p = make_patch(rules, state, *mv);
        if (p.empty()) continue;
        apply_patch(state, p);
        ++applied;
        CHECK(total_infidelity(state, m) ==
              doctest::Approx(reference_cost(state, m)).epsilon(1e-13));
    }
    CHECK(applied == 40);
}

TEST_CASE("flagship input costs stay pinned") {
    CHECK(total_infidelity(load_circuit("example1"), load_machine("example1")) ==
          doctest::Approx(12.5e-5).epsilon(1e-13));
    const MachineSpec ths = load_machine("ths");
    CHECK(total_infidelity(gen_ths(4, 4, 8, 2, 4, 2), ths) ==
          doctest::Approx(0.024186824539436203).epsilon(1e-13));
    CHECK(total_infidelity(gen_ths(8, 8, 8, 2, 4, 2), ths) ==
          doctest::Approx(0.12054506143445926).epsilon(1e-13));
    CHECK(total_infidelity(gen_qft(10), load_machine("qft")) ==
          doctest::Approx(0.007042575661677632).epsilon(1e-13));
}

TEST_CASE("total decomposes over steps") {
    const CircuitTensor c = load_circuit("example1");
    const MachineSpec m = load_machine("example1");
    CostEvaluator eval(m, c.dims);
    double sum = 0.0;
    for (int t = 0; t < c.dims.time_steps; ++t) sum += eval.step_cost(c, t);
    CHECK(sum == total_infidelity(c, m));
}

TEST_CASE("patch application checks before tokens") {
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{1, {2}, 2});
    Patch p{{0, {0, 0}, idle_token(), single_token(GateKind::H)}};
    apply_patch(c, p);
    CHECK(c.at(0, {0, 0}).kind == GateKind::H);
    // stale before token
    CHECK_THROWS_AS(apply_patch(c, p), CostError);

    Patch rev = reverse_patch(p);
    apply_patch(c, rev);
    CHECK(c.at(0, {0, 0}).kind == GateKind::Idle);
}

TEST_CASE("delta matches recompute and reversal negates bit exactly") {
    const RuleSet rules = load_ruleset("ths");
    const MachineSpec m = load_machine("ths");
    CircuitTensor state = gen_ths(2, 2, 2, 2, 4, 2);
    double base = total_infidelity(state, m);
    Rng rng(0xD317A);
    int applied = 0;
    long guard = 0;
    double worst = 0.0;
    while (applied < 300 && guard++ < 300000) {
        auto mv = propose(state, rules, rng);
        if (!mv) continue;
        Patch p = make_patch(rules, state, *mv);
        if (p.empty()) continue;
        const double d = delta_infidelity(state, p, m);
        CHECK(delta_infidelity(state, p, m) == d); // deterministic
        apply_patch(state, p);
        const double fresh = total_infidelity(state, m);
        worst = std::max(worst, std::abs(fresh - (base + d)));
        // reversing the patch gives exactly -d
        CHECK(delta_infidelity(state, reverse_patch(p), m) == -d);
        base = fresh;
        ++applied;
    }
    CHECK(applied == 300);
    CHECK(worst <= 1e-12);
}

TEST_CASE("delta rejects malformed patches") {
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{1, {2}, 2});
    const MachineSpec m = load_machine("example1");
    SUBCASE("duplicate site") {
        Patch p{{0, {0, 0}, idle_token(), single_token(GateKind::H)},
                {0, {0, 0}, idle_token(), single_token(GateKind::H)}};
        CHECK_THROWS_AS(delta_infidelity(c, p, m), CostError);
    }
    SUBCASE("before mismatch") {
        Patch p{{0, {0, 0}, single_token(GateKind::H), idle_token()}};
        CHECK_THROWS_AS(delta_infidelity(c, p, m), CostError);
    }
}

TEST_CASE("infidelity over a basis equals elementwise totals") {
    const CircuitTensor input = load_circuit("example1-qa");
    const MachineSpec m = load_machine("example1");
    const RuleSet rules = load_ruleset("example1-qa");
    std::vector<CircuitTensor> basis;
    basis.push_back(input);
    // a couple of neighbours
    for (const Move& mv : enumerate_moves(rules, input)) {
        basis.push_back(apply_at(rules, input, mv));
        if (basis.size() >= 6) break;
    }
    const std::vector<double> scored = infidelity_over_basis(basis, m);
    REQUIRE(scored.size() == basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        CHECK(scored[i] == total_infidelity(basis[i], m));
}

TEST_CASE("evaluator step cost with patch overlay") {
    const MachineSpec m = load_machine("example1");
    CircuitTensor c = load_circuit("example1");
    CostEvaluator eval(m, c.dims);
    Patch p{{3, {0, 0}, c.at(3, {0, 0}), single_token(GateKind::H)}};
    const double overlay = eval.step_cost_patched(c, 3, p);
    CircuitTensor patched = c;
    apply_patch(patched, p);
    CHECK(overlay == eval.step_cost(patched, 3));
}
