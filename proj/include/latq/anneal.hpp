#pragma once

// Simulated-Annealing compiler: Metropolis over the rewrite-equivalence class
// with a geometric temperature schedule. Proposals are drawn uniformly from
// the fixed, state-independent set of (rule, direction, orientation, anchor)
// tuples that fit the lattice; a tuple that does not match the current state
// counts as a rejected step, which keeps the proposal kernel symmetric.

#include <cstdint>
#include <optional>
#include <vector>

#include "latq/cost.hpp"
#include "latq/lattice.hpp"
#include "latq/rng.hpp"
#include "latq/rules.hpp"

namespace latq {

struct SAConfig {
    double t_max = 0.0; // 0 = auto: 95th percentile of |delta I| over 1000 proposals
    double t_min = 0.0; // 0 = auto: 1e-3 x smallest positive machine infidelity
    std::int64_t n_steps = 1;
    std::int64_t record_stride = 0; // 0 = endpoints only
    int replicas = 1;
    std::uint64_t seed = 0;
    const RuleSet* ruleset = nullptr;  // non-owning, must outlive the run
    const MachineSpec* machine = nullptr;
};

// Geometric schedule T_k = t_max * (t_min/t_max)^(k/n) for k in [0, n].
double temperature(std::int64_t k, std::int64_t n, double t_max, double t_min);

// Schedule endpoint defaults. t_min: 1e-3 x the smallest positive infidelity
// the machine defines (gate, idle, or swap-area penalty). t_max: the 95th
// percentile of |delta I| over 1000 proposals drawn from the input with a
// substream of `seed`; falls back to the largest gate infidelity when no
// proposal moves the cost.
double default_t_min(const MachineSpec& machine);
double default_t_max(const CircuitTensor& input, const RuleSet& rules, const MachineSpec& machine,
                     std::uint64_t seed);

// One entry of the fixed proposal set.
struct ProposalTriple {
    int rule = 0;
    bool forward = true;
    PartnerDir orient = PartnerDir::PlusX;
    int t = 0;
    int qx = 0;
    int qy = 0;
};

// Every (rule, direction, orientation, anchor) tuple that geometrically fits
// the lattice, in enumerate_moves order. State-independent.
std::vector<ProposalTriple> proposal_triples(const RuleSet& rules, const LatticeDims& dims);

// Uniform draw over `triples`, then uniform over the admissible bindings at
// the drawn tuple; none when the tuple does not match the state. Consumes one
// uniform_int draw for the tuple and, on a match, one for the binding.
std::optional<Move> propose(const CircuitTensor& tensor, const RuleSet& rules,
                            const std::vector<ProposalTriple>& triples, Rng& rng);

// Convenience overload that rebuilds the tuple table on every call.
std::optional<Move> propose(const CircuitTensor& tensor, const RuleSet& rules, Rng& rng);

// One Metropolis step at temperature t: propose, accept with probability
// min(1, exp(-delta I / t)) (the uniform accept draw is consumed only when
// delta I > 0), mutate the tensor on accept. Returns whether it accepted.
// Reference implementation with a throwaway evaluator; chains use SAContext,
// which consumes the identical draw sequence.
bool mh_step(CircuitTensor& tensor, double t, const RuleSet& rules, const MachineSpec& machine,
             Rng& rng);

// Chain state bundled with the caches that make steps cheap: the proposal
// table, a CostEvaluator, and the running cost, updated by exact per-step
// deltas and periodically resynced against a full recompute.
class SAContext {
  public:
    SAContext(CircuitTensor input, const RuleSet& rules, const MachineSpec& machine);

    const CircuitTensor& state() const { return state_; }
    double current_cost() const { return cost_; }
    const std::vector<ProposalTriple>& triples() const { return triples_; }

    std::optional<Move> propose(Rng& rng) const;
    bool step(double t, Rng& rng);

    // Recomputes the running cost from scratch and returns it.
    double resync();

  private:
    const RuleSet& rules_;
    CostEvaluator eval_;
    CircuitTensor state_;
    double cost_ = 0.0;
    std::vector<ProposalTriple> triples_;
};

struct ChainSample {
    std::int64_t k = 0;    // completed steps
    double temperature = 0.0;
    double current = 0.0;  // cost of the chain state
    double best = 0.0;     // best cost seen so far
    std::int64_t accepted = 0;
};

struct ChainRecord {
    std::vector<ChainSample> samples;
    CircuitTensor best_circuit;
    double i_input = 0.0;
    double i_opt = 0.0;        // exact recompute on the best circuit
    double improvement = 0.0;  // 1 - i_opt/i_input, 0 when i_input == 0
    std::int64_t accepted = 0;
    std::int64_t steps = 0;
    double t_max = 0.0; // resolved endpoints actually used
    double t_min = 0.0;
    std::uint64_t seed = 0;
};

// Anneals `input` for cfg.n_steps Metropolis steps. Deterministic in
// (input, cfg). The best-so-far circuit, not the final state, is the output.
// n_steps = 0 degenerates to the input. Throws std::invalid_argument on a
// config violation and propagates cost/rules errors.
ChainRecord run_chain(const CircuitTensor& input, const SAConfig& cfg);

struct EnsembleRecord {
    std::vector<ChainRecord> chains;
    double i_input = 0.0;
    double i_opt = 0.0;          // best over replicas
    double improvement = 0.0;    // 1 - i_opt/i_input
    double mean_improvement = 0.0;
    double min_improvement = 0.0;
    double max_improvement = 0.0;
    CircuitTensor best_circuit;
};

// cfg.replicas independent chains; replica 0 runs cfg.seed itself (so one
// replica reproduces run_chain), replica r > 0 runs derive_seed(cfg.seed, r).
EnsembleRecord run_ensemble(const CircuitTensor& input, const SAConfig& cfg);

} // namespace latq
