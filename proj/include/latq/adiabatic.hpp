#pragma once

// Exact emulation of the annealing compiler on the rewrite-equivalence class:
// enumerate every circuit reachable from the input, build the problem
// Hamiltonians on that finite basis, evolve the input basis state through the
// two-phase schedule with exact midpoint propagators, and read off the
// distribution over circuits at the end.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "latq/cost.hpp"
#include "latq/lattice.hpp"
#include "latq/rng.hpp"
#include "latq/rules.hpp"

namespace latq {

struct ClassCapExceeded : std::runtime_error {
    std::int64_t cap;
    explicit ClassCapExceeded(std::int64_t c)
        : std::runtime_error("equivalence class exceeds cap of " + std::to_string(c)), cap(c) {}
};

struct StepTooCoarse : std::runtime_error {
    explicit StepTooCoarse(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerifierUnavailable : std::runtime_error {
    explicit VerifierUnavailable(const std::string& msg) : std::runtime_error(msg) {}
};

// The reachable class: circuits[0] is the input; adjacency[i] lists (j,
// multiplicity) pairs sorted by j, where multiplicity counts the distinct
// (rule, direction, orientation, anchor, binding) tuples mapping i to j.
// Self-loops are kept. Multiplicities are symmetric by construction and
// verified during enumeration.
struct EquivalenceBasis {
    std::vector<CircuitTensor> circuits;
    std::vector<std::vector<std::pair<int, int>>> adjacency;

    int size() const { return static_cast<int>(circuits.size()); }
};

// Breadth-first closure under all moves, discovery order. Throws
// ClassCapExceeded rather than truncating.
EquivalenceBasis enumerate_class(const CircuitTensor& input, const RuleSet& rules,
                                 std::int64_t cap);

// h0[i]: site-wise Hamming distance from circuit i to the input (unique zero
// at the input). hd[i][j] = -multiplicity(i, j). hi[i] = lambda * I(circuit
// i), with lambda defaulting to 1 / max I over the class (1 when every I is
// zero) so the problem diagonal has unit spectral width.
struct Hamiltonians {
    Eigen::VectorXd h0;
    Eigen::SparseMatrix<double> hd;
    Eigen::VectorXd hi;
    Eigen::VectorXd infidelity; // raw I per basis circuit
    double lambda = 1.0;
};

Hamiltonians build_hamiltonians(const EquivalenceBasis& basis, const MachineSpec& machine,
                                double lambda = 0.0 /* 0 = auto */);

// Piecewise-linear annealing weights (w0, wd, wI) at time t: the problem
// Hamiltonian fades into the driver over the first half, the driver into the
// infidelity diagonal over the second. Throws OutOfRange outside [0, tau].
std::array<double, 3> schedule(double t, double tau);

struct QAConfig {
    double tau = 1000.0;
    std::int64_t n_steps = 1000;
    std::int64_t cap = 20000;
    double lambda = 0.0;            // 0 = auto rescale (see build_hamiltonians)
    std::int64_t record_stride = 0; // 0 = about 50 checkpoints
    const RuleSet* ruleset = nullptr; // non-owning, must outlive the run
    const MachineSpec* machine = nullptr;
};

struct QACheckpoint {
    double t_over_tau = 0.0;
    double energy = 0.0; // <H_I> in rescaled units
    double norm = 0.0;   // squared state norm
};

struct QAResult {
    EquivalenceBasis basis;
    std::vector<QACheckpoint> checkpoints;
    std::vector<double> probabilities; // final |psi_i|^2, sums to 1 within 1e-8
    std::vector<double> infidelities;  // raw I per basis circuit
    double lambda = 1.0;
    double tau = 0.0;
    std::int64_t n_steps = 0;
    double i_input = 0.0;
    double i_min = 0.0;
    double i_exp = 0.0;            // expected I under the final distribution
    double p_ground = 0.0;         // mass on the argmin-I set (1e-12 tie tol)
    double improvement_exp = 0.0;  // 1 - i_exp/i_input
    double improvement_opt = 0.0;  // 1 - i_min/i_input
    double norm_drift = 0.0;       // max |norm^2 - 1| over the evolution
};

// Evolves the input's basis vector step by step with the exact propagator of
// the midpoint Hamiltonian (dense eigensolver up to a few hundred states,
// Krylov beyond). Throws ClassCapExceeded from enumeration and StepTooCoarse
// when a step cannot meet the 1e-10 per-step unitarity budget.
QAResult evolve(const CircuitTensor& input, const QAConfig& cfg);

struct MeasureRecord {
    double p_ground = 0.0;           // exact, copied from the result
    double p_equiv_over_p_tot = 1.0; // sampled fraction passing re-verification
    bool verifier_ran = false;
    std::vector<std::int64_t> counts; // per basis index
};

// Draws n_samples circuits from the final distribution and re-verifies each
// distinct one against the input up to global phase. Throws
// VerifierUnavailable beyond 10 qubits when n_samples > 0; n_samples = 0
// skips sampling and returns the exact fields only.
MeasureRecord measure(const QAResult& result, std::int64_t n_samples, Rng& rng);

} // namespace latq
