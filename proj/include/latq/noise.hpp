#pragma once

// Coherent gate-noise model used to validate the cost function: every gate is
// written as a generator exponential whose angle is perturbed by a Gaussian
// draw, and circuits are scored by exact statevector trajectories against the
// noiseless circuit on random separable states. Crosstalk, when the machine
// defines a kernel, enters as a random two-qubit ZZ phase whose expected
// infidelity equals the cost model's pair term.

#include <cstdint>
#include <map>
#include <stdexcept>

#include <Eigen/Core>

#include "latq/cost.hpp"
#include "latq/lattice.hpp"
#include "latq/rng.hpp"

namespace latq {

struct NonMonotoneEstimate : std::runtime_error {
    explicit NonMonotoneEstimate(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoiseSpec {
    std::map<GateKind, double> sigma; // generator-angle stddev per gate kind
    int n_traj = 100;

    double sigma_for(GateKind kind) const;
    bool all_zero() const;
};

// The gate's generator exponential with its angle perturbed by epsilon;
// epsilon = 0 reproduces the exact gate. 2x2 for single-qubit kinds, 4x4 for
// CZ / CP / SWAP. Throws CostError(UnknownGateKind) for Idle and Busy.
Eigen::MatrixXcd perturbed_gate(GateKind kind, double theta, double epsilon);

// Perturbed gate with epsilon drawn from N(0, sigma^2) for the kind's sigma.
Eigen::MatrixXcd noisy_gate(GateKind kind, double theta, const NoiseSpec& noise, Rng& rng);

// Per-draw entanglement infidelity 1 - |tr(U' Utilde)|^2 / d^2 (U' the
// adjoint of the exact gate) at perturbation epsilon, in closed form.
double gate_draw_infidelity(GateKind kind, double epsilon);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
};

// Monte-Carlo estimate of the expected gate infidelity at noise level sigma.
// The draw block is a pure function of the seed, so estimates at different
// sigma share random numbers and are monotone in sigma.
McEstimate gate_infidelity_mc(GateKind kind, double theta, double sigma, int n, std::uint64_t seed);

// Bisection on gate_infidelity_mc (common random numbers, n draws) until the
// estimate is within 5% relative of target. Throws NonMonotoneEstimate when
// the estimate refuses to bracket the target.
double calibrate_sigma(GateKind kind, double target, int n = 100000, std::uint64_t seed = 0x106a1);

// Variance of the ZZ crosstalk phase whose expected infidelity is x:
// -2 ln(1 - 2x). Throws std::domain_error for x >= 1/2.
double crosstalk_sigma_sq(double x);

struct SimResult {
    double i_sim = 0.0;
    double std_error = 0.0;
    int n_traj = 0;
};

// Trajectory estimate of the circuit infidelity: for each trajectory draw a
// random separable state, evolve it through the exact circuit and through a
// freshly sampled noisy circuit (gate noise from `noise`, crosstalk phases
// from the machine's kernels when `machine` is non-null, skipping swap-area
// steps), and average 1 - |overlap|^2. All-zero noise returns exactly zero.
// Throws VerifyError(TooManyQubits) beyond 12 qubits.
SimResult simulate_circuit_infidelity(const CircuitTensor& tensor, const NoiseSpec& noise,
                                      const MachineSpec* machine, std::uint64_t seed);

} // namespace latq
