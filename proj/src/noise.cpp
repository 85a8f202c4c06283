#include "latq/noise.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latq/unitary.hpp"

namespace latq {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Singlet projector (I - XX - YY - ZZ) / 4, the generator subspace of SWAP.
Eigen::Matrix4cd singlet_projector() {
    Eigen::Matrix4cd p = Eigen::Matrix4cd::Zero();
    p(1, 1) = 0.5;
    p(2, 2) = 0.5;
    p(1, 2) = -0.5;
    p(2, 1) = -0.5;
    return p;
}

[[noreturn]] void throw_not_a_gate(GateKind kind) {
    throw CostError(CostError::Code::UnknownGateKind,
                    std::string("not a noise-modelled gate kind: ") + std::string(kind_name(kind)));
}

} // namespace

double NoiseSpec::sigma_for(GateKind kind) const {
    const auto it = sigma.find(kind);
    return it == sigma.end() ? 0.0 : it->second;
}

bool NoiseSpec::all_zero() const {
    for (const auto& [kind, s] : sigma) {
        (void)kind;
        if (s != 0.0) return false;
    }
    return true;
}

Eigen::MatrixXcd perturbed_gate(GateKind kind, double theta, double epsilon) {
    const complexd i1(0.0, 1.0);
    switch (kind) {
    case GateKind::RZ:
        return gate_rz(theta + epsilon);
    case GateKind::RX:
        return gate_rx(theta + epsilon);
    case GateKind::H: {
        // H = i exp(-i pi G / 2) with G = (X + Z) / sqrt(2); perturb the angle.
        const double a = (kPi + epsilon) / 2.0;
        const double c = std::cos(a);
        const double s = std::sin(a) / std::sqrt(2.0);
        Eigen::Matrix2cd m;
        m << i1 * c + s, s, s, i1 * c - s;
        return m;
    }
    case GateKind::CP: {
        Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
        m(3, 3) = std::exp(i1 * (theta + epsilon));
        return m;
    }
    case GateKind::CZ: {
        Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
        m(3, 3) = std::exp(i1 * (kPi + epsilon));
        return m;
    }
    case GateKind::Swap: {
        // SWAP = exp(-i pi P_s) on the singlet projector P_s; perturb the angle.
        const complexd f = std::exp(-i1 * (kPi + epsilon)) - 1.0;
        return Eigen::Matrix4cd(Eigen::Matrix4cd::Identity() + f * singlet_projector());
    }
    default:
        throw_not_a_gate(kind);
    }
}

Eigen::MatrixXcd noisy_gate(GateKind kind, double theta, const NoiseSpec& noise, Rng& rng) {
    // Always consume one draw so the stream stays aligned across sigma settings.
    const double epsilon = noise.sigma_for(kind) * rng.gaussian();
    return perturbed_gate(kind, theta, epsilon);
}

double gate_draw_infidelity(GateKind kind, double epsilon) {
    switch (kind) {
    case GateKind::H:
    case GateKind::RZ:
    case GateKind::RX: {
        // tr(U' Utilde) = 2 cos(eps/2), so 1 - |tr|^2/4 = sin^2(eps/2).
        const double s = std::sin(epsilon / 2.0);
        return s * s;
    }
    case GateKind::CZ:
    case GateKind::CP:
    case GateKind::Swap:
        // tr(U' Utilde) = 3 + e^{i eps} up to phase, so 1 - |tr|^2/16.
        return 0.375 * (1.0 - std::cos(epsilon));
    default:
        throw_not_a_gate(kind);
    }
}

McEstimate gate_infidelity_mc(GateKind kind, double theta, double sigma, int n, std::uint64_t seed) {
    // The per-draw infidelity of every supported kind is independent of the
    // nominal angle; theta is accepted to mirror the gate constructors.
    static_cast<void>(theta);
    if (n < 1) throw std::invalid_argument("gate_infidelity_mc: n must be positive");
    Rng rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double eps = sigma * rng.gaussian();
        const double x = gate_draw_infidelity(kind, eps);
        const double d = x - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (x - mean);
    }
    McEstimate est;
    est.mean = mean;
    est.n = n;
    est.std_error = n > 1 ? std::sqrt(m2 / (static_cast<double>(n) * (n - 1))) : 0.0;
    return est;
}

double calibrate_sigma(GateKind kind, double target, int n, std::uint64_t seed) {
    if (target < 0.0) throw std::domain_error("calibrate_sigma: negative target");
    if (target == 0.0) return 0.0;
    const auto estimate = [&](double s) { return gate_infidelity_mc(kind, kPi, s, n, seed).mean; };

    // Grow the upper bracket from a small-angle guess. The estimate saturates
    // (at 1/2 for single-qubit kinds, 3/8 for two-qubit kinds), so stop with
    // NonMonotoneEstimate once growth stalls below the target.
    double hi = 8.0 * std::sqrt(target);
    double est_hi = estimate(hi);
    double prev = -1.0;
    int stalls = 0;
    for (int iter = 0; est_hi < target; ++iter) {
        if (iter >= 64) throw NonMonotoneEstimate("calibrate_sigma: bracket growth exhausted");
        if (est_hi <= prev * (1.0 + 1e-9)) {
            if (++stalls >= 3) {
                throw NonMonotoneEstimate("calibrate_sigma: estimate plateaus below target");
            }
        } else {
            stalls = 0;
        }
        prev = est_hi;
        hi *= 2.0;
        est_hi = estimate(hi);
    }

    double lo = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double est = estimate(mid);
        if (std::abs(est - target) <= 0.05 * target) return mid;
        if (est < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw NonMonotoneEstimate("calibrate_sigma: bisection failed to reach 5% of target");
}

double crosstalk_sigma_sq(double x) {
    if (x < 0.0 || x >= 0.5) {
        throw std::domain_error("crosstalk_sigma_sq: infidelity must lie in [0, 1/2)");
    }
    if (x == 0.0) return 0.0;
    return -2.0 * std::log1p(-2.0 * x);
}

namespace {

double pair_distance(QubitCoord a, QubitCoord b, DistanceMetric metric) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    if (metric == DistanceMetric::Manhattan) return std::abs(dx) + std::abs(dy);
    return std::sqrt(dx * dx + dy * dy);
}

// Random single-qubit state from four gaussian draws, Haar on the Bloch sphere.
Eigen::Vector2cd random_qubit_state(Rng& rng) {
    Eigen::Vector2cd v;
    v(0) = complexd(rng.gaussian(), rng.gaussian());
    v(1) = complexd(rng.gaussian(), rng.gaussian());
    const double norm = std::sqrt(std::norm(v(0)) + std::norm(v(1)));
    if (norm == 0.0) {
        v(0) = 1.0;
        v(1) = 0.0;
        return v;
    }
    return v / norm;
}

// Diagonal exp(-i phi ZZ / 2) on the two bit positions, in place.
void apply_zz_phase(Eigen::MatrixXcd& state, double phi, int bit_a, int bit_b) {
    const complexd i1(0.0, 1.0);
    const complexd f_even = std::exp(-i1 * (phi / 2.0));
    const complexd f_odd = std::exp(i1 * (phi / 2.0));
    const Eigen::Index dim = state.rows();
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        const bool a = (idx >> bit_a) & 1;
        const bool b = (idx >> bit_b) & 1;
        state(idx, 0) *= (a == b) ? f_even : f_odd;
    }
}

struct StepGate {
    GateKind kind;
    double theta;
    QubitCoord q0;
    QubitCoord q1; // valid only when nq == 2
    int nq;
};

} // namespace

SimResult simulate_circuit_infidelity(const CircuitTensor& tensor, const NoiseSpec& noise,
                                      const MachineSpec* machine, std::uint64_t seed) {
    require_valid(tensor);
    const int nq = tensor.dims.qubit_count();
    if (nq > 12) {
        throw VerifyError(VerifyError::Code::TooManyQubits,
                          "simulate_circuit_infidelity: supports at most 12 qubits, got " +
                              std::to_string(nq));
    }
    if (machine != nullptr) machine->check_compatible(tensor);

    const int n_traj = noise.n_traj;
    if (n_traj < 1) throw std::invalid_argument("simulate_circuit_infidelity: n_traj must be positive");

    bool any_kernel = false;
    if (machine != nullptr) {
        for (const auto& k : machine->kernels) {
            if (k.coefficient != 0.0) any_kernel = true;
        }
    }
    SimResult result;
    result.n_traj = n_traj;
    if (noise.all_zero() && !any_kernel) return result;

    const std::int64_t m = tensor.dims.angle_modulus;
    const double pair_factor = (machine != nullptr && machine->ordered_pairs) ? 2.0 : 1.0;

    // Flatten the schedule once; the trajectory loop replays it.
    std::vector<std::vector<StepGate>> schedule(static_cast<std::size_t>(tensor.dims.time_steps));
    for (int t = 0; t < tensor.dims.time_steps; ++t) {
        for (const Instruction& ins : gates_at_step(tensor, t)) {
            StepGate g;
            g.kind = ins.kind;
            g.theta = is_parametric(ins.kind) ? grid_angle(ins.angle, m) : 0.0;
            g.q0 = ins.q;
            g.q1 = ins.q2.value_or(ins.q);
            g.nq = ins.q2.has_value() ? 2 : 1;
            schedule[static_cast<std::size_t>(t)].push_back(g);
        }
    }
    const bool swap_area_on = machine != nullptr && machine->swap_area.enabled;

    double mean = 0.0;
    double m2 = 0.0;
    for (int traj = 0; traj < n_traj; ++traj) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(traj)));

        // Random separable input state, qubit (0,0) as the most significant bit.
        Eigen::MatrixXcd ideal(1, 1);
        ideal(0, 0) = 1.0;
        for (int l = 0; l < nq; ++l) {
            const Eigen::Vector2cd v = random_qubit_state(rng);
            Eigen::MatrixXcd next(ideal.rows() * 2, 1);
            next.topRows(ideal.rows()) = v(0) * ideal;
            next.bottomRows(ideal.rows()) = v(1) * ideal;
            ideal = std::move(next);
        }
        Eigen::MatrixXcd noisy = ideal;

        for (int t = 0; t < tensor.dims.time_steps; ++t) {
            const auto& gates = schedule[static_cast<std::size_t>(t)];
            const bool in_swap_area =
                swap_area_on && (t == 0 || t == tensor.dims.time_steps - 1);
            for (const StepGate& g : gates) {
                const Eigen::MatrixXcd exact = gate_matrix(g.kind, g.theta);
                const Eigen::MatrixXcd drawn = noisy_gate(g.kind, g.theta, noise, rng);
                if (g.nq == 1) {
                    const int bit = qubit_bit(tensor.dims, g.q0);
                    apply_1q(ideal, exact, bit);
                    apply_1q(noisy, drawn, bit);
                } else {
                    const int bit_hi = qubit_bit(tensor.dims, g.q0);
                    const int bit_lo = qubit_bit(tensor.dims, g.q1);
                    apply_2q(ideal, exact, bit_hi, bit_lo);
                    apply_2q(noisy, drawn, bit_hi, bit_lo);
                }
            }
            if (machine == nullptr || in_swap_area) continue;
            // Crosstalk: one ZZ phase per kernel-coupled inter-gate qubit pair,
            // drawn in schedule order so reruns are reproducible.
            for (std::size_t i = 0; i + 1 < gates.size(); ++i) {
                for (std::size_t j = i + 1; j < gates.size(); ++j) {
                    const CrosstalkKernel* kernel = machine->kernel_for(gates[i].kind, gates[j].kind);
                    if (kernel == nullptr || kernel->coefficient == 0.0) continue;
                    const QubitCoord qa[2] = {gates[i].q0, gates[i].q1};
                    const QubitCoord qb[2] = {gates[j].q0, gates[j].q1};
                    for (int ai = 0; ai < gates[i].nq; ++ai) {
                        for (int bi = 0; bi < gates[j].nq; ++bi) {
                            const double r = pair_distance(qa[ai], qb[bi], kernel->metric);
                            const double x_eff = kernel->value(r) * pair_factor;
                            if (x_eff == 0.0) continue;
                            const double phi = std::sqrt(crosstalk_sigma_sq(x_eff)) * rng.gaussian();
                            apply_zz_phase(noisy, phi, qubit_bit(tensor.dims, qa[ai]),
                                           qubit_bit(tensor.dims, qb[bi]));
                        }
                    }
                }
            }
        }

        const complexd overlap = ideal.col(0).dot(noisy.col(0));
        const double infid = 1.0 - std::norm(overlap);
        const double d = infid - mean;
        mean += d / static_cast<double>(traj + 1);
        m2 += d * (infid - mean);
    }

    result.i_sim = mean;
    result.std_error = n_traj > 1 ? std::sqrt(m2 / (static_cast<double>(n_traj) * (n_traj - 1))) : 0.0;
    return result;
}

} // namespace latq
