#include "latq/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <unordered_map>
#include <utility>

#include <Eigen/Dense>

#include "latq/unitary.hpp"

namespace latq {

namespace {

constexpr int kDenseLimit = 400;
constexpr double kPerStepNormTol = 1e-10;
constexpr double kGroundTieTol = 1e-12;

std::string tensor_key(const CircuitTensor& tensor) {
    std::string key;
    key.reserve(tensor.sites.size() * 10);
    for (const GateToken& tok : tensor.sites) {
        key.push_back(static_cast<char>(tok.kind));
        key.push_back(static_cast<char>(tok.partner));
        char raw[sizeof tok.angle];
        std::memcpy(raw, &tok.angle, sizeof tok.angle);
        key.append(raw, sizeof tok.angle);
    }
    return key;
}

// psi <- exp(-i dt H) psi via a full eigendecomposition of the dense step
// Hamiltonian. Exactly unitary up to roundoff.
void propagate_dense(const Hamiltonians& ham, double w0, double wd, double wi, double dt,
                     Eigen::VectorXcd& psi) {
    Eigen::MatrixXd h = wd * Eigen::MatrixXd(ham.hd);
    h.diagonal() += w0 * ham.h0 + wi * ham.hi;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXd& vec = es.eigenvectors();
    Eigen::VectorXcd y(psi.size());
    y.real() = vec.transpose() * psi.real();
    y.imag() = vec.transpose() * psi.imag();
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        y(k) *= std::exp(complexd(0.0, -dt * es.eigenvalues()(k)));
    }
    psi.real() = vec * y.real();
    psi.imag() = vec * y.imag();
}

// Krylov propagator for large bases: Lanczos with full reorthogonalization,
// grown until the residual estimate meets the unitarity budget.
void propagate_krylov(const Hamiltonians& ham, double w0, double wd, double wi, double dt,
                      Eigen::VectorXcd& psi, std::int64_t n_steps) {
    const Eigen::Index dim = psi.size();
    const int m_max = static_cast<int>(std::min<Eigen::Index>(dim, 160));
    const double nrm = psi.norm();
    if (nrm == 0.0) return;

    const Eigen::VectorXd diag = w0 * ham.h0 + wi * ham.hi;
    const auto matvec = [&](const Eigen::VectorXcd& x) {
        const Eigen::VectorXd xr = x.real();
        const Eigen::VectorXd xi = x.imag();
        Eigen::VectorXcd y(x.size());
        y.real() = wd * (ham.hd * xr) + diag.cwiseProduct(xr);
        y.imag() = wd * (ham.hd * xi) + diag.cwiseProduct(xi);
        return y;
    };

    Eigen::MatrixXcd v(dim, m_max);
    std::vector<double> alpha, beta; // beta[j] couples v_j to v_{j+1}
    v.col(0) = psi / nrm;

    int m = 0;
    Eigen::VectorXcd small_exp;
    bool converged = false;
    while (m < m_max) {
        Eigen::VectorXcd w = matvec(v.col(m));
        const double a = v.col(m).dot(w).real();
        alpha.push_back(a);
        w -= a * v.col(m);
        if (m > 0) w -= beta[static_cast<std::size_t>(m - 1)] * v.col(m - 1);
        for (int j = 0; j <= m; ++j) w -= v.col(j).dot(w) * v.col(j); // full reorth
        const double b = w.norm();
        ++m;

        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            t(j, j) = alpha[static_cast<std::size_t>(j)];
            if (j + 1 < m) {
                t(j, j + 1) = beta[static_cast<std::size_t>(j)];
                t(j + 1, j) = beta[static_cast<std::size_t>(j)];
            }
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Eigen::MatrixXd& tv = es.eigenvectors();
        Eigen::VectorXcd y(m);
        for (int k = 0; k < m; ++k) {
            y(k) = std::exp(complexd(0.0, -dt * es.eigenvalues()(k))) * tv(0, k);
        }
        small_exp.resize(m);
        small_exp.real() = tv * y.real();
        small_exp.imag() = tv * y.imag();

        if (b <= 1e-14) { // happy breakdown: Krylov space is invariant
            converged = true;
            break;
        }
        const double residual = b * dt * std::abs(small_exp(m - 1));
        if (residual <= kPerStepNormTol) {
            converged = true;
            break;
        }
        if (m == m_max) break;
        beta.push_back(b);
        v.col(m) = w / b;
    }
    if (!converged) {
        throw StepTooCoarse("krylov propagator did not converge at " + std::to_string(m_max) +
                            " vectors; increase n_steps (currently " + std::to_string(n_steps) +
                            ")");
    }
    psi = nrm * (v.leftCols(m) * small_exp);
}

} // namespace

EquivalenceBasis enumerate_class(const CircuitTensor& input, const RuleSet& rules,
                                 std::int64_t cap) {
    if (cap < 1) throw std::invalid_argument("enumerate_class: cap must be at least 1");
    require_valid(input);

    EquivalenceBasis basis;
    std::unordered_map<std::string, int> index;
    std::vector<std::map<int, int>> adj;

    basis.circuits.push_back(input);
    index.emplace(tensor_key(input), 0);
    adj.emplace_back();

    for (int i = 0; i < static_cast<int>(basis.circuits.size()); ++i) {
        const CircuitTensor current = basis.circuits[static_cast<std::size_t>(i)];
        for (const Move& move : enumerate_moves(rules, current)) {
            CircuitTensor next = apply_at(rules, current, move);
            const std::string key = tensor_key(next);
            auto [it, inserted] = index.try_emplace(key, static_cast<int>(basis.circuits.size()));
            if (inserted) {
                if (static_cast<std::int64_t>(basis.circuits.size()) >= cap) {
                    throw ClassCapExceeded(cap);
                }
                basis.circuits.push_back(std::move(next));
                adj.emplace_back();
            }
            adj[static_cast<std::size_t>(i)][it->second] += 1;
        }
    }

    for (std::size_t i = 0; i < adj.size(); ++i) {
        for (const auto& [j, mult] : adj[i]) {
            const auto& back = adj[static_cast<std::size_t>(j)];
            const auto it = back.find(static_cast<int>(i));
            if (it == back.end() || it->second != mult) {
                throw std::logic_error("enumerate_class: asymmetric move multiplicity between " +
                                       std::to_string(i) + " and " + std::to_string(j));
            }
        }
    }

    basis.adjacency.resize(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) {
        basis.adjacency[i].assign(adj[i].begin(), adj[i].end());
    }
    return basis;
}

Hamiltonians build_hamiltonians(const EquivalenceBasis& basis, const MachineSpec& machine,
                                double lambda) {
    if (basis.size() == 0) throw std::invalid_argument("build_hamiltonians: empty basis");
    const int n = basis.size();
    Hamiltonians ham;
    ham.h0.resize(n);
    ham.hi.resize(n);
    ham.infidelity.resize(n);

    const CircuitTensor& input = basis.circuits.front();
    for (int i = 0; i < n; ++i) {
        const CircuitTensor& c = basis.circuits[static_cast<std::size_t>(i)];
        std::int64_t hamming = 0;
        for (std::size_t s = 0; s < c.sites.size(); ++s) {
            if (!(c.sites[s] == input.sites[s])) ++hamming;
        }
        ham.h0(i) = static_cast<double>(hamming);
        ham.infidelity(i) = total_infidelity(c, machine);
    }

    if (lambda <= 0.0) {
        const double max_i = ham.infidelity.maxCoeff();
        lambda = max_i > 0.0 ? 1.0 / max_i : 1.0;
    }
    ham.lambda = lambda;
    ham.hi = lambda * ham.infidelity;

    std::vector<Eigen::Triplet<double>> triplets;
    for (int i = 0; i < n; ++i) {
        for (const auto& [j, mult] : basis.adjacency[static_cast<std::size_t>(i)]) {
            triplets.emplace_back(i, j, -static_cast<double>(mult));
        }
    }
    ham.hd.resize(n, n);
    ham.hd.setFromTriplets(triplets.begin(), triplets.end());
    return ham;
}

std::array<double, 3> schedule(double t, double tau) {
    if (!(tau > 0.0)) throw OutOfRange("schedule: tau must be positive");
    if (t < 0.0 || t > tau) throw OutOfRange("schedule: t outside [0, tau]");
    const double s = t / tau;
    if (s <= 0.5) return {1.0 - 2.0 * s, 2.0 * s, 0.0};
    return {0.0, 2.0 - 2.0 * s, 2.0 * s - 1.0};
}

QAResult evolve(const CircuitTensor& input, const QAConfig& cfg) {
    if (cfg.ruleset == nullptr || cfg.machine == nullptr) {
        throw std::invalid_argument("evolve: config needs a ruleset and a machine");
    }
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("evolve: tau must be positive");
    if (cfg.n_steps < 1) throw std::invalid_argument("evolve: n_steps must be at least 1");
    if (cfg.record_stride < 0) throw std::invalid_argument("evolve: negative record_stride");

    QAResult result;
    result.basis = enumerate_class(input, *cfg.ruleset, cfg.cap);
    const Hamiltonians ham = build_hamiltonians(result.basis, *cfg.machine, cfg.lambda);
    const int n = result.basis.size();

    result.lambda = ham.lambda;
    result.tau = cfg.tau;
    result.n_steps = cfg.n_steps;
    result.infidelities.assign(ham.infidelity.data(), ham.infidelity.data() + n);
    result.i_input = ham.infidelity(0);
    result.i_min = ham.infidelity.minCoeff();

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
    psi(0) = 1.0;
    const double dt = cfg.tau / static_cast<double>(cfg.n_steps);
    const std::int64_t stride =
        cfg.record_stride > 0 ? cfg.record_stride : std::max<std::int64_t>(1, cfg.n_steps / 50);

    const auto record = [&](double t) {
        QACheckpoint cp;
        cp.t_over_tau = t / cfg.tau;
        cp.norm = psi.squaredNorm();
        cp.energy = ham.hi.dot(psi.cwiseAbs2());
        result.checkpoints.push_back(cp);
    };
    record(0.0);

    double drift = 0.0;
    for (std::int64_t s = 0; s < cfg.n_steps; ++s) {
        const double t_mid = (static_cast<double>(s) + 0.5) * dt;
        const auto [w0, wd, wi] = schedule(t_mid, cfg.tau);
        const double norm_before = psi.squaredNorm();
        if (n <= kDenseLimit) {
            propagate_dense(ham, w0, wd, wi, dt, psi);
        } else {
            propagate_krylov(ham, w0, wd, wi, dt, psi, cfg.n_steps);
        }
        const double norm_after = psi.squaredNorm();
        if (std::abs(norm_after - norm_before) > kPerStepNormTol) {
            throw StepTooCoarse("step " + std::to_string(s) + " changed the norm by " +
                                std::to_string(std::abs(norm_after - norm_before)));
        }
        drift = std::max(drift, std::abs(norm_after - 1.0));
        if ((s + 1) % stride == 0 || s + 1 == cfg.n_steps) {
            record(static_cast<double>(s + 1) * dt);
        }
    }
    result.norm_drift = drift;

    result.probabilities.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        result.probabilities[static_cast<std::size_t>(i)] = std::norm(psi(i));
        total += result.probabilities[static_cast<std::size_t>(i)];
    }

    double ground_mass = 0.0;
    double expectation = 0.0;
    for (int i = 0; i < n; ++i) {
        const double p = result.probabilities[static_cast<std::size_t>(i)];
        expectation += p * ham.infidelity(i);
        if (ham.infidelity(i) <= result.i_min + kGroundTieTol) ground_mass += p;
    }
    result.i_exp = total > 0.0 ? expectation / total : 0.0;
    result.p_ground = total > 0.0 ? ground_mass / total : 0.0;
    result.improvement_exp = result.i_input > 0.0 ? 1.0 - result.i_exp / result.i_input : 0.0;
    result.improvement_opt = result.i_input > 0.0 ? 1.0 - result.i_min / result.i_input : 0.0;
    return result;
}

MeasureRecord measure(const QAResult& result, std::int64_t n_samples, Rng& rng) {
    if (result.probabilities.empty()) {
        throw std::invalid_argument("measure: result carries no distribution");
    }
    MeasureRecord rec;
    rec.p_ground = result.p_ground;
    rec.counts.assign(result.probabilities.size(), 0);
    if (n_samples <= 0) return rec;

    const CircuitTensor& input = result.basis.circuits.front();
    if (input.dims.qubit_count() > 10) {
        throw VerifierUnavailable("measure: re-verification supports at most 10 qubits, got " +
                                  std::to_string(input.dims.qubit_count()));
    }

    std::vector<double> cumulative(result.probabilities.size());
    double total = 0.0;
    for (std::size_t i = 0; i < result.probabilities.size(); ++i) {
        total += result.probabilities[i];
        cumulative[i] = total;
    }
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        if (idx >= rec.counts.size()) idx = rec.counts.size() - 1;
        rec.counts[idx] += 1;
    }

    std::int64_t equivalent_samples = 0;
    for (std::size_t i = 0; i < rec.counts.size(); ++i) {
        if (rec.counts[i] == 0) continue;
        if (equivalent(input, result.basis.circuits[i])) equivalent_samples += rec.counts[i];
    }
    rec.p_equiv_over_p_tot = static_cast<double>(equivalent_samples) / static_cast<double>(n_samples);
    rec.verifier_ran = true;
    return rec;
}

} // namespace latq
