#include "latq/unitary.hpp"

#include <cmath>

namespace latq {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr complexd kI{0.0, 1.0};
} // namespace

double grid_angle(std::int64_t k, std::int64_t m) {
    return 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
}

Eigen::Matrix2cd gate_rz(double theta) {
    Eigen::Matrix2cd g = Eigen::Matrix2cd::Zero();
    g(0, 0) = std::exp(-kI * (theta / 2.0));
    g(1, 1) = std::exp(kI * (theta / 2.0));
    return g;
}

Eigen::Matrix2cd gate_rx(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    Eigen::Matrix2cd g;
    g << complexd{c, 0.0}, -kI * s, -kI * s, complexd{c, 0.0};
    return g;
}

Eigen::Matrix2cd gate_h() {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd g;
    g << r, r, r, -r;
    return g;
}

Eigen::Matrix4cd gate_cp(double theta) {
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Identity();
    g(3, 3) = std::exp(kI * theta);
    return g;
}

Eigen::Matrix4cd gate_cz() {
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Identity();
    g(3, 3) = -1.0;
    return g;
}

Eigen::Matrix4cd gate_swap() {
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    g(0, 0) = 1.0;
    g(1, 2) = 1.0;
    g(2, 1) = 1.0;
    g(3, 3) = 1.0;
    return g;
}

Eigen::MatrixXcd gate_matrix(GateKind kind, double theta) {
    switch (kind) {
        case GateKind::Idle: return Eigen::Matrix2cd::Identity();
        case GateKind::H: return gate_h();
        case GateKind::RZ: return gate_rz(theta);
        case GateKind::RX: return gate_rx(theta);
        case GateKind::CZ: return gate_cz();
        case GateKind::Swap: return gate_swap();
        case GateKind::CP: return gate_cp(theta);
        case GateKind::Busy: break;
    }
    throw LatticeError(LatticeError::Code::BadToken, "BUSY has no gate matrix");
}

void apply_1q(Eigen::MatrixXcd& m, const Eigen::Matrix2cd& g, int bit) {
    const Eigen::Index d = m.rows();
    const Eigen::Index cols = m.cols();
    const Eigen::Index stride = Eigen::Index{1} << bit;
    const complexd g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
    for (Eigen::Index c = 0; c < cols; ++c) {
        complexd* col = m.col(c).data();
        for (Eigen::Index base = 0; base < d; base += 2 * stride) {
            for (Eigen::Index off = 0; off < stride; ++off) {
                complexd& a0 = col[base + off];
                complexd& a1 = col[base + off + stride];
                const complexd v0 = a0, v1 = a1;
                a0 = g00 * v0 + g01 * v1;
                a1 = g10 * v0 + g11 * v1;
            }
        }
    }
}

void apply_2q(Eigen::MatrixXcd& m, const Eigen::Matrix4cd& g, int bit_hi, int bit_lo) {
    const Eigen::Index d = m.rows();
    const Eigen::Index cols = m.cols();
    const Eigen::Index shi = Eigen::Index{1} << bit_hi;
    const Eigen::Index slo = Eigen::Index{1} << bit_lo;
    for (Eigen::Index c = 0; c < cols; ++c) {
        complexd* col = m.col(c).data();
        for (Eigen::Index i = 0; i < d; ++i) {
            if ((i & shi) || (i & slo)) continue;
            complexd& a0 = col[i];              // |00>
            complexd& a1 = col[i | slo];        // |01>
            complexd& a2 = col[i | shi];        // |10>
            complexd& a3 = col[i | shi | slo];  // |11>
            const complexd v0 = a0, v1 = a1, v2 = a2, v3 = a3;
            a0 = g(0, 0) * v0 + g(0, 1) * v1 + g(0, 2) * v2 + g(0, 3) * v3;
            a1 = g(1, 0) * v0 + g(1, 1) * v1 + g(1, 2) * v2 + g(1, 3) * v3;
            a2 = g(2, 0) * v0 + g(2, 1) * v1 + g(2, 2) * v2 + g(2, 3) * v3;
            a3 = g(3, 0) * v0 + g(3, 1) * v1 + g(3, 2) * v2 + g(3, 3) * v3;
        }
    }
}

int qubit_bit(const LatticeDims& dims, QubitCoord q) {
    const int l = q.y * dims.extent_x() + q.x;
    return dims.qubit_count() - 1 - l;
}

Eigen::MatrixXcd circuit_unitary(const CircuitTensor& tensor) {
    require_valid(tensor);
    const int nq = tensor.dims.qubit_count();
    if (nq > 12)
        throw VerifyError(VerifyError::Code::TooManyQubits,
                          "dense unitaries are limited to 12 qubits");
    const Eigen::Index d = Eigen::Index{1} << nq;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
    for (int t = 0; t < tensor.dims.time_steps; ++t) {
        for (const Instruction& ins : gates_at_step(tensor, t)) {
            const double theta = grid_angle(ins.angle, tensor.dims.angle_modulus);
            if (ins.q2) {
                const Eigen::Matrix4cd g = gate_matrix(ins.kind, theta);
                apply_2q(u, g, qubit_bit(tensor.dims, ins.q), qubit_bit(tensor.dims, *ins.q2));
            } else {
                const Eigen::Matrix2cd g = gate_matrix(ins.kind, theta);
                apply_1q(u, g, qubit_bit(tensor.dims, ins.q));
            }
        }
    }
    return u;
}

Eigen::MatrixXcd dft_matrix(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 12)
        throw VerifyError(VerifyError::Code::TooManyQubits,
                          "dense DFT matrices are limited to 12 qubits");
    const Eigen::Index d = Eigen::Index{1} << n_qubits;
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    Eigen::MatrixXcd f(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            // Reduce r*c mod d in integers so the angle stays in [0, 2 pi).
            const std::int64_t rc = (static_cast<std::int64_t>(r) * c) % d;
            const double theta = 2.0 * kPi * static_cast<double>(rc) / static_cast<double>(d);
            f(r, c) = norm * complexd(std::cos(theta), std::sin(theta));
        }
    }
    return f;
}

double phase_distance(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols())
        throw VerifyError(VerifyError::Code::DimensionMismatch,
                          "phase_distance needs square matrices of equal size");
    const double d = static_cast<double>(u.rows());
    const double overlap = std::abs((u.conjugate().cwiseProduct(v)).sum());
    const double val = 2.0 * d - 2.0 * overlap;
    return std::sqrt(std::max(0.0, val));
}

double phase_deficit(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols())
        throw VerifyError(VerifyError::Code::DimensionMismatch,
                          "phase_deficit needs square matrices of equal size");
    const double d = static_cast<double>(u.rows());
    const double overlap = std::abs((u.conjugate().cwiseProduct(v)).sum());
    return std::max(0.0, 1.0 - overlap / d);
}

bool equivalent(const CircuitTensor& a, const CircuitTensor& b, double tol) {
    if (a.dims.qubit_extents != b.dims.qubit_extents)
        throw VerifyError(VerifyError::Code::DimensionMismatch,
                          "equivalence requires identical qubit extents");
    return phase_deficit(circuit_unitary(a), circuit_unitary(b)) <= tol;
}

} // namespace latq
