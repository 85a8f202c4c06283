#pragma once

// Exact gate semantics and dense circuit unitaries, used by the rule
// validator, the equivalence checker, and the noisy simulator.
//
// Conventions, fixed project-wide:
//   RZ(t) = exp(-i t Z / 2)            RX(t) = exp(-i t X / 2)
//   CP(t) = diag(1, 1, 1, e^{i t})     CZ = CP(pi) exactly
//   H, SWAP standard.
// Basis index bit order: the qubit with linear index l (row-major y, x) is
// bit (N - 1 - l), so qubit (0, 0) is the most significant bit.

#include <complex>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "latq/lattice.hpp"

namespace latq {

using complexd = std::complex<double>;

struct VerifyError : std::runtime_error {
    enum class Code { TooManyQubits, DimensionMismatch };
    Code code;
    VerifyError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// Angle of grid index k at modulus m: 2*pi*k/m.
double grid_angle(std::int64_t k, std::int64_t m);

Eigen::Matrix2cd gate_rz(double theta);
Eigen::Matrix2cd gate_rx(double theta);
Eigen::Matrix2cd gate_h();
Eigen::Matrix4cd gate_cp(double theta);
Eigen::Matrix4cd gate_cz();
Eigen::Matrix4cd gate_swap();

// 2x2 or 4x4 matrix of a gate kind at a continuous angle (ignored for
// non-parametric kinds). Idle gives the 2x2 identity; BUSY is not a gate.
Eigen::MatrixXcd gate_matrix(GateKind kind, double theta);

// Applies a single-qubit gate to the state/operator columns, acting on the
// qubit at bit position `bit` (0 = least significant).
void apply_1q(Eigen::MatrixXcd& m, const Eigen::Matrix2cd& g, int bit);
// Applies a two-qubit gate; `bit_hi` is the first (row-major lower) qubit of
// the pair, matching the tensor-product order of the 4x4 matrices above.
void apply_2q(Eigen::MatrixXcd& m, const Eigen::Matrix4cd& g, int bit_hi, int bit_lo);

// Bit position of a qubit coordinate under the project basis convention.
int qubit_bit(const LatticeDims& dims, QubitCoord q);

// Full 2^N x 2^N unitary of a circuit, steps applied in time order. Guarded
// at N <= 12 qubits (TooManyQubits beyond).
Eigen::MatrixXcd circuit_unitary(const CircuitTensor& tensor);

// Discrete Fourier transform on d = 2^n basis states, F(r, c) =
// exp(2 pi i r c / d) / sqrt(d), in the project bit order. Guarded at
// n <= 12 (TooManyQubits beyond).
Eigen::MatrixXcd dft_matrix(int n_qubits);

// Global-phase-invariant distance: sqrt(2 d - 2 |tr(U^dag V)|), clamped at 0.
// Vanishes exactly when U = e^{i phi} V. For reporting; equality decisions
// use phase_deficit, which does not square-root-amplify rounding noise.
double phase_distance(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v);

// Per-dimension trace deficit 1 - |tr(U^dag V)| / d, clamped at 0. Zero
// exactly when U = e^{i phi} V; stays at rounding level (about g * eps after
// g gate applications) when the same unitary is computed along two different
// gate orders, where phase_distance would amplify the identical rounding to
// its square root and drown out a 1e-9 threshold.
double phase_deficit(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v);

// Same-dims circuits whose unitaries agree up to global phase: the trace
// deficit is at most tol.
bool equivalent(const CircuitTensor& a, const CircuitTensor& b, double tol = 1e-9);

} // namespace latq
