#include "doctest.h"

#include <cmath>
#include <complex>

#include "latq/generators.hpp"
#include "latq/io.hpp"
#include "latq/lattice.hpp"
#include "latq/unitary.hpp"

using namespace latq;
using cd = std::complex<double>;

namespace {

const double kPi = 3.14159265358979323846;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace

TEST_CASE("grid angle") {
    CHECK(grid_angle(0, 16) == 0.0);
    CHECK(grid_angle(8, 16) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(grid_angle(1, 2) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(grid_angle(3, 4) == doctest::Approx(1.5 * kPi).epsilon(1e-15));
}

TEST_CASE("gate matrices match their definitions") {
    const double th = 0.83;

    Eigen::Matrix2cd rz = gate_rz(th);
    CHECK(std::abs(rz(0, 0) - std::exp(cd(0, -th / 2))) < 1e-15);
    CHECK(std::abs(rz(1, 1) - std::exp(cd(0, th / 2))) < 1e-15);
    CHECK(std::abs(rz(0, 1)) == 0.0);

    Eigen::Matrix2cd rx = gate_rx(th);
    CHECK(std::abs(rx(0, 0) - cd(std::cos(th / 2), 0)) < 1e-15);
    CHECK(std::abs(rx(0, 1) - cd(0, -std::sin(th / 2))) < 1e-15);
    CHECK(std::abs(rx(1, 0) - cd(0, -std::sin(th / 2))) < 1e-15);

    Eigen::Matrix2cd h = gate_h();
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(h(0, 0) - cd(s, 0)) < 1e-15);
    CHECK(std::abs(h(1, 1) - cd(-s, 0)) < 1e-15);
    CHECK(std::abs(h(0, 1) - cd(s, 0)) < 1e-15);

    Eigen::Matrix4cd cp = gate_cp(th);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(cp(i, i) - cd(1, 0)) < 1e-15);
    CHECK(std::abs(cp(3, 3) - std::exp(cd(0, th))) < 1e-15);

    // CZ is the exact diagonal, and CP at pi agrees to rounding
    CHECK(gate_cz()(3, 3) == cd(-1, 0));
    CHECK(gate_cz()(0, 0) == cd(1, 0));
    CHECK((Eigen::Matrix4cd(gate_cz() - gate_cp(kPi))).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::Matrix4cd sw = gate_swap();
    CHECK(sw(0, 0) == cd(1, 0));
    CHECK(sw(1, 2) == cd(1, 0));
    CHECK(sw(2, 1) == cd(1, 0));
    CHECK(sw(3, 3) == cd(1, 0));
    CHECK(sw(1, 1) == cd(0, 0));
}

TEST_CASE("gate matrix dispatch") {
    CHECK(gate_matrix(GateKind::Idle, 0.0) == Eigen::MatrixXcd::Identity(2, 2));
    CHECK(gate_matrix(GateKind::RZ, 0.4) == Eigen::MatrixXcd(gate_rz(0.4)));
    CHECK(gate_matrix(GateKind::CP, 0.4) == Eigen::MatrixXcd(gate_cp(0.4)));
    CHECK(gate_matrix(GateKind::Swap, 9.9) == Eigen::MatrixXcd(gate_swap()));
    CHECK_THROWS(gate_matrix(GateKind::Busy, 0.0));
}

TEST_CASE("qubit bit order puts qubit (0,0) on the most significant bit") {
    LatticeDims dims{1, {2, 2}, 2};
    CHECK(qubit_bit(dims, {0, 0}) == 3);
    CHECK(qubit_bit(dims, {1, 0}) == 2);
    CHECK(qubit_bit(dims, {0, 1}) == 1);
    CHECK(qubit_bit(dims, {1, 1}) == 0);
}

TEST_CASE("apply helpers agree with explicit tensor products") {
    const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd g1 = gate_rx(0.71);
    const Eigen::Matrix4cd g2 = gate_cp(1.2);

    // three qubits, gate on bit 1: I (x) G (x) I in bit order (bit 2 high)
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(8, 8);
    apply_1q(m, g1, 1);
    CHECK((m - kron(kron(id2, g1), id2)).cwiseAbs().maxCoeff() < 1e-15);

    // two-qubit gate on (bit_hi=2, bit_lo=1): G (x) I
    Eigen::MatrixXcd m2 = Eigen::MatrixXcd::Identity(8, 8);
    apply_2q(m2, g2, 2, 1);
    CHECK((m2 - kron(g2, id2)).cwiseAbs().maxCoeff() < 1e-15);

    // non adjacent bits (2, 0): permute middle bit around
    Eigen::MatrixXcd m3 = Eigen::MatrixXcd::Identity(8, 8);
    apply_2q(m3, g2, 2, 0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int a2 = 0; a2 < 2; ++a2)
                    for (int b2 = 0; b2 < 2; ++b2)
                        for (int c2 = 0; c2 < 2; ++c2) {
                            const int row = a * 4 + b * 2 + c;
                            const int col = a2 * 4 + b2 * 2 + c2;
                            const cd want =
                                (b == b2) ? g2(a * 2 + c, a2 * 2 + c2) : cd(0, 0);
                            CHECK(std::abs(m3(row, col) - want) < 1e-15);
                        }
}

TEST_CASE("circuit unitary applies steps in time order") {
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{2, {1}, 4});
    c.at(0, {0, 0}) = single_token(GateKind::RX, 1); // RX(pi/2) first
    c.at(1, {0, 0}) = single_token(GateKind::RZ, 1); // then RZ(pi/2)
    const Eigen::MatrixXcd u = circuit_unitary(c);
    const Eigen::MatrixXcd want = gate_rz(kPi / 2) * gate_rx(kPi / 2);
    CHECK((u - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("circuit unitary places two-qubit gates by coordinates") {
    // CZ on qubits (0,0)-(1,0) of a 3-qubit chain: bits 2 and 1
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{1, {3}, 2});
    c.at(0, {0, 0}) = control_token(GateKind::CZ, PartnerDir::PlusX);
    c.at(0, {1, 0}) = busy_token();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(8, 8);
    apply_2q(m, gate_cz(), 2, 1);
    CHECK((circuit_unitary(c) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unitary guard rejects wide lattices") {
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{1, {13}, 2});
    CHECK_THROWS_AS(circuit_unitary(c), VerifyError);
    CHECK_THROWS_AS(dft_matrix(13), VerifyError);
}

TEST_CASE("dft matrix entries and unitarity") {
    const Eigen::MatrixXcd f = dft_matrix(2);
    REQUIRE(f.rows() == 4);
    for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col) {
            const cd want = std::exp(cd(0, 2.0 * kPi * r * col / 4.0)) / 2.0;
            CHECK(std::abs(f(r, col) - want) < 1e-15);
        }
    CHECK((f.adjoint() * f - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fourier network equals the transform it claims") {
    for (int n = 2; n <= 5; ++n) {
        const CircuitTensor c = gen_qft(n);
        const double d = phase_deficit(circuit_unitary(c), dft_matrix(n));
        CHECK(d <= 1e-12);
    }
}

TEST_CASE("phase distance and deficit are global phase invariant") {
    const Eigen::MatrixXcd u = circuit_unitary(gen_qft(3));
    const Eigen::MatrixXcd v = std::exp(cd(0, 1.234)) * u;
    CHECK(phase_distance(u, v) <= 1e-6);
    CHECK(phase_deficit(u, v) <= 1e-14);
    CHECK(phase_deficit(u, u) <= 1e-14);
}

TEST_CASE("deficit separates real angle errors from rounding") {
    // same unitary along two different gate orders stays at rounding level
    CHECK(phase_deficit(circuit_unitary(gen_qft(4)), dft_matrix(4)) < 1e-12);

    // the smallest representable angle error at modulus 2048 is huge by
    // comparison: 1 - cos(delta/2) with delta = 2 pi / 2048
    CircuitTensor a = CircuitTensor::all_idle(LatticeDims{1, {1}, 2048});
    CircuitTensor b = a;
    a.at(0, {0, 0}) = single_token(GateKind::RZ, 100);
    b.at(0, {0, 0}) = single_token(GateKind::RZ, 101);
    const double delta = 2.0 * kPi / 2048.0;
    const double expect = 1.0 - std::cos(delta / 2.0);
    CHECK(phase_deficit(circuit_unitary(a), circuit_unitary(b)) ==
          doctest::Approx(expect).epsilon(1e-9));
    CHECK(phase_deficit(circuit_unitary(a), circuit_unitary(b)) > 1e-7);
}

TEST_CASE("equivalence checker") {
    const CircuitTensor a = load_circuit("example1-qa");
    CHECK(equivalent(a, a));

    // the leading H pair multiplies to the identity
    CircuitTensor b = a;
    REQUIRE(b.at(0, {0, 0}).kind == GateKind::H);
    REQUIRE(b.at(1, {0, 0}).kind == GateKind::H);
    b.at(0, {0, 0}) = idle_token();
    b.at(1, {0, 0}) = idle_token();
    CHECK(equivalent(a, b));

    CircuitTensor c = a;
    c.at(0, {0, 0}) = idle_token(); // dropping just one H changes the unitary
    CHECK_FALSE(equivalent(a, c));
}

TEST_CASE("mismatched dimensions are rejected") {
    CHECK_THROWS_AS(phase_deficit(dft_matrix(2), dft_matrix(3)), VerifyError);
    CHECK_THROWS_AS(phase_distance(dft_matrix(2), dft_matrix(3)), VerifyError);
}
