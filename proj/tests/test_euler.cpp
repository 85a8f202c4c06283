#include "doctest.h"

#include <cmath>
#include <complex>

#include "latq/euler.hpp"
#include "latq/rng.hpp"
#include "latq/unitary.hpp"

using namespace latq;
using cd = std::complex<double>;

namespace {

const double kPi = 3.14159265358979323846;
const double kTau = 2.0 * kPi;

Eigen::Matrix2cd compose_zxz(const EulerAngles& e) {
    return gate_rz(e.a2) * gate_rx(e.a1) * gate_rz(e.a0);
}

Eigen::Matrix2cd compose_xzx(const EulerAngles& e) {
    return gate_rx(e.a2) * gate_rz(e.a1) * gate_rx(e.a0);
}

Eigen::Matrix2cd random_su2(Rng& rng) {
    const double a = rng.uniform(0.0, kTau);
    const double b = rng.uniform(0.0, kPi);
    const double c = rng.uniform(0.0, kTau);
    const double phase = rng.uniform(0.0, kTau);
    return std::exp(cd(0, phase)) * gate_rz(c) * gate_rx(b) * gate_rz(a);
}

} // namespace

TEST_CASE("zxz canonical triples recompose and are canonical") {
    Rng rng(0xE137);
    for (int i = 0; i < 400; ++i) {
        const Eigen::Matrix2cd u = random_su2(rng);
        const EulerAngles e = zxz_canonical(u);
        CHECK(phase_deficit(u, compose_zxz(e)) <= 1e-12);
        CHECK(e.a1 >= 0.0);
        CHECK(e.a1 <= kPi + 1e-12);
        CHECK(e.a0 >= 0.0);
        CHECK(e.a0 < kTau);
        CHECK(e.a2 >= 0.0);
        CHECK(e.a2 < kTau);
        if (e.gimbal) CHECK(e.a2 == 0.0);
    }
}

TEST_CASE("xzx canonical triples recompose") {
    Rng rng(0xE138);
    for (int i = 0; i < 400; ++i) {
        const Eigen::Matrix2cd u = random_su2(rng);
        const EulerAngles e = xzx_canonical(u);
        CHECK(phase_deficit(u, compose_xzx(e)) <= 1e-12);
        CHECK(e.a1 >= 0.0);
        CHECK(e.a1 <= kPi + 1e-12);
    }
}

TEST_CASE("canonical form is unique for equivalent inputs") {
    Rng rng(0xE139);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Matrix2cd u = random_su2(rng);
        const Eigen::Matrix2cd v = std::exp(cd(0, rng.uniform(0.0, kTau))) * u;
        const EulerAngles eu = zxz_canonical(u);
        const EulerAngles ev = zxz_canonical(v);
        CHECK(eu.a0 == doctest::Approx(ev.a0).epsilon(1e-9));
        CHECK(eu.a1 == doctest::Approx(ev.a1).epsilon(1e-9));
        CHECK(eu.a2 == doctest::Approx(ev.a2).epsilon(1e-9));
    }
}

TEST_CASE("gimbal cases pin the trailing angle") {
    // a bare RZ has no RX component: middle angle 0, everything in a0
    const EulerAngles e = zxz_canonical(gate_rz(0.7));
    CHECK(e.gimbal);
    CHECK(e.a1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.a2 == 0.0);
    CHECK(e.a0 == doctest::Approx(0.7).epsilon(1e-9));

    // RX(pi) conjugates RZ: middle angle pi
    const EulerAngles f = zxz_canonical(gate_rx(kPi));
    CHECK(f.gimbal);
    CHECK(f.a1 == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(f.a2 == 0.0);
}

TEST_CASE("axis order conversions round trip") {
    Rng rng(0xE140);
    for (int i = 0; i < 200; ++i) {
        const double a0 = rng.uniform(0.0, kTau);
        const double a1 = rng.uniform(0.0, kTau);
        const double a2 = rng.uniform(0.0, kTau);
        const Eigen::Matrix2cd u = gate_rz(a2) * gate_rx(a1) * gate_rz(a0);

        const EulerAngles x = euler_zxz_to_xzx(a0, a1, a2);
        CHECK(phase_deficit(u, compose_xzx(x)) <= 1e-12);

        const EulerAngles z = euler_xzx_to_zxz(x.a0, x.a1, x.a2);
        CHECK(phase_deficit(u, compose_zxz(z)) <= 1e-12);
    }
}

TEST_CASE("angle snapping") {
    CHECK(snap_angle(0.0, 16) == 0);
    CHECK(snap_angle(kPi, 16) == 8);
    CHECK(snap_angle(kTau / 16.0 * 5.0, 16) == 5);
    // wraps modulo 2 pi
    CHECK(snap_angle(-kTau / 16.0, 16) == 15);
    CHECK(snap_angle(kTau + kPi, 4) == 2);
    // off grid at the default tolerance
    CHECK_FALSE(snap_angle(kPi / 3.0, 4).has_value());
    CHECK_FALSE(snap_angle(kTau / 16.0 + 1e-6, 16).has_value());
    // a loose tolerance accepts the same point
    CHECK(snap_angle(kTau / 16.0 + 1e-6, 16, 1e-4) == 1);
}
