#include "latq/euler.hpp"

#include <cmath>
#include <numbers>

namespace latq {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;
constexpr double kGimbalTol = 1e-9;

double wrap_tau(double x) {
    double y = std::fmod(x, kTau);
    if (y < 0.0) y += kTau;
    if (y >= kTau) y = 0.0;
    return y;
}

} // namespace

// Solve U ~ RZ(a2) RX(a1) RZ(a0) up to global phase. With c = cos(a1/2)
// and s = sin(a1/2) the product is
//   [ c e^{-i(a2+a0)/2}    -i s e^{-i(a2-a0)/2} ]
//   [ -i s e^{i(a2-a0)/2}   c e^{i(a2+a0)/2}   ]
// so a1 follows from the moduli, a2 from arg(i u10 / u00), and a0 from the
// phase sum arg(u11 / u00).
EulerAngles zxz_canonical(const Eigen::Matrix2cd& u) {
    const complexd u00 = u(0, 0);
    const complexd u10 = u(1, 0);
    const double c = std::abs(u00);
    const double s = std::abs(u10);

    EulerAngles out;
    if (s <= kGimbalTol) {
        out.a0 = wrap_tau(std::arg(u(1, 1) / u00));
        out.a1 = 0.0;
        out.a2 = 0.0;
        out.gimbal = true;
        return out;
    }
    if (c <= kGimbalTol) {
        out.a0 = wrap_tau(-std::arg(u10 / u(0, 1)));
        out.a1 = std::numbers::pi;
        out.a2 = 0.0;
        out.gimbal = true;
        return out;
    }

    const double a1 = 2.0 * std::atan2(s, c);
    const double a2 = wrap_tau(std::arg(complexd(0.0, 1.0) * u10 / u00));
    const double sum = std::arg(u(1, 1) / u00);
    const double a0 = wrap_tau(sum - a2);
    out.a0 = a0;
    out.a1 = a1;
    out.a2 = a2;
    out.gimbal = false;
    return out;
}

EulerAngles xzx_canonical(const Eigen::Matrix2cd& u) {
    const Eigen::Matrix2cd h = gate_h();
    return zxz_canonical(h * u * h);
}

EulerAngles euler_zxz_to_xzx(double a0, double a1, double a2) {
    const Eigen::Matrix2cd u = gate_rz(a2) * gate_rx(a1) * gate_rz(a0);
    return xzx_canonical(u);
}

EulerAngles euler_xzx_to_zxz(double a0, double a1, double a2) {
    const Eigen::Matrix2cd u = gate_rx(a2) * gate_rz(a1) * gate_rx(a0);
    return zxz_canonical(u);
}

std::optional<std::int64_t> snap_angle(double theta, std::int64_t m, double tol) {
    const double grid = kTau / static_cast<double>(m);
    const double kf = theta / grid;
    const auto k = static_cast<std::int64_t>(std::llround(kf));
    const double err = std::abs(theta - static_cast<double>(k) * grid);
    if (err > tol) return std::nullopt;
    std::int64_t r = k % m;
    if (r < 0) r += m;
    return r;
}

} // namespace latq
