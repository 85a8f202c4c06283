#pragma once

// Euler decompositions of single-qubit unitaries in the project's rotation
// conventions. Triples are given in time order: (a0, a1, a2) means a0 is
// applied first, so the matrix product is R(a2) R(a1) R(a0).
//
// Canonical form: the middle angle lies in [0, pi]; at the gimbal points
// (middle angle 0 or pi) the trailing angle is fixed to 0. Outer angles are
// reduced to [0, 2pi). Every unitary has exactly one canonical triple, which
// is what makes the rewrite rule built on top of this reversible and its
// proposal kernel symmetric.

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "latq/unitary.hpp"

namespace latq {

struct EulerAngles {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    bool gimbal = false; // middle angle hit 0 or pi; a2 canonicalized to 0
};

// Canonical triple with U = RZ(a2) RX(a1) RZ(a0) up to global phase.
EulerAngles zxz_canonical(const Eigen::Matrix2cd& u);
// Canonical triple with U = RX(a2) RZ(a1) RX(a0) up to global phase.
EulerAngles xzx_canonical(const Eigen::Matrix2cd& u);

// Conversions between the two axis orders (time-ordered inputs and outputs).
EulerAngles euler_zxz_to_xzx(double a0, double a1, double a2);
EulerAngles euler_xzx_to_zxz(double a0, double a1, double a2);

// Nearest grid index of a continuous angle at modulus m, or nullopt if the
// angle is farther than tol from every grid point (distance taken mod 2pi).
std::optional<std::int64_t> snap_angle(double theta, std::int64_t m, double tol = 1e-9);

} // namespace latq
