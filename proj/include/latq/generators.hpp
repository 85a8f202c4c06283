#pragma once

// Input-circuit generators: the nearest-neighbour Fourier-transform network,
// the Trotterized spin-simulation block, and the shipped four-qubit example.

#include <cstdint>
#include <stdexcept>

#include "latq/lattice.hpp"

namespace latq {

struct OddExtent : std::runtime_error {
    explicit OddExtent(const std::string& msg) : std::runtime_error(msg) {}
};

// Quantum Fourier transform on a line of n_qubits (2 <= n_qubits <= 60), gate
// set {H, RZ, CZ, SWAP} on nearest neighbours. Controlled phases use the
// RZ/CZ/H decomposition (exact up to global phase); the swap network performs
// the bit reversal in place, and each phase unit keeps one slack step before
// its SWAP. Angle modulus 2^(n_qubits+1) holds the finest half-angle. Time
// steps: 20*n_qubits - 29, plus two empty boundary steps with
// with_swap_area_steps. Throws OutOfRange outside the supported width.
CircuitTensor gen_qft(int n_qubits, bool with_swap_area_steps = false);

// Trotterized evolution on a rows x cols grid (both even, at least 2): per
// period, an RZ(k1) layer, an RX(k2) layer, four CP(k3) layers covering +x
// even / +x odd / +y even / +y odd bonds with open boundaries, and two idle
// steps, for a period of exactly 8 time steps, repeated `periods` times.
// Angles are grid indices at `modulus`. Throws OddExtent on odd extents and
// OutOfRange on non-positive sizes or angle indices outside [0, modulus).
CircuitTensor gen_ths(int rows, int cols, int periods, std::int64_t k1, std::int64_t k2,
                      std::int64_t k3, std::int64_t modulus = 16);

// The shipped 8-step, 4-qubit example circuit (swap-area step at each end).
// Throws assets::AssetMissing if the build lost the asset.
CircuitTensor example1_input();

} // namespace latq
