#include "latq/generators.hpp"

#include <string>

#include "latq/io.hpp"

namespace latq {

namespace {

// Eight steps implementing a controlled phase of grid angle 2*half_k at time
// u on wires (a, a+1): parallel RZ(half_k), then the ZZ rotation written as
// H/CZ/H RZ(-half_k) H/CZ/H on the lower wire. Exact up to global phase.
void put_cp_block(CircuitTensor& tensor, int u, int a, std::int64_t half_k) {
    const std::int64_t m = tensor.dims.angle_modulus;
    const std::int64_t neg = (m - half_k % m) % m;
    tensor.at(u, {a, 0}) = single_token(GateKind::RZ, half_k);
    tensor.at(u, {a + 1, 0}) = single_token(GateKind::RZ, half_k);
    tensor.at(u + 1, {a + 1, 0}) = single_token(GateKind::H);
    tensor.at(u + 2, {a, 0}) = control_token(GateKind::CZ, PartnerDir::PlusX);
    tensor.at(u + 2, {a + 1, 0}) = busy_token();
    tensor.at(u + 3, {a + 1, 0}) = single_token(GateKind::H);
    tensor.at(u + 4, {a + 1, 0}) = single_token(GateKind::RZ, neg);
    tensor.at(u + 5, {a + 1, 0}) = single_token(GateKind::H);
    tensor.at(u + 6, {a, 0}) = control_token(GateKind::CZ, PartnerDir::PlusX);
    tensor.at(u + 6, {a + 1, 0}) = busy_token();
    tensor.at(u + 7, {a + 1, 0}) = single_token(GateKind::H);
}

} // namespace

CircuitTensor gen_qft(int n_qubits, bool with_swap_area_steps) {
    if (n_qubits < 2 || n_qubits > 60) {
        throw OutOfRange("gen_qft: supports 2..60 qubits, got " + std::to_string(n_qubits));
    }
    const int content_steps = 20 * n_qubits - 29;
    const int offset = with_swap_area_steps ? 1 : 0;
    LatticeDims dims;
    dims.time_steps = content_steps + 2 * offset;
    dims.qubit_extents = {n_qubits};
    dims.angle_modulus = std::int64_t{1} << (n_qubits + 1);
    CircuitTensor tensor = CircuitTensor::all_idle(dims);

    // Half-angle grid index of the phase between partners i wires apart:
    // theta_i = pi/2^i, so theta_i/2 = 2*pi / 2^(i+2) = modulus >> (i+2).
    const auto half_k = [&](int i) { return dims.angle_modulus >> (i + 2); };

    for (int j = 0; j + 2 < n_qubits; ++j) {
        const int s = 20 * j + offset;
        tensor.at(s, {0, 0}) = single_token(GateKind::H);
        for (int i = 1; i <= n_qubits - 1 - j; ++i) {
            const int u = s + 10 * (i - 1) + 1;
            put_cp_block(tensor, u, i - 1, half_k(i));
            tensor.at(u + 9, {i - 1, 0}) = control_token(GateKind::Swap, PartnerDir::PlusX);
            tensor.at(u + 9, {i, 0}) = busy_token();
        }
    }

    // Final descent, compressed: its SWAP commutes with the symmetric phase
    // block, so it moves ahead of the block and the closing H lands one step
    // after the block instead of two.
    const int s = 20 * (n_qubits - 2) + offset;
    tensor.at(s, {0, 0}) = single_token(GateKind::H);
    tensor.at(s + 1, {0, 0}) = control_token(GateKind::Swap, PartnerDir::PlusX);
    tensor.at(s + 1, {1, 0}) = busy_token();
    put_cp_block(tensor, s + 2, 0, half_k(1));
    tensor.at(s + 10, {0, 0}) = single_token(GateKind::H);

    require_valid(tensor);
    return tensor;
}

CircuitTensor gen_ths(int rows, int cols, int periods, std::int64_t k1, std::int64_t k2,
                      std::int64_t k3, std::int64_t modulus) {
    if (rows < 2 || cols < 2) {
        throw OutOfRange("gen_ths: grid must be at least 2x2, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
    if (rows % 2 != 0 || cols % 2 != 0) {
        throw OddExtent("gen_ths: extents must be even, got " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
    if (periods < 1) throw OutOfRange("gen_ths: need at least one period");
    for (const std::int64_t k : {k1, k2, k3}) {
        if (k < 0 || k >= modulus) {
            throw OutOfRange("gen_ths: angle index " + std::to_string(k) + " outside [0, " +
                             std::to_string(modulus) + ")");
        }
    }

    LatticeDims dims;
    dims.time_steps = 8 * periods;
    dims.qubit_extents = {cols, rows};
    dims.angle_modulus = modulus;
    CircuitTensor tensor = CircuitTensor::all_idle(dims);

    for (int p = 0; p < periods; ++p) {
        const int t0 = 8 * p;
        for (int y = 0; y < rows; ++y) {
            for (int x = 0; x < cols; ++x) {
                tensor.at(t0, {x, y}) = single_token(GateKind::RZ, k1);
                tensor.at(t0 + 1, {x, y}) = single_token(GateKind::RX, k2);
            }
        }
        // +x bonds: even-origin layer, then odd-origin layer.
        for (int parity = 0; parity < 2; ++parity) {
            const int t = t0 + 2 + parity;
            for (int y = 0; y < rows; ++y) {
                for (int x = parity; x + 1 < cols; x += 2) {
                    tensor.at(t, {x, y}) = control_token(GateKind::CP, PartnerDir::PlusX, k3);
                    tensor.at(t, {x + 1, y}) = busy_token();
                }
            }
        }
        // +y bonds likewise.
        for (int parity = 0; parity < 2; ++parity) {
            const int t = t0 + 4 + parity;
            for (int y = parity; y + 1 < rows; y += 2) {
                for (int x = 0; x < cols; ++x) {
                    tensor.at(t, {x, y}) = control_token(GateKind::CP, PartnerDir::PlusY, k3);
                    tensor.at(t, {x, y + 1}) = busy_token();
                }
            }
        }
        // Steps t0+6 and t0+7 stay idle.
    }

    require_valid(tensor);
    return tensor;
}

CircuitTensor example1_input() { return load_circuit("example1"); }

} // namespace latq
