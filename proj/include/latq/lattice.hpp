#pragma once

// Circuit-as-lattice representation: a quantum circuit is a (1+n)-dimensional
// tensor of gate tokens, n in {1, 2}. Axis 0 is time; the remaining axes are
// qubit coordinates. Every site holds exactly one token; Idle is explicit, and
// a two-qubit gate occupies two sites (a control token plus a BUSY marker on
// the partner site). Angles are integer indices k into the grid 2*pi*k/M with
// M a power of two, so circuits compare exactly and hash cleanly.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latq {

enum class GateKind : std::uint8_t { Idle, Busy, H, CZ, Swap, RZ, RX, CP };
inline constexpr int kGateKindCount = 8;

const char* kind_name(GateKind k);
std::optional<GateKind> kind_from_name(std::string_view name);

// RZ, RX, CP carry a grid angle.
constexpr bool is_parametric(GateKind k) {
    return k == GateKind::RZ || k == GateKind::RX || k == GateKind::CP;
}

// CZ, SWAP, CP occupy two adjacent sites.
constexpr bool is_two_qubit(GateKind k) {
    return k == GateKind::CZ || k == GateKind::Swap || k == GateKind::CP;
}

// Unit lattice direction from a control token to its BUSY partner. Controls
// sit at the lexicographically lower coordinate, so only +x and +y occur;
// this makes the two-site encoding unique.
enum class PartnerDir : std::uint8_t { PlusX, PlusY };

struct LatticeError : std::runtime_error {
    enum class Code { BadDims, OutOfBounds, SiteCollision, NonAdjacentPair, InvalidTensor, BadToken };
    Code code;
    LatticeError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// A scalar argument outside its documented domain (generator sizes, schedule
// times, and similar), as opposed to a malformed lattice.
struct OutOfRange : std::runtime_error {
    explicit OutOfRange(const std::string& msg) : std::runtime_error(msg) {}
};

struct GateToken {
    GateKind kind = GateKind::Idle;
    std::int64_t angle = 0;               // grid index, zero unless parametric
    PartnerDir partner = PartnerDir::PlusX; // meaningful only on control tokens

    friend bool operator==(const GateToken&, const GateToken&) = default;
};

GateToken idle_token();
GateToken busy_token();
// Single-qubit token; throws BadToken if kind is two-qubit, Busy, or a
// non-parametric kind given a nonzero angle.
GateToken single_token(GateKind kind, std::int64_t angle = 0);
// Control token of a two-qubit gate; partner names the BUSY site direction.
GateToken control_token(GateKind kind, PartnerDir partner, std::int64_t angle = 0);

struct QubitCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(const QubitCoord&, const QubitCoord&) = default;
};

// (time, y-major, x-minor) ordering used everywhere a deterministic site
// order is needed (validation reports, decoded instructions, move lists).
constexpr bool coord_less(QubitCoord a, QubitCoord b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
}

struct LatticeDims {
    int time_steps = 1;
    std::vector<int> qubit_extents; // size 1 (chain) or 2 ({x extent, y extent})
    std::int64_t angle_modulus = 16; // power of two, >= 2

    int rank() const { return static_cast<int>(qubit_extents.size()); }
    int extent_x() const { return qubit_extents.empty() ? 1 : qubit_extents[0]; }
    int extent_y() const { return rank() < 2 ? 1 : qubit_extents[1]; }
    int qubit_count() const { return extent_x() * extent_y(); }
    std::int64_t site_count() const {
        return static_cast<std::int64_t>(time_steps) * qubit_count();
    }
    friend bool operator==(const LatticeDims&, const LatticeDims&) = default;
};

// Throws LatticeError(BadDims) unless time_steps >= 1, rank in {1, 2}, all
// extents >= 1, and angle_modulus is a power of two >= 2.
void check_dims(const LatticeDims& dims);

struct CircuitTensor {
    LatticeDims dims;
    std::vector<GateToken> sites; // row-major: t, then y, then x

    static CircuitTensor all_idle(const LatticeDims& dims);

    bool in_bounds(QubitCoord q) const {
        return q.x >= 0 && q.x < dims.extent_x() && q.y >= 0 && q.y < dims.extent_y();
    }
    bool in_bounds(int t, QubitCoord q) const {
        return t >= 0 && t < dims.time_steps && in_bounds(q);
    }
    int qubit_index(QubitCoord q) const { return q.y * dims.extent_x() + q.x; }
    std::int64_t site_index(int t, QubitCoord q) const {
        return static_cast<std::int64_t>(t) * dims.qubit_count() + qubit_index(q);
    }
    const GateToken& at(int t, QubitCoord q) const { return sites[site_index(t, q)]; }
    GateToken& at(int t, QubitCoord q) { return sites[site_index(t, q)]; }

    friend bool operator==(const CircuitTensor&, const CircuitTensor&) = default;
};

// One structural problem found by validate(). Violations are data, not
// exceptions: validation is total and never aborts on the first finding.
struct Violation {
    int t = 0;
    QubitCoord q;
    std::string rule;   // short machine-readable tag, e.g. "busy-unclaimed"
    std::string detail; // human-readable explanation
};

using ValidationReport = std::vector<Violation>;

// Checks token canonicality (angle range, zero angle on non-parametric kinds,
// canonical partner on non-control tokens), partner bounds and adjacency, and
// the one-control-per-BUSY ownership property.
ValidationReport validate(const CircuitTensor& tensor);

// Throws LatticeError(InvalidTensor) listing the first few violations.
void require_valid(const CircuitTensor& tensor);

// Gate instance in plain form: control coordinate plus optional partner.
struct Instruction {
    GateKind kind = GateKind::Idle;
    std::int64_t angle = 0;
    int t = 0;
    QubitCoord q;                 // control (lexicographically lower) qubit
    std::optional<QubitCoord> q2; // partner qubit of a two-qubit gate
    friend bool operator==(const Instruction&, const Instruction&) = default;
};

using InstructionList = std::vector<Instruction>;

// Builds a tensor from instructions. Two-qubit instructions may name their
// qubits in either order; the control lands on the lower coordinate. Throws
// LatticeError on out-of-bounds sites (OutOfBounds), double occupation
// (SiteCollision), or non-nearest-neighbour pairs (NonAdjacentPair).
CircuitTensor encode_instructions(const InstructionList& instructions, const LatticeDims& dims);

// Inverse of encode_instructions up to canonical ordering: instructions come
// out sorted by (t, y, x) with Idle omitted. Requires a valid tensor.
InstructionList decode_instructions(const CircuitTensor& tensor);

// Gate instances of one time step, in (y, x) order. Requires a valid step.
InstructionList gates_at_step(const CircuitTensor& tensor, int t);

// Sorted time indices whose every site is Idle.
std::vector<int> fully_idle_steps(const CircuitTensor& tensor);

// Partner coordinate of a control at q, or nullopt if it leaves the lattice.
std::optional<QubitCoord> partner_coord(const CircuitTensor& tensor, QubitCoord q, PartnerDir dir);

} // namespace latq
