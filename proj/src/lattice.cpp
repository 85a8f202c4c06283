#include "latq/lattice.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace latq {

namespace {

constexpr std::array<const char*, kGateKindCount> kKindNames = {
    "Idle", "BUSY", "H", "CZ", "SWAP", "RZ", "RX", "CP"};

bool power_of_two(std::int64_t v) { return v >= 1 && (v & (v - 1)) == 0; }

} // namespace

const char* kind_name(GateKind k) { return kKindNames[static_cast<int>(k)]; }

std::optional<GateKind> kind_from_name(std::string_view name) {
    for (int i = 0; i < kGateKindCount; ++i)
        if (name == kKindNames[i]) return static_cast<GateKind>(i);
    if (name == ".") return GateKind::Idle; // rule-file shorthand
    return std::nullopt;
}

GateToken idle_token() { return GateToken{}; }

GateToken busy_token() { return GateToken{GateKind::Busy, 0, PartnerDir::PlusX}; }

GateToken single_token(GateKind kind, std::int64_t angle) {
    if (kind == GateKind::Busy || is_two_qubit(kind))
        throw LatticeError(LatticeError::Code::BadToken,
                           std::string("single_token: ") + kind_name(kind) + " is not a single-qubit kind");
    if (!is_parametric(kind) && angle != 0)
        throw LatticeError(LatticeError::Code::BadToken,
                           std::string("single_token: ") + kind_name(kind) + " takes no angle");
    return GateToken{kind, angle, PartnerDir::PlusX};
}

GateToken control_token(GateKind kind, PartnerDir partner, std::int64_t angle) {
    if (!is_two_qubit(kind))
        throw LatticeError(LatticeError::Code::BadToken,
                           std::string("control_token: ") + kind_name(kind) + " is not a two-qubit kind");
    if (!is_parametric(kind) && angle != 0)
        throw LatticeError(LatticeError::Code::BadToken,
                           std::string("control_token: ") + kind_name(kind) + " takes no angle");
    return GateToken{kind, angle, partner};
}

void check_dims(const LatticeDims& dims) {
    if (dims.time_steps < 1)
        throw LatticeError(LatticeError::Code::BadDims, "time_steps must be >= 1");
    if (dims.rank() != 1 && dims.rank() != 2)
        throw LatticeError(LatticeError::Code::BadDims, "qubit rank must be 1 or 2");
    for (int e : dims.qubit_extents)
        if (e < 1) throw LatticeError(LatticeError::Code::BadDims, "qubit extents must be >= 1");
    if (dims.angle_modulus < 2 || !power_of_two(dims.angle_modulus))
        throw LatticeError(LatticeError::Code::BadDims, "angle_modulus must be a power of two >= 2");
}

CircuitTensor CircuitTensor::all_idle(const LatticeDims& dims) {
    check_dims(dims);
    CircuitTensor t;
    t.dims = dims;
    t.sites.assign(static_cast<std::size_t>(dims.site_count()), idle_token());
    return t;
}

std::optional<QubitCoord> partner_coord(const CircuitTensor& tensor, QubitCoord q, PartnerDir dir) {
    QubitCoord p = q;
    if (dir == PartnerDir::PlusX)
        p.x += 1;
    else
        p.y += 1;
    if (!tensor.in_bounds(p)) return std::nullopt;
    return p;
}

ValidationReport validate(const CircuitTensor& tensor) {
    ValidationReport report;
    try {
        check_dims(tensor.dims);
    } catch (const LatticeError& e) {
        report.push_back({0, {}, "bad-dims", e.what()});
        return report;
    }
    if (tensor.sites.size() != static_cast<std::size_t>(tensor.dims.site_count())) {
        report.push_back({0, {}, "bad-storage", "site storage does not match dims"});
        return report;
    }

    const int nx = tensor.dims.extent_x();
    const int ny = tensor.dims.extent_y();
    const std::int64_t m = tensor.dims.angle_modulus;

    // claimed[qubit_index] marks BUSY sites owned by some control this step.
    std::vector<int> claimed(static_cast<std::size_t>(tensor.dims.qubit_count()));

    for (int t = 0; t < tensor.dims.time_steps; ++t) {
        std::fill(claimed.begin(), claimed.end(), 0);
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const QubitCoord q{x, y};
                const GateToken& tok = tensor.at(t, q);
                if (tok.angle < 0 || tok.angle >= m)
                    report.push_back({t, q, "angle-range", "angle index outside [0, modulus)"});
                if (!is_parametric(tok.kind) && tok.angle != 0)
                    report.push_back({t, q, "angle-nonparametric",
                                      std::string(kind_name(tok.kind)) + " token carries an angle"});
                if (!is_two_qubit(tok.kind) && tok.partner != PartnerDir::PlusX)
                    report.push_back({t, q, "partner-noncontrol",
                                      "non-control token must keep the canonical partner direction"});
                if (!is_two_qubit(tok.kind)) continue;

                if (tensor.dims.rank() == 1 && tok.partner == PartnerDir::PlusY) {
                    report.push_back({t, q, "partner-rank", "+y partner on a rank-1 lattice"});
                    continue;
                }
                auto p = partner_coord(tensor, q, tok.partner);
                if (!p) {
                    report.push_back({t, q, "partner-bounds", "partner site leaves the lattice"});
                    continue;
                }
                if (tensor.at(t, *p).kind != GateKind::Busy) {
                    report.push_back({t, q, "partner-not-busy",
                                      std::string("partner of ") + kind_name(tok.kind) + " is not BUSY"});
                    continue;
                }
                claimed[tensor.qubit_index(*p)] += 1;
            }
        }
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const QubitCoord q{x, y};
                const bool busy = tensor.at(t, q).kind == GateKind::Busy;
                const int owners = claimed[tensor.qubit_index(q)];
                if (busy && owners == 0)
                    report.push_back({t, q, "busy-unclaimed", "BUSY site has no adjacent control"});
                if (owners > 1)
                    report.push_back({t, q, "busy-shared", "site claimed by more than one control"});
                if (!busy && owners == 1)
                    report.push_back({t, q, "busy-missing", "control points at a non-BUSY site"});
            }
        }
    }
    return report;
}

void require_valid(const CircuitTensor& tensor) {
    ValidationReport report = validate(tensor);
    if (report.empty()) return;
    std::ostringstream os;
    os << "invalid circuit tensor (" << report.size() << " violation"
       << (report.size() == 1 ? "" : "s") << "):";
    const std::size_t shown = std::min<std::size_t>(report.size(), 4);
    for (std::size_t i = 0; i < shown; ++i) {
        const Violation& v = report[i];
        os << " [t=" << v.t << " x=" << v.q.x << " y=" << v.q.y << " " << v.rule << ": " << v.detail << "]";
    }
    if (shown < report.size()) os << " ...";
    throw LatticeError(LatticeError::Code::InvalidTensor, os.str());
}

CircuitTensor encode_instructions(const InstructionList& instructions, const LatticeDims& dims) {
    CircuitTensor tensor = CircuitTensor::all_idle(dims);
    for (const Instruction& ins : instructions) {
        if (ins.kind == GateKind::Idle) continue;
        if (ins.kind == GateKind::Busy)
            throw LatticeError(LatticeError::Code::BadToken, "BUSY is not an instruction kind");
        if (!tensor.in_bounds(ins.t, ins.q))
            throw LatticeError(LatticeError::Code::OutOfBounds, "instruction site outside the lattice");

        if (!is_two_qubit(ins.kind)) {
            if (ins.q2)
                throw LatticeError(LatticeError::Code::BadToken,
                                   std::string(kind_name(ins.kind)) + " takes a single qubit");
            GateToken& slot = tensor.at(ins.t, ins.q);
            if (slot.kind != GateKind::Idle)
                throw LatticeError(LatticeError::Code::SiteCollision, "site already occupied");
            slot = single_token(ins.kind, ins.angle);
            continue;
        }

        if (!ins.q2)
            throw LatticeError(LatticeError::Code::BadToken,
                               std::string(kind_name(ins.kind)) + " needs a partner qubit");
        if (!tensor.in_bounds(ins.t, *ins.q2))
            throw LatticeError(LatticeError::Code::OutOfBounds, "partner site outside the lattice");
        QubitCoord a = ins.q, b = *ins.q2;
        if (coord_less(b, a)) std::swap(a, b);
        PartnerDir dir;
        if (b.x == a.x + 1 && b.y == a.y)
            dir = PartnerDir::PlusX;
        else if (b.y == a.y + 1 && b.x == a.x)
            dir = PartnerDir::PlusY;
        else
            throw LatticeError(LatticeError::Code::NonAdjacentPair,
                               "two-qubit gate on a non-nearest-neighbour pair");
        GateToken& ctrl = tensor.at(ins.t, a);
        GateToken& part = tensor.at(ins.t, b);
        if (ctrl.kind != GateKind::Idle || part.kind != GateKind::Idle)
            throw LatticeError(LatticeError::Code::SiteCollision, "site already occupied");
        ctrl = control_token(ins.kind, dir, ins.angle);
        part = busy_token();
    }
    return tensor;
}

InstructionList gates_at_step(const CircuitTensor& tensor, int t) {
    InstructionList out;
    const int nx = tensor.dims.extent_x();
    const int ny = tensor.dims.extent_y();
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const QubitCoord q{x, y};
            const GateToken& tok = tensor.at(t, q);
            if (tok.kind == GateKind::Idle || tok.kind == GateKind::Busy) continue;
            Instruction ins;
            ins.kind = tok.kind;
            ins.angle = tok.angle;
            ins.t = t;
            ins.q = q;
            if (is_two_qubit(tok.kind)) {
                auto p = partner_coord(tensor, q, tok.partner);
                if (!p)
                    throw LatticeError(LatticeError::Code::InvalidTensor,
                                       "control token without an in-bounds partner");
                ins.q2 = *p;
            }
            out.push_back(ins);
        }
    }
    return out;
}

InstructionList decode_instructions(const CircuitTensor& tensor) {
    require_valid(tensor);
    InstructionList out;
    for (int t = 0; t < tensor.dims.time_steps; ++t) {
        InstructionList step = gates_at_step(tensor, t);
        out.insert(out.end(), step.begin(), step.end());
    }
    return out;
}

std::vector<int> fully_idle_steps(const CircuitTensor& tensor) {
    std::vector<int> out;
    const std::int64_t nq = tensor.dims.qubit_count();
    for (int t = 0; t < tensor.dims.time_steps; ++t) {
        const std::int64_t base = static_cast<std::int64_t>(t) * nq;
        bool idle = true;
        for (std::int64_t i = 0; i < nq && idle; ++i)
            idle = tensor.sites[static_cast<std::size_t>(base + i)].kind == GateKind::Idle;
        if (idle) out.push_back(t);
    }
    return out;
}

} // namespace latq
