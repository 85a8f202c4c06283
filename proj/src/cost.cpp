#include "latq/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace latq {

double CrosstalkKernel::value(double r) const {
    if (r <= 0.0)
        throw CostError(CostError::Code::ZeroDistance, "crosstalk kernel evaluated at r <= 0");
    return coefficient / std::pow(r, exponent);
}

double MachineSpec::gate_cost(GateKind kind) const {
    auto it = gate_infidelity.find(kind);
    if (it == gate_infidelity.end())
        throw CostError(CostError::Code::UnknownGateKind,
                        std::string("machine '") + name + "' has no infidelity for " + kind_name(kind));
    return it->second;
}

const CrosstalkKernel* MachineSpec::kernel_for(GateKind a, GateKind b) const {
    for (const CrosstalkKernel& k : kernels)
        if ((k.kind_a == a && k.kind_b == b) || (k.kind_a == b && k.kind_b == a)) return &k;
    return nullptr;
}

void MachineSpec::check_compatible(const CircuitTensor& tensor) const {
    if (lattice_rank != 0 && lattice_rank != tensor.dims.rank()) {
        std::ostringstream os;
        os << "machine '" << name << "' expects rank " << lattice_rank << ", circuit has rank "
           << tensor.dims.rank();
        throw CostError(CostError::Code::IncompatibleMachine, os.str());
    }
    if (!extents.empty() && extents != tensor.dims.qubit_extents)
        throw CostError(CostError::Code::IncompatibleMachine,
                        "machine '" + name + "' constrains qubit extents, circuit does not match");
    bool seen[kGateKindCount] = {};
    for (const GateToken& tok : tensor.sites) seen[static_cast<int>(tok.kind)] = true;
    for (int k = 0; k < kGateKindCount; ++k) {
        const GateKind kind = static_cast<GateKind>(k);
        if (!seen[k] || kind == GateKind::Idle || kind == GateKind::Busy) continue;
        if (gate_infidelity.find(kind) == gate_infidelity.end())
            throw CostError(CostError::Code::IncompatibleMachine,
                            std::string("machine '") + name + "' has no infidelity for " + kind_name(kind));
    }
}

std::vector<std::string> MachineSpec::warnings() const {
    std::vector<std::string> out;
    auto flag = [&out](const std::string& what, double v) {
        if (v < 0.0)
            out.push_back(what + " is negative");
        else if (v > 1e-2)
            out.push_back(what + " exceeds 1e-2; the additive budget stops being meaningful");
    };
    for (const auto& [kind, v] : gate_infidelity)
        flag(std::string("infidelity of ") + kind_name(kind), v);
    flag("idle infidelity", idle_infidelity);
    for (const CrosstalkKernel& k : kernels) {
        if (k.coefficient < 0.0)
            out.push_back(std::string("crosstalk coefficient for ") + kind_name(k.kind_a) + "/" +
                          kind_name(k.kind_b) + " is negative");
    }
    if (swap_area.enabled) flag("swap-area penalty", swap_area.penalty);
    return out;
}

double crosstalk_term(const MachineSpec& machine, GateKind kind, double r) {
    const CrosstalkKernel* k = machine.kernel_for(kind, kind);
    if (!k)
        throw CostError(CostError::Code::UnknownGateKind,
                        std::string("machine '") + machine.name + "' has no crosstalk kernel for " +
                            kind_name(kind));
    return k->value(r);
}

Patch reverse_patch(const Patch& patch) {
    Patch out = patch;
    for (SitePatch& p : out) std::swap(p.before, p.after);
    return out;
}

void apply_patch(CircuitTensor& tensor, const Patch& patch) {
    for (const SitePatch& p : patch) {
        if (!tensor.in_bounds(p.t, p.q))
            throw CostError(CostError::Code::InvalidPatch, "patch site outside the lattice");
        GateToken& slot = tensor.at(p.t, p.q);
        if (!(slot == p.before))
            throw CostError(CostError::Code::InvalidPatch, "patch `before` does not match the tensor");
        slot = p.after;
    }
}

// ---------------------------------------------------------------------------
// CostEvaluator
// ---------------------------------------------------------------------------

CostEvaluator::CostEvaluator(const MachineSpec& machine, const LatticeDims& dims)
    : machine_(machine), dims_(dims) {
    check_dims(dims);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < kGateKindCount; ++k) {
        gate_cost_[k] = nan;
        kind_coupled_[k] = false;
        swap_allowed_[k] = false;
    }
    for (const auto& [kind, v] : machine_.gate_infidelity) gate_cost_[static_cast<int>(kind)] = v;
    for (int a = 0; a < kGateKindCount; ++a)
        for (int b = 0; b < kGateKindCount; ++b)
            kernel_grid_[a][b].kernel =
                machine_.kernel_for(static_cast<GateKind>(a), static_cast<GateKind>(b));
    for (int a = 0; a < kGateKindCount; ++a)
        for (int b = 0; b < kGateKindCount; ++b)
            if (kernel_grid_[a][b].kernel) kind_coupled_[a] = true;
    for (GateKind kind : machine_.swap_area.allowed) swap_allowed_[static_cast<int>(kind)] = true;
}

bool CostEvaluator::swap_area_step(int t) const {
    return machine_.swap_area.enabled && (t == 0 || t == dims_.time_steps - 1);
}

double CostEvaluator::pair_term(const KernelTable& table, QubitCoord a, QubitCoord b) const {
    const int dx = a.x - b.x;
    const int dy = a.y - b.y;
    const CrosstalkKernel& k = *table.kernel;
    const int key = k.metric == DistanceMetric::Euclidean ? dx * dx + dy * dy
                                                          : std::abs(dx) + std::abs(dy);
    if (key == 0)
        throw CostError(CostError::Code::ZeroDistance, "crosstalk between coincident qubits");
    if (static_cast<std::size_t>(key) >= table.by_key.size())
        table.by_key.resize(static_cast<std::size_t>(key) + 1,
                            std::numeric_limits<double>::quiet_NaN());
    double& slot = table.by_key[static_cast<std::size_t>(key)];
    if (std::isnan(slot)) {
        const double r = k.metric == DistanceMetric::Euclidean ? std::sqrt(static_cast<double>(key))
                                                               : static_cast<double>(key);
        slot = k.value(r);
    }
    return slot;
}

template <typename TokenAt>
double CostEvaluator::step_cost_impl(int t, TokenAt&& token_at) const {
    const int nx = dims_.extent_x();
    const int ny = dims_.extent_y();
    const int nq = dims_.qubit_count();

    scratch_.clear();
    int idle_count = 0;
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const GateToken tok = token_at(t, QubitCoord{x, y});
            if (tok.kind == GateKind::Idle) {
                ++idle_count;
                continue;
            }
            if (tok.kind == GateKind::Busy) continue;
            StepGate g;
            g.kind = tok.kind;
            g.q0 = {x, y};
            if (is_two_qubit(tok.kind)) {
                g.q1 = tok.partner == PartnerDir::PlusX ? QubitCoord{x + 1, y} : QubitCoord{x, y + 1};
                g.nq = 2;
            } else {
                g.q1 = g.q0;
                g.nq = 1;
            }
            scratch_.push_back(g);
        }
    }

    if (swap_area_step(t)) {
        double cost = 0.0;
        for (const StepGate& g : scratch_)
            if (!swap_allowed_[static_cast<int>(g.kind)]) cost += machine_.swap_area.penalty;
        return cost;
    }

    double cost = 0.0;
    for (const StepGate& g : scratch_) {
        const double gc = gate_cost_[static_cast<int>(g.kind)];
        if (std::isnan(gc))
            throw CostError(CostError::Code::UnknownGateKind,
                            std::string("machine '") + machine_.name + "' has no infidelity for " +
                                kind_name(g.kind));
        cost += gc;
    }

    const std::size_t n = scratch_.size();
    const double pair_factor = machine_.ordered_pairs ? 2.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!kind_coupled_[static_cast<int>(scratch_[i].kind)]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            const KernelTable& table =
                kernel_grid_[static_cast<int>(scratch_[i].kind)][static_cast<int>(scratch_[j].kind)];
            if (!table.kernel) continue;
            const StepGate& a = scratch_[i];
            const StepGate& b = scratch_[j];
            double sum = pair_term(table, a.q0, b.q0);
            if (b.nq == 2) sum += pair_term(table, a.q0, b.q1);
            if (a.nq == 2) {
                sum += pair_term(table, a.q1, b.q0);
                if (b.nq == 2) sum += pair_term(table, a.q1, b.q1);
            }
            cost += pair_factor * sum;
        }
    }

    if (idle_count != nq) cost += static_cast<double>(idle_count) * machine_.idle_infidelity;
    return cost;
}

double CostEvaluator::step_cost(const CircuitTensor& tensor, int t) const {
    return step_cost_impl(t, [&tensor](int tt, QubitCoord q) { return tensor.at(tt, q); });
}

double CostEvaluator::step_cost_patched(const CircuitTensor& tensor, int t, const Patch& patch) const {
    return step_cost_impl(t, [&tensor, &patch](int tt, QubitCoord q) {
        for (const SitePatch& p : patch)
            if (p.t == tt && p.q == q) return p.after;
        return tensor.at(tt, q);
    });
}

double CostEvaluator::total(const CircuitTensor& tensor) const {
    double sum = 0.0;
    for (int t = 0; t < tensor.dims.time_steps; ++t) sum += step_cost(tensor, t);
    return sum;
}

double CostEvaluator::delta(const CircuitTensor& tensor, const Patch& patch) const {
    // Touched steps, deduplicated; patches are tiny so a flat scan is fine.
    int touched[16];
    int n_touched = 0;
    std::vector<int> overflow;
    for (const SitePatch& p : patch) {
        bool seen = false;
        for (int i = 0; i < n_touched && !seen; ++i) seen = touched[i] == p.t;
        for (std::size_t i = 0; i < overflow.size() && !seen; ++i) seen = overflow[i] == p.t;
        if (seen) continue;
        if (n_touched < 16)
            touched[n_touched++] = p.t;
        else
            overflow.push_back(p.t);
    }
    double d = 0.0;
    for (int i = 0; i < n_touched; ++i)
        d += step_cost_patched(tensor, touched[i], patch) - step_cost(tensor, touched[i]);
    for (int t : overflow) d += step_cost_patched(tensor, t, patch) - step_cost(tensor, t);
    return d;
}

// ---------------------------------------------------------------------------
// Free functions
// ---------------------------------------------------------------------------

double total_infidelity(const CircuitTensor& tensor, const MachineSpec& machine) {
    machine.check_compatible(tensor);
    return CostEvaluator(machine, tensor.dims).total(tensor);
}

double delta_infidelity(const CircuitTensor& tensor, const Patch& patch, const MachineSpec& machine) {
    for (std::size_t i = 0; i < patch.size(); ++i) {
        const SitePatch& p = patch[i];
        if (!tensor.in_bounds(p.t, p.q))
            throw CostError(CostError::Code::InvalidPatch, "patch site outside the lattice");
        if (!(tensor.at(p.t, p.q) == p.before))
            throw CostError(CostError::Code::InvalidPatch, "patch `before` does not match the tensor");
        for (std::size_t j = i + 1; j < patch.size(); ++j)
            if (patch[j].t == p.t && patch[j].q == p.q)
                throw CostError(CostError::Code::InvalidPatch, "patch sites are not distinct");
    }
    return CostEvaluator(machine, tensor.dims).delta(tensor, patch);
}

std::vector<double> infidelity_over_basis(const std::vector<CircuitTensor>& basis,
                                          const MachineSpec& machine) {
    std::vector<double> out;
    out.reserve(basis.size());
    for (const CircuitTensor& c : basis) out.push_back(total_infidelity(c, machine));
    return out;
}

} // namespace latq
