#pragma once

// Infidelity cost model. A circuit's score is the sum of per-gate infidelity
// budgets, a same-step crosstalk term for simultaneous gates of coupled
// kinds, an idle-site charge with a refund for fully idle time steps, and an
// optional swap-area override for the first and last steps. The total
// decomposes over time steps, which makes move deltas exact: a move's delta
// is the recomputed cost of the touched steps, new minus old.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "latq/lattice.hpp"

namespace latq {

struct CostError : std::runtime_error {
    enum class Code { ZeroDistance, UnknownGateKind, InvalidPatch, IncompatibleMachine };
    Code code;
    CostError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

enum class DistanceMetric : std::uint8_t { Euclidean, Manhattan };

// Distance-decaying coupling x(r) = coefficient / r^exponent charged once per
// unordered pair of simultaneous gate instances of kinds {kind_a, kind_b},
// per inter-gate qubit pair. Intra-gate pairs are never charged.
struct CrosstalkKernel {
    GateKind kind_a = GateKind::CP;
    GateKind kind_b = GateKind::CP; // defaults to same-kind coupling
    double coefficient = 0.0;
    double exponent = 6.0;
    DistanceMetric metric = DistanceMetric::Euclidean;

    double value(double r) const; // throws ZeroDistance when r <= 0
    friend bool operator==(const CrosstalkKernel&, const CrosstalkKernel&) = default;
};

// First and last time steps may be declared a swap area: a virtual region
// where listed kinds (and Idle) are free and any other gate instance charges
// a flat penalty. Swap-area steps charge no idle cost, no crosstalk, and earn
// no fully-idle refund.
struct SwapArea {
    bool enabled = false;
    std::vector<GateKind> allowed = {GateKind::Swap};
    double penalty = 0.0;
    friend bool operator==(const SwapArea&, const SwapArea&) = default;
};

struct MachineSpec {
    std::string name;
    int lattice_rank = 0;          // 0 = any
    std::vector<int> extents;      // empty = any
    std::map<GateKind, double> gate_infidelity; // per-use budget, controls only
    double idle_infidelity = 0.0;
    std::vector<CrosstalkKernel> kernels;
    SwapArea swap_area;
    bool ordered_pairs = false;    // count gate pairs twice (ordered) if set

    double gate_cost(GateKind kind) const; // throws UnknownGateKind
    const CrosstalkKernel* kernel_for(GateKind a, GateKind b) const;

    // Throws IncompatibleMachine if the tensor's rank/extents violate the
    // machine constraint or a used gate kind has no infidelity entry.
    void check_compatible(const CircuitTensor& tensor) const;

    // Non-fatal advisories (negative or implausibly large entries).
    std::vector<std::string> warnings() const;

    friend bool operator==(const MachineSpec&, const MachineSpec&) = default;
};

// Kernel value for a same-kind pair at distance r. Throws UnknownGateKind if
// no kernel couples (kind, kind), ZeroDistance if r <= 0.
double crosstalk_term(const MachineSpec& machine, GateKind kind, double r);

// One-site replacement; a Patch is an unordered set of them with distinct
// sites. `before` must match the tensor the patch is evaluated against.
struct SitePatch {
    int t = 0;
    QubitCoord q;
    GateToken before;
    GateToken after;
};
using Patch = std::vector<SitePatch>;

Patch reverse_patch(const Patch& patch);
void apply_patch(CircuitTensor& tensor, const Patch& patch); // checks `before`

// Precomputes kernel lookup tables and distance caches for one (machine,
// dims) pair. Not thread-safe; use one evaluator per chain. The free
// functions below construct a throwaway evaluator, which is fine outside
// hot loops.
class CostEvaluator {
  public:
    CostEvaluator(const MachineSpec& machine, const LatticeDims& dims);

    double step_cost(const CircuitTensor& tensor, int t) const;
    double step_cost_patched(const CircuitTensor& tensor, int t, const Patch& patch) const;
    double total(const CircuitTensor& tensor) const;
    // Exact step-decomposed delta; reversing the patch negates it bit-exactly.
    double delta(const CircuitTensor& tensor, const Patch& patch) const;

    const MachineSpec& machine() const { return machine_; }

  private:
    struct KernelTable {
        const CrosstalkKernel* kernel = nullptr;
        mutable std::vector<double> by_key; // indexed by integer distance key, NaN = unset
    };

    bool swap_area_step(int t) const;
    double pair_term(const KernelTable& table, QubitCoord a, QubitCoord b) const;
    template <typename TokenAt>
    double step_cost_impl(int t, TokenAt&& token_at) const;

    MachineSpec machine_;
    LatticeDims dims_;
    double gate_cost_[kGateKindCount]; // NaN where undefined
    KernelTable kernel_grid_[kGateKindCount][kGateKindCount];
    bool kind_coupled_[kGateKindCount];
    bool swap_allowed_[kGateKindCount];

    struct StepGate {
        GateKind kind;
        QubitCoord q0, q1;
        int nq;
    };
    mutable std::vector<StepGate> scratch_;
};

// I(C): validates machine compatibility, then scores the tensor.
double total_infidelity(const CircuitTensor& tensor, const MachineSpec& machine);

// I(apply(patch)) - I(C) without rescoring untouched steps. Throws
// InvalidPatch on duplicate sites or a `before` mismatch.
double delta_infidelity(const CircuitTensor& tensor, const Patch& patch, const MachineSpec& machine);

// Elementwise total_infidelity over a basis of circuits.
std::vector<double> infidelity_over_basis(const std::vector<CircuitTensor>& basis,
                                          const MachineSpec& machine);

} // namespace latq
