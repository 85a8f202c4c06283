#pragma once

// Invertible sub-circuit rewrite rules: parsing and printing of the rule file
// format, anchored pattern matching on circuit tensors, move enumeration and
// application, and load-time validation of every rule by unitary equality.
//
// Patterns are linear: a grid of (steps x wires) cells laid out along one
// lattice axis. On rank-2 lattices a multi-wire pattern can be instantiated
// along +x or +y; the orientation is part of the move. Angle cells carry
// affine expressions over named variables, an optional rule-level delta, and
// rational multiples of pi; expressions are resolved on the angle grid of the
// tensor being matched, and a binding whose angles fall off that grid is
// simply not offered.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latq/cost.hpp"
#include "latq/lattice.hpp"

namespace latq {

// value = num * pi / den, den > 0, reduced
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool operator==(const Rational&) const = default;
};

Rational make_rational(std::int64_t num, std::int64_t den);

// Grid representative of the rational angle at modulus m: num*m/(2*den) when
// that is an integer (not reduced mod m), nullopt when the angle is off-grid.
std::optional<std::int64_t> rational_grid_offset(const Rational& c, std::int64_t m);

struct AngleExpr {
    int var = -1;       // index into Rule::vars, -1 when absent
    int var_sign = 1;   // +1 or -1, meaningful when var >= 0
    int delta_sign = 0; // 0 when the rule delta does not enter
    Rational constant;  // defaults to 0
    bool operator==(const AngleExpr&) const = default;
};

struct PatternCell {
    GateKind kind = GateKind::Idle;
    AngleExpr expr; // used only for RZ / RX / CP cells
};

struct RewritePattern {
    int steps = 0;
    int wires = 0;
    std::vector<PatternCell> cells; // step-major, size steps*wires

    const PatternCell& at(int s, int w) const { return cells[static_cast<std::size_t>(s * wires + w)]; }
    PatternCell& at(int s, int w) { return cells[static_cast<std::size_t>(s * wires + w)]; }
};

// Anchor-time restriction; negative values count back from the last legal
// anchor (-1 = last). Resolved against the tensor in anchor_time_range.
struct TimeWindow {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
};

enum class RuleKind { Affine, Euler };

struct Rule {
    std::string name;
    RuleKind kind = RuleKind::Affine;
    RewritePattern lhs;
    RewritePattern rhs;
    std::vector<std::string> vars;  // binding slots, in first-appearance order
    std::vector<Rational> delta;    // admissible delta values; empty = no delta
    std::optional<TimeWindow> window;

    int steps() const { return lhs.steps; }
    int wires() const { return lhs.wires; }
};

struct RuleSet {
    std::string name;
    std::vector<Rule> rules;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("parse error at line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct StaleBinding : std::runtime_error {
    StaleBinding() : std::runtime_error("tensor no longer matches the move's binding") {}
};

struct RuleValidationFailed : std::runtime_error {
    std::string rule;
    double deficit;
    RuleValidationFailed(const std::string& rule_, double deficit_)
        : std::runtime_error("rule '" + rule_ + "' failed unitary validation, phase deficit " +
                             std::to_string(deficit_)),
          rule(rule_), deficit(deficit_) {}
};

// Variable values are angle grid indices in [0, m). Euler-rule bindings store
// all six angles (source triple then converted triple) so application and
// reversal are table lookups, never recomputation.
struct Binding {
    std::vector<std::int64_t> vars;
    int delta_index = -1;
    bool operator==(const Binding&) const = default;
};

struct Move {
    int rule = 0;
    bool forward = true;
    PartnerDir orient = PartnerDir::PlusX;
    std::int64_t t = 0;
    std::int64_t qx = 0;
    std::int64_t qy = 0;
    Binding binding;
};

Move reversed(Move m);

RuleSet parse_ruleset(std::string_view text);
std::string format_ruleset(const RuleSet& rs);

// Inclusive legal anchor-time range (window applied); hi < lo when empty.
std::pair<std::int64_t, std::int64_t> anchor_time_range(const Rule& rule, const LatticeDims& dims);

// Geometric fit of the pattern window at the anchor, content ignored.
bool pattern_fits(const Rule& rule, const LatticeDims& dims, PartnerDir orient,
                  std::int64_t t, std::int64_t qx, std::int64_t qy);

// All admissible bindings at the anchor, in deterministic order (delta list
// order; euler rules yield at most one). Empty when nothing matches.
std::vector<Binding> matches_at(const Rule& rule, bool forward, const CircuitTensor& tensor,
                                std::int64_t t, std::int64_t qx, std::int64_t qy, PartnerDir orient);

// Sites the move changes, as a cost-model patch (empty when source and target
// coincide). Throws StaleBinding if the tensor no longer carries the tokens
// the binding was taken from.
Patch make_patch(const RuleSet& rs, const CircuitTensor& tensor, const Move& move);

// Copy-and-apply convenience over make_patch/apply_patch.
CircuitTensor apply_at(const RuleSet& rs, const CircuitTensor& tensor, const Move& move);

// Every matching move, ordered by rule index, direction (forward first),
// orientation (+x first), anchor (t, y, x), binding index.
std::vector<Move> enumerate_moves(const RuleSet& rs, const CircuitTensor& tensor);

struct ValidationResult {
    bool pass = false;
    double max_deficit = 0.0; // worst phase_deficit(lhs, rhs) over bindings
    std::int64_t bindings_checked = 0;
    bool sampled = false;
};

// Unitary-equality check of lhs vs rhs over the binding space at modulus m:
// exhaustive up to 4096 bindings, a deterministic 256-binding sample beyond.
// Passes when every checked binding has phase deficit at most 1e-9.
ValidationResult validate_rule(const Rule& rule, std::int64_t m);

// Throws RuleValidationFailed on the first failing rule.
void validate_ruleset(const RuleSet& rs, std::int64_t m);

// Smallest power-of-two modulus >= 2 on which every rule constant and delta
// value lands on the angle grid.
std::int64_t natural_modulus(const RuleSet& rs);

// Builtin name (example1, example1-qa, ths, qft) or a path to a rule file;
// parses without validating. Callers that want per-rule diagnostics run
// validate_rule themselves.
RuleSet read_ruleset(const std::string& name_or_path);

// read_ruleset plus validation at the ruleset's natural modulus.
RuleSet load_ruleset(const std::string& name_or_path);

} // namespace latq
