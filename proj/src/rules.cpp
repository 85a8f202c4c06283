#include "latq/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "latq/assets.hpp"
#include "latq/euler.hpp"
#include "latq/rng.hpp"
#include "latq/unitary.hpp"

namespace latq {

namespace {

constexpr double kSnapTol = 1e-9;
constexpr double kRuleTol = 1e-9;
constexpr std::int64_t kFullEnumLimit = 4096;
constexpr int kSampleCount = 256;

std::int64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return static_cast<std::int64_t>(h);
}

QubitCoord wire_coord(std::int64_t qx, std::int64_t qy, int w, PartnerDir orient) {
    if (orient == PartnerDir::PlusX) return {static_cast<int>(qx) + w, static_cast<int>(qy)};
    return {static_cast<int>(qx), static_cast<int>(qy) + w};
}

std::int64_t mod_m(std::int64_t k, std::int64_t m) {
    k %= m;
    if (k < 0) k += m;
    return k;
}

// Known (variable-free) part of the expression: delta and constant terms.
std::optional<std::int64_t> expr_base(const AngleExpr& e, const Rule& rule, int delta_index, std::int64_t m) {
    std::int64_t k = 0;
    if (e.delta_sign != 0) {
        if (delta_index < 0 || delta_index >= static_cast<int>(rule.delta.size())) return std::nullopt;
        auto kd = rational_grid_offset(rule.delta[static_cast<std::size_t>(delta_index)], m);
        if (!kd) return std::nullopt;
        k += e.delta_sign * *kd;
    }
    auto kc = rational_grid_offset(e.constant, m);
    if (!kc) return std::nullopt;
    return k + *kc;
}

std::optional<std::int64_t> eval_expr(const AngleExpr& e, const Rule& rule, const Binding& b, std::int64_t m) {
    auto base = expr_base(e, rule, b.delta_index, m);
    if (!base) return std::nullopt;
    std::int64_t k = *base;
    if (e.var >= 0) k += e.var_sign * b.vars[static_cast<std::size_t>(e.var)];
    return mod_m(k, m);
}

// Token a fully bound pattern cell denotes; nullopt when an angle falls off
// the grid at this modulus.
std::optional<GateToken> cell_token(const PatternCell& cell, const Rule& rule, const Binding& b,
                                    std::int64_t m, PartnerDir orient) {
    switch (cell.kind) {
    case GateKind::Idle: return idle_token();
    case GateKind::Busy: return busy_token();
    case GateKind::H: return single_token(GateKind::H);
    case GateKind::CZ: return control_token(GateKind::CZ, orient);
    case GateKind::Swap: return control_token(GateKind::Swap, orient);
    case GateKind::RZ:
    case GateKind::RX: {
        auto k = eval_expr(cell.expr, rule, b, m);
        if (!k) return std::nullopt;
        return single_token(cell.kind, *k);
    }
    case GateKind::CP: {
        auto k = eval_expr(cell.expr, rule, b, m);
        if (!k) return std::nullopt;
        return control_token(GateKind::CP, orient, *k);
    }
    }
    return std::nullopt;
}

// Matches the source pattern's cells, binding variables as they are first
// seen. Returns false on any mismatch or off-grid angle.
bool match_cells(const RewritePattern& src, const Rule& rule, const CircuitTensor& tensor,
                 std::int64_t t, std::int64_t qx, std::int64_t qy, PartnerDir orient,
                 Binding& b, std::vector<char>& bound) {
    const std::int64_t m = tensor.dims.angle_modulus;
    for (int s = 0; s < src.steps; ++s) {
        for (int w = 0; w < src.wires; ++w) {
            const PatternCell& cell = src.at(s, w);
            const GateToken& tok = tensor.at(static_cast<int>(t) + s, wire_coord(qx, qy, w, orient));
            if (tok.kind != cell.kind) return false;
            if (!is_parametric(cell.kind)) {
                auto want = cell_token(cell, rule, b, m, orient);
                if (tok != *want) return false;
                continue;
            }
            if (cell.kind == GateKind::CP && tok.partner != orient) return false;
            auto base = expr_base(cell.expr, rule, b.delta_index, m);
            if (!base) return false;
            if (cell.expr.var >= 0) {
                const auto v = static_cast<std::size_t>(cell.expr.var);
                const std::int64_t solved = mod_m(cell.expr.var_sign * (tok.angle - *base), m);
                if (!bound[v]) {
                    b.vars[v] = solved;
                    bound[v] = 1;
                } else if (b.vars[v] != solved) {
                    return false;
                }
            } else if (tok.angle != mod_m(*base, m)) {
                return false;
            }
        }
    }
    return true;
}

// Every pattern cell evaluates on the grid under the binding.
bool pattern_feasible(const RewritePattern& pat, const Rule& rule, const Binding& b,
                      std::int64_t m, PartnerDir orient) {
    for (const PatternCell& cell : pat.cells) {
        if (!cell_token(cell, rule, b, m, orient)) return false;
    }
    return true;
}

std::vector<Binding> euler_matches(const Rule& rule, bool forward, const CircuitTensor& tensor,
                                   std::int64_t t, std::int64_t qx, std::int64_t qy, PartnerDir orient) {
    const std::int64_t m = tensor.dims.angle_modulus;
    const RewritePattern& src = forward ? rule.lhs : rule.rhs;
    std::array<std::int64_t, 3> k{};
    for (int s = 0; s < 3; ++s) {
        const GateToken& tok = tensor.at(static_cast<int>(t) + s, wire_coord(qx, qy, 0, orient));
        if (tok.kind != src.at(s, 0).kind) return {};
        k[static_cast<std::size_t>(s)] = tok.angle;
    }
    const double h0 = grid_angle(k[0], m);
    const double h1 = grid_angle(k[1], m);
    const double h2 = grid_angle(k[2], m);

    Eigen::Matrix2cd u;
    EulerAngles same, other;
    if (forward) {
        u = gate_rz(h2) * gate_rx(h1) * gate_rz(h0);
        same = zxz_canonical(u);
        other = xzx_canonical(u);
    } else {
        u = gate_rx(h2) * gate_rz(h1) * gate_rx(h0);
        same = xzx_canonical(u);
        other = zxz_canonical(u);
    }
    // Only canonical triples match, so forward and backward application are
    // exact inverses and every reachable site pairs with exactly one partner.
    auto s0 = snap_angle(same.a0, m, kSnapTol);
    auto s1 = snap_angle(same.a1, m, kSnapTol);
    auto s2 = snap_angle(same.a2, m, kSnapTol);
    if (!s0 || !s1 || !s2 || *s0 != k[0] || *s1 != k[1] || *s2 != k[2]) return {};
    auto o0 = snap_angle(other.a0, m, kSnapTol);
    auto o1 = snap_angle(other.a1, m, kSnapTol);
    auto o2 = snap_angle(other.a2, m, kSnapTol);
    if (!o0 || !o1 || !o2) return {};

    Binding b;
    b.vars.resize(6);
    if (forward) {
        b.vars = {k[0], k[1], k[2], *o0, *o1, *o2};
    } else {
        b.vars = {*o0, *o1, *o2, k[0], k[1], k[2]};
    }
    return {b};
}

// ---------------------------------------------------------------------------
// Rule file text format

struct Cursor {
    std::vector<std::pair<int, std::string>> lines; // (line number, stripped text)
    std::size_t pos = 0;

    bool done() const { return pos >= lines.size(); }
    const std::string& text() const { return lines[pos].second; }
    int lineno() const { return done() ? (lines.empty() ? 1 : lines.back().first) : lines[pos].first; }
};

std::string strip(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string first_word(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(0, i);
}

std::string rest_after_word(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return strip(s.substr(i));
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s) {
        if (!std::islower(static_cast<unsigned char>(c)) && !std::isdigit(static_cast<unsigned char>(c)) && c != '_')
            return false;
    }
    return true;
}

std::optional<Rational> parse_rational_pi(std::string_view s) {
    if (s == "0") return Rational{0, 1};
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    std::size_t i = 0;
    std::int64_t num = 0;
    bool have_digits = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        num = num * 10 + (s[i] - '0');
        have_digits = true;
        ++i;
    }
    if (!have_digits) num = 1;
    if (s.substr(i, 2) != "pi") return std::nullopt;
    i += 2;
    std::int64_t den = 1;
    if (i < s.size()) {
        if (s[i] != '/') return std::nullopt;
        ++i;
        den = 0;
        bool den_digits = false;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            den = den * 10 + (s[i] - '0');
            den_digits = true;
            ++i;
        }
        if (!den_digits || i != s.size() || den == 0) return std::nullopt;
    }
    return make_rational(neg ? -num : num, den);
}

int intern_var(Rule& rule, const std::string& name, int lineno) {
    for (std::size_t i = 0; i < rule.vars.size(); ++i) {
        if (rule.vars[i] == name) return static_cast<int>(i);
    }
    if (rule.vars.size() >= 8) throw ParseError(lineno, "too many angle variables in rule '" + rule.name + "'");
    rule.vars.push_back(name);
    return static_cast<int>(rule.vars.size()) - 1;
}

AngleExpr parse_expr(const std::string& raw, Rule& rule, int lineno) {
    std::string s;
    for (char c : raw) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    if (s.empty()) throw ParseError(lineno, "empty angle expression");
    if (s == "0") return AngleExpr{};

    AngleExpr e;
    bool have_var = false, have_delta = false, have_const = false;
    std::size_t i = 0;
    while (i < s.size()) {
        int sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            sign = s[i] == '-' ? -1 : 1;
            ++i;
        } else if (i != 0) {
            throw ParseError(lineno, "expected + or - in angle expression '" + raw + "'");
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != '+' && s[j] != '-') ++j;
        const std::string term = s.substr(i, j - i);
        if (term.empty()) throw ParseError(lineno, "empty term in angle expression '" + raw + "'");
        if (term == "D") {
            if (have_delta) throw ParseError(lineno, "duplicate delta term in '" + raw + "'");
            e.delta_sign = sign;
            have_delta = true;
        } else if (auto c = parse_rational_pi(term); c && term != "0") {
            if (have_const) throw ParseError(lineno, "duplicate constant term in '" + raw + "'");
            e.constant = make_rational(sign * c->num, c->den);
            have_const = true;
        } else if (is_identifier(term) && term != "pi") {
            if (have_var) throw ParseError(lineno, "duplicate variable term in '" + raw + "'");
            e.var = intern_var(rule, term, lineno);
            e.var_sign = sign;
            have_var = true;
        } else {
            throw ParseError(lineno, "bad term '" + term + "' in angle expression");
        }
        i = j;
    }
    return e;
}

PatternCell parse_cell(const std::string& raw, Rule& rule, int lineno) {
    const std::string s = strip(raw);
    if (s.empty()) throw ParseError(lineno, "empty pattern cell");
    PatternCell cell;
    if (s == "." || s == "Idle") {
        cell.kind = GateKind::Idle;
        return cell;
    }
    if (s == "H" || s == "CZ" || s == "SWAP" || s == "BUSY") {
        cell.kind = *kind_from_name(s);
        return cell;
    }
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
        throw ParseError(lineno, "bad pattern cell '" + s + "'");
    const std::string head = s.substr(0, open);
    if (head != "RZ" && head != "RX" && head != "CP")
        throw ParseError(lineno, "bad pattern cell '" + s + "'");
    cell.kind = *kind_from_name(head);
    cell.expr = parse_expr(s.substr(open + 1, s.size() - open - 2), rule, lineno);
    return cell;
}

std::vector<PatternCell> parse_row(const std::string& line, Rule& rule, int lineno) {
    std::vector<PatternCell> row;
    std::size_t start = 0;
    while (true) {
        const auto bar = line.find('|', start);
        const std::string piece = line.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
        row.push_back(parse_cell(piece, rule, lineno));
        if (bar == std::string::npos) break;
        start = bar + 1;
    }
    return row;
}

void check_pattern(const RewritePattern& pat, const std::string& rule_name, int lineno) {
    for (int s = 0; s < pat.steps; ++s) {
        for (int w = 0; w < pat.wires; ++w) {
            const GateKind k = pat.at(s, w).kind;
            if (is_two_qubit(k)) {
                if (w + 1 >= pat.wires || pat.at(s, w + 1).kind != GateKind::Busy)
                    throw ParseError(lineno, "rule '" + rule_name + "': control at step " + std::to_string(s) +
                                                 " wire " + std::to_string(w) + " has no BUSY partner in the pattern");
            }
            if (k == GateKind::Busy) {
                if (w == 0 || !is_two_qubit(pat.at(s, w - 1).kind))
                    throw ParseError(lineno, "rule '" + rule_name + "': BUSY at step " + std::to_string(s) +
                                                 " wire " + std::to_string(w) + " has no control in the pattern");
            }
        }
    }
}

void finalize_rule(Rule& rule, int lineno) {
    if (rule.lhs.steps == 0 || rule.rhs.steps == 0)
        throw ParseError(lineno, "rule '" + rule.name + "' is missing an lhs or rhs pattern");
    if (rule.lhs.steps != rule.rhs.steps || rule.lhs.wires != rule.rhs.wires)
        throw ParseError(lineno, "rule '" + rule.name + "': lhs and rhs extents differ");
    check_pattern(rule.lhs, rule.name, lineno);
    check_pattern(rule.rhs, rule.name, lineno);

    bool uses_delta = false;
    for (const RewritePattern* pat : {&rule.lhs, &rule.rhs}) {
        for (const PatternCell& c : pat->cells) {
            if (c.expr.delta_sign != 0) uses_delta = true;
        }
    }
    if (uses_delta && rule.delta.empty())
        throw ParseError(lineno, "rule '" + rule.name + "' uses D but declares no delta list");

    if (rule.kind == RuleKind::Euler) {
        if (!rule.delta.empty()) throw ParseError(lineno, "euler rule '" + rule.name + "' cannot take a delta list");
        const bool shape = rule.lhs.steps == 3 && rule.lhs.wires == 1 &&
                           rule.lhs.at(0, 0).kind == GateKind::RZ && rule.lhs.at(1, 0).kind == GateKind::RX &&
                           rule.lhs.at(2, 0).kind == GateKind::RZ && rule.rhs.at(0, 0).kind == GateKind::RX &&
                           rule.rhs.at(1, 0).kind == GateKind::RZ && rule.rhs.at(2, 0).kind == GateKind::RX;
        if (!shape)
            throw ParseError(lineno, "euler rule '" + rule.name + "' must be RZ;RX;RZ versus RX;RZ;RX on one wire");
        if (rule.vars.size() != 6)
            throw ParseError(lineno, "euler rule '" + rule.name + "' needs six distinct angle variables");
        for (const RewritePattern* pat : {&rule.lhs, &rule.rhs}) {
            for (const PatternCell& c : pat->cells) {
                if (c.expr.var < 0 || c.expr.var_sign != 1 || c.expr.delta_sign != 0 || c.expr.constant.num != 0)
                    throw ParseError(lineno, "euler rule '" + rule.name + "' cells must be bare variables");
            }
        }
        return;
    }

    // Every variable must be solvable from either side, or one direction of
    // the rule could not bind it.
    std::vector<char> in_lhs(rule.vars.size(), 0), in_rhs(rule.vars.size(), 0);
    for (const PatternCell& c : rule.lhs.cells) {
        if (c.expr.var >= 0) in_lhs[static_cast<std::size_t>(c.expr.var)] = 1;
    }
    for (const PatternCell& c : rule.rhs.cells) {
        if (c.expr.var >= 0) in_rhs[static_cast<std::size_t>(c.expr.var)] = 1;
    }
    for (std::size_t v = 0; v < rule.vars.size(); ++v) {
        if (!in_lhs[v] || !in_rhs[v])
            throw ParseError(lineno, "rule '" + rule.name + "': variable '" + rule.vars[v] +
                                         "' must appear on both sides");
    }
}

std::string format_rational(const Rational& r) {
    if (r.num == 0) return "0";
    const std::int64_t n = r.num < 0 ? -r.num : r.num;
    std::string s = r.num < 0 ? "-" : "";
    if (n != 1) s += std::to_string(n);
    s += "pi";
    if (r.den != 1) s += "/" + std::to_string(r.den);
    return s;
}

std::string format_expr(const AngleExpr& e, const Rule& rule) {
    std::string out;
    if (e.var >= 0) {
        if (e.var_sign < 0) out += "-";
        out += rule.vars[static_cast<std::size_t>(e.var)];
    }
    if (e.delta_sign != 0) {
        if (!out.empty()) out += e.delta_sign < 0 ? "-D" : "+D";
        else out += e.delta_sign < 0 ? "-D" : "D";
    }
    if (e.constant.num != 0) {
        const std::string c = format_rational(e.constant);
        if (!out.empty() && c[0] != '-') out += "+";
        out += c;
    }
    if (out.empty()) out = "0";
    return out;
}

std::string format_cell(const PatternCell& c, const Rule& rule) {
    switch (c.kind) {
    case GateKind::Idle: return ".";
    case GateKind::Busy: return "BUSY";
    case GateKind::H:
    case GateKind::CZ:
    case GateKind::Swap: return std::string(kind_name(c.kind));
    case GateKind::RZ:
    case GateKind::RX:
    case GateKind::CP:
        return std::string(kind_name(c.kind)) + "(" + format_expr(c.expr, rule) + ")";
    }
    return ".";
}

// ---------------------------------------------------------------------------
// Validation helpers

CircuitTensor materialize(const RewritePattern& pat, const Rule& rule, const Binding& b, std::int64_t m) {
    LatticeDims dims;
    dims.time_steps = pat.steps;
    dims.qubit_extents = {pat.wires};
    dims.angle_modulus = m;
    CircuitTensor tensor{dims, std::vector<GateToken>(static_cast<std::size_t>(dims.site_count()), idle_token())};
    for (int s = 0; s < pat.steps; ++s) {
        for (int w = 0; w < pat.wires; ++w) {
            auto tok = cell_token(pat.at(s, w), rule, b, m, PartnerDir::PlusX);
            tensor.at(s, {w, 0}) = *tok;
        }
    }
    return tensor;
}

// Checks one fully specified binding; returns false (skipping it) when any
// expression leaves the grid at this modulus.
bool check_binding(const Rule& rule, const Binding& b, std::int64_t m, double& max_deficit) {
    if (!pattern_feasible(rule.lhs, rule, b, m, PartnerDir::PlusX) ||
        !pattern_feasible(rule.rhs, rule, b, m, PartnerDir::PlusX))
        return false;
    const CircuitTensor lhs = materialize(rule.lhs, rule, b, m);
    const CircuitTensor rhs = materialize(rule.rhs, rule, b, m);
    const double d = phase_deficit(circuit_unitary(lhs), circuit_unitary(rhs));
    max_deficit = std::max(max_deficit, d);
    return true;
}

// Euler bindings are generated from the source triple, mirroring matching.
std::optional<Binding> euler_binding(std::int64_t ka, std::int64_t kb, std::int64_t kc, std::int64_t m) {
    const Eigen::Matrix2cd u =
        gate_rz(grid_angle(kc, m)) * gate_rx(grid_angle(kb, m)) * gate_rz(grid_angle(ka, m));
    const EulerAngles same = zxz_canonical(u);
    auto s0 = snap_angle(same.a0, m, kSnapTol);
    auto s1 = snap_angle(same.a1, m, kSnapTol);
    auto s2 = snap_angle(same.a2, m, kSnapTol);
    if (!s0 || !s1 || !s2 || *s0 != ka || *s1 != kb || *s2 != kc) return std::nullopt;
    const EulerAngles other = xzx_canonical(u);
    auto o0 = snap_angle(other.a0, m, kSnapTol);
    auto o1 = snap_angle(other.a1, m, kSnapTol);
    auto o2 = snap_angle(other.a2, m, kSnapTol);
    if (!o0 || !o1 || !o2) return std::nullopt;
    Binding b;
    b.vars = {ka, kb, kc, *o0, *o1, *o2};
    return b;
}

} // namespace

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
        den = -den;
        num = -num;
    }
    if (num == 0) return {0, 1};
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    return {num / g, den / g};
}

std::optional<std::int64_t> rational_grid_offset(const Rational& c, std::int64_t m) {
    const __int128 prod = static_cast<__int128>(c.num) * m;
    const __int128 q = static_cast<__int128>(2) * c.den;
    if (prod % q != 0) return std::nullopt;
    return static_cast<std::int64_t>(prod / q);
}

Move reversed(Move m) {
    m.forward = !m.forward;
    return m;
}

std::pair<std::int64_t, std::int64_t> anchor_time_range(const Rule& rule, const LatticeDims& dims) {
    const std::int64_t base_max = static_cast<std::int64_t>(dims.time_steps) - rule.steps();
    if (base_max < 0) return {0, -1};
    if (!rule.window) return {0, base_max};
    auto resolve = [base_max](std::int64_t v) { return v >= 0 ? v : base_max + 1 + v; };
    const std::int64_t lo = std::max<std::int64_t>(0, resolve(rule.window->lo));
    const std::int64_t hi = std::min(base_max, resolve(rule.window->hi));
    return {lo, hi};
}

bool pattern_fits(const Rule& rule, const LatticeDims& dims, PartnerDir orient,
                  std::int64_t t, std::int64_t qx, std::int64_t qy) {
    const auto [lo, hi] = anchor_time_range(rule, dims);
    if (t < lo || t > hi) return false;
    if (qx < 0 || qy < 0) return false;
    const int wires = rule.wires();
    if (wires == 1 && orient != PartnerDir::PlusX) return false;
    if (orient == PartnerDir::PlusX) {
        return qx + wires <= dims.extent_x() && qy < dims.extent_y();
    }
    if (dims.rank() < 2) return false;
    return qx < dims.extent_x() && qy + wires <= dims.extent_y();
}

std::vector<Binding> matches_at(const Rule& rule, bool forward, const CircuitTensor& tensor,
                                std::int64_t t, std::int64_t qx, std::int64_t qy, PartnerDir orient) {
    if (!pattern_fits(rule, tensor.dims, orient, t, qx, qy)) return {};
    if (rule.kind == RuleKind::Euler) return euler_matches(rule, forward, tensor, t, qx, qy, orient);

    const RewritePattern& src = forward ? rule.lhs : rule.rhs;
    const RewritePattern& dst = forward ? rule.rhs : rule.lhs;
    const std::int64_t m = tensor.dims.angle_modulus;
    const int n_delta = rule.delta.empty() ? 1 : static_cast<int>(rule.delta.size());

    std::vector<Binding> out;
    std::vector<char> bound;
    for (int di = 0; di < n_delta; ++di) {
        Binding b;
        b.delta_index = rule.delta.empty() ? -1 : di;
        b.vars.assign(rule.vars.size(), 0);
        bound.assign(rule.vars.size(), 0);
        if (!match_cells(src, rule, tensor, t, qx, qy, orient, b, bound)) continue;
        if (!pattern_feasible(dst, rule, b, m, orient)) continue;
        out.push_back(std::move(b));
    }
    return out;
}

Patch make_patch(const RuleSet& rs, const CircuitTensor& tensor, const Move& move) {
    const Rule& rule = rs.rules.at(static_cast<std::size_t>(move.rule));
    const RewritePattern& src = move.forward ? rule.lhs : rule.rhs;
    const RewritePattern& dst = move.forward ? rule.rhs : rule.lhs;
    const std::int64_t m = tensor.dims.angle_modulus;
    if (!pattern_fits(rule, tensor.dims, move.orient, move.t, move.qx, move.qy)) throw StaleBinding();
    if (move.binding.vars.size() != rule.vars.size() && rule.kind != RuleKind::Euler) throw StaleBinding();

    Patch patch;
    for (int s = 0; s < src.steps; ++s) {
        for (int w = 0; w < src.wires; ++w) {
            const QubitCoord q = wire_coord(move.qx, move.qy, w, move.orient);
            const GateToken& have = tensor.at(static_cast<int>(move.t) + s, q);
            auto want = cell_token(src.at(s, w), rule, move.binding, m, move.orient);
            if (!want || have != *want) throw StaleBinding();
            auto after = cell_token(dst.at(s, w), rule, move.binding, m, move.orient);
            if (!after) throw StaleBinding();
            if (have != *after) {
                patch.push_back(SitePatch{static_cast<int>(move.t) + s, q, have, *after});
            }
        }
    }
    return patch;
}

CircuitTensor apply_at(const RuleSet& rs, const CircuitTensor& tensor, const Move& move) {
    const Patch patch = make_patch(rs, tensor, move);
    CircuitTensor out = tensor;
    apply_patch(out, patch);
    return out;
}

std::vector<Move> enumerate_moves(const RuleSet& rs, const CircuitTensor& tensor) {
    std::vector<Move> moves;
    const LatticeDims& dims = tensor.dims;
    for (int r = 0; r < static_cast<int>(rs.rules.size()); ++r) {
        const Rule& rule = rs.rules[static_cast<std::size_t>(r)];
        const auto [t_lo, t_hi] = anchor_time_range(rule, dims);
        for (bool forward : {true, false}) {
            for (PartnerDir orient : {PartnerDir::PlusX, PartnerDir::PlusY}) {
                if (rule.wires() == 1 && orient != PartnerDir::PlusX) continue;
                if (orient == PartnerDir::PlusY && dims.rank() < 2) continue;
                for (std::int64_t t = t_lo; t <= t_hi; ++t) {
                    for (int qy = 0; qy < dims.extent_y(); ++qy) {
                        for (int qx = 0; qx < dims.extent_x(); ++qx) {
                            if (!pattern_fits(rule, dims, orient, t, qx, qy)) continue;
                            for (Binding& b : matches_at(rule, forward, tensor, t, qx, qy, orient)) {
                                Move mv;
                                mv.rule = r;
                                mv.forward = forward;
                                mv.orient = orient;
                                mv.t = t;
                                mv.qx = qx;
                                mv.qy = qy;
                                mv.binding = std::move(b);
                                moves.push_back(std::move(mv));
                            }
                        }
                    }
                }
            }
        }
    }
    return moves;
}

RuleSet parse_ruleset(std::string_view text) {
    Cursor cur;
    {
        int lineno = 1;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto nl = text.find('\n', start);
            std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
            if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
            const std::string stripped = strip(raw);
            if (!stripped.empty()) cur.lines.emplace_back(lineno, stripped);
            if (nl == std::string_view::npos) break;
            start = nl + 1;
            ++lineno;
        }
    }
    if (cur.done()) throw ParseError(1, "empty rule file");
    if (first_word(cur.text()) != "ruleset") throw ParseError(cur.lineno(), "expected 'ruleset <name>'");

    RuleSet rs;
    rs.name = rest_after_word(cur.text());
    if (rs.name.empty()) throw ParseError(cur.lineno(), "ruleset needs a name");
    ++cur.pos;

    while (!cur.done()) {
        if (first_word(cur.text()) != "rule") throw ParseError(cur.lineno(), "expected 'rule <name>'");
        Rule rule;
        rule.name = rest_after_word(cur.text());
        if (rule.name.empty()) throw ParseError(cur.lineno(), "rule needs a name");
        for (const Rule& prev : rs.rules) {
            if (prev.name == rule.name) throw ParseError(cur.lineno(), "duplicate rule name '" + rule.name + "'");
        }
        ++cur.pos;

        // header clauses
        while (!cur.done()) {
            const std::string word = first_word(cur.text());
            if (word == "kind") {
                if (rest_after_word(cur.text()) != "euler")
                    throw ParseError(cur.lineno(), "unknown rule kind '" + rest_after_word(cur.text()) + "'");
                rule.kind = RuleKind::Euler;
                ++cur.pos;
            } else if (word == "delta") {
                std::stringstream ss(rest_after_word(cur.text()));
                std::string item;
                while (std::getline(ss, item, ',')) {
                    auto v = parse_rational_pi(strip(item));
                    if (!v) throw ParseError(cur.lineno(), "bad delta value '" + strip(item) + "'");
                    rule.delta.push_back(*v);
                }
                if (rule.delta.empty()) throw ParseError(cur.lineno(), "empty delta list");
                ++cur.pos;
            } else if (word == "window") {
                std::stringstream ss(rest_after_word(cur.text()));
                TimeWindow w;
                if (!(ss >> w.lo >> w.hi)) throw ParseError(cur.lineno(), "window needs two integers");
                std::string extra;
                if (ss >> extra) throw ParseError(cur.lineno(), "window takes exactly two integers");
                rule.window = w;
                ++cur.pos;
            } else {
                break;
            }
        }

        auto read_pattern = [&cur, &rule](const char* keyword) {
            if (cur.done() || cur.text() != keyword)
                throw ParseError(cur.lineno(), std::string("expected '") + keyword + "'");
            ++cur.pos;
            RewritePattern pat;
            std::vector<PatternCell> cells;
            while (!cur.done()) {
                const std::string word = first_word(cur.text());
                if (word == "rule" || word == "rhs" || word == "lhs" || word == "ruleset") break;
                const auto row = parse_row(cur.text(), rule, cur.lineno());
                if (pat.steps == 0) {
                    pat.wires = static_cast<int>(row.size());
                } else if (static_cast<int>(row.size()) != pat.wires) {
                    throw ParseError(cur.lineno(), "inconsistent wire count in rule '" + rule.name + "'");
                }
                cells.insert(cells.end(), row.begin(), row.end());
                ++pat.steps;
                ++cur.pos;
            }
            if (pat.steps == 0) throw ParseError(cur.lineno(), std::string(keyword) + " pattern has no rows");
            pat.cells = std::move(cells);
            return pat;
        };

        const int header_line = cur.lineno();
        rule.lhs = read_pattern("lhs");
        rule.rhs = read_pattern("rhs");
        finalize_rule(rule, header_line);
        rs.rules.push_back(std::move(rule));
    }
    if (rs.rules.empty()) throw ParseError(cur.lineno(), "ruleset has no rules");
    return rs;
}

std::string format_ruleset(const RuleSet& rs) {
    std::string out = "ruleset " + rs.name + "\n";
    for (const Rule& rule : rs.rules) {
        out += "\nrule " + rule.name + "\n";
        if (rule.kind == RuleKind::Euler) out += "kind euler\n";
        if (!rule.delta.empty()) {
            out += "delta ";
            for (std::size_t i = 0; i < rule.delta.size(); ++i) {
                if (i > 0) out += ", ";
                out += format_rational(rule.delta[i]);
            }
            out += "\n";
        }
        if (rule.window) {
            out += "window " + std::to_string(rule.window->lo) + " " + std::to_string(rule.window->hi) + "\n";
        }
        for (const auto* pat : {&rule.lhs, &rule.rhs}) {
            out += pat == &rule.lhs ? "lhs\n" : "rhs\n";
            for (int s = 0; s < pat->steps; ++s) {
                out += " ";
                for (int w = 0; w < pat->wires; ++w) {
                    out += w == 0 ? " " : " | ";
                    out += format_cell(pat->at(s, w), rule);
                }
                out += "\n";
            }
        }
    }
    return out;
}

ValidationResult validate_rule(const Rule& rule, std::int64_t m) {
    ValidationResult res;
    if (rule.kind == RuleKind::Euler) {
        const double space = std::pow(static_cast<double>(m), 3.0);
        if (space <= static_cast<double>(kFullEnumLimit)) {
            for (std::int64_t ka = 0; ka < m; ++ka) {
                for (std::int64_t kb = 0; kb < m; ++kb) {
                    for (std::int64_t kc = 0; kc < m; ++kc) {
                        auto b = euler_binding(ka, kb, kc, m);
                        if (!b) continue;
                        if (check_binding(rule, *b, m, res.max_deficit)) ++res.bindings_checked;
                    }
                }
            }
        } else {
            res.sampled = true;
            Rng rng(derive_seed(0x72756c65, fnv1a(rule.name)));
            for (int i = 0; i < kSampleCount * 16 && res.bindings_checked < kSampleCount; ++i) {
                auto b = euler_binding(static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(m))),
                                       static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(m))),
                                       static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(m))), m);
                if (!b) continue;
                if (check_binding(rule, *b, m, res.max_deficit)) ++res.bindings_checked;
            }
            // Random triples are mostly non-canonical; sweep the gimbal
            // families so the sample is never empty.
            for (std::int64_t k = 0; k < m && res.bindings_checked < kSampleCount; ++k) {
                for (auto [kb, kc] : {std::pair<std::int64_t, std::int64_t>{0, 0}, {m / 2, 0}}) {
                    auto b = euler_binding(k, kb, kc, m);
                    if (b && check_binding(rule, *b, m, res.max_deficit)) ++res.bindings_checked;
                }
            }
        }
        res.pass = res.bindings_checked > 0 && res.max_deficit <= kRuleTol;
        return res;
    }

    const int n_delta = rule.delta.empty() ? 1 : static_cast<int>(rule.delta.size());
    const auto n_vars = rule.vars.size();
    double space = static_cast<double>(n_delta);
    for (std::size_t i = 0; i < n_vars; ++i) space *= static_cast<double>(m);

    auto try_binding = [&](Binding& b) {
        if (check_binding(rule, b, m, res.max_deficit)) ++res.bindings_checked;
    };

    if (space <= static_cast<double>(kFullEnumLimit)) {
        Binding b;
        b.vars.assign(n_vars, 0);
        for (int di = 0; di < n_delta; ++di) {
            b.delta_index = rule.delta.empty() ? -1 : di;
            std::fill(b.vars.begin(), b.vars.end(), 0);
            while (true) {
                try_binding(b);
                std::size_t pos = 0;
                while (pos < n_vars) {
                    if (++b.vars[pos] < m) break;
                    b.vars[pos] = 0;
                    ++pos;
                }
                if (pos == n_vars || n_vars == 0) break;
            }
        }
    } else {
        res.sampled = true;
        Rng rng(derive_seed(0x72756c65, fnv1a(rule.name)));
        for (int i = 0; i < kSampleCount; ++i) {
            Binding b;
            b.delta_index = rule.delta.empty() ? -1 : static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_delta)));
            b.vars.resize(n_vars);
            for (auto& v : b.vars) v = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(m)));
            try_binding(b);
        }
    }
    res.pass = res.bindings_checked > 0 && res.max_deficit <= kRuleTol;
    return res;
}

void validate_ruleset(const RuleSet& rs, std::int64_t m) {
    for (const Rule& rule : rs.rules) {
        const ValidationResult r = validate_rule(rule, m);
        if (!r.pass) throw RuleValidationFailed(rule.name, r.bindings_checked == 0 ? -1.0 : r.max_deficit);
    }
}

std::int64_t natural_modulus(const RuleSet& rs) {
    std::vector<Rational> constants;
    for (const Rule& rule : rs.rules) {
        for (const Rational& d : rule.delta) constants.push_back(d);
        for (const RewritePattern* pat : {&rule.lhs, &rule.rhs}) {
            for (const PatternCell& c : pat->cells) constants.push_back(c.expr.constant);
        }
    }
    for (std::int64_t m = 2; m <= (std::int64_t{1} << 20); m *= 2) {
        bool ok = true;
        for (const Rational& c : constants) {
            if (!rational_grid_offset(c, m)) {
                ok = false;
                break;
            }
        }
        if (ok) return m;
    }
    throw std::runtime_error("ruleset '" + rs.name + "' has no power-of-two modulus up to 2^20");
}

RuleSet read_ruleset(const std::string& name_or_path) {
    std::string text;
    const std::string asset_name = "rules/" + name_or_path + ".rules";
    if (assets::contains(asset_name)) {
        text = std::string(assets::find(asset_name));
    } else {
        std::ifstream in(name_or_path, std::ios::binary);
        if (!in) throw std::runtime_error("no builtin ruleset or readable file named '" + name_or_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_ruleset(text);
}

RuleSet load_ruleset(const std::string& name_or_path) {
    RuleSet rs = read_ruleset(name_or_path);
    validate_ruleset(rs, natural_modulus(rs));
    return rs;
}

} // namespace latq
