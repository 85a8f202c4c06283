#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "latq/generators.hpp"
#include "latq/io.hpp"
#include "latq/lattice.hpp"
#include "latq/rng.hpp"
#include "latq/rules.hpp"
#include "latq/unitary.hpp"

using namespace latq;

namespace {

const char* kTwoLevelRules =
    "ruleset two-level\n"
    "rule rz-defer\n"
    "lhs\n"
    "RZ(a) | .\n"
    ". | H\n"
    "rhs\n"
    ". | .\n"
    "RZ(a) | H\n";

CircuitTensor two_level_input() {
    CircuitTensor input = CircuitTensor::all_idle(LatticeDims{2, {2}, 2});
    input.at(0, {0, 0}) = single_token(GateKind::RZ, 1);
    input.at(1, {1, 0}) = single_token(GateKind::H);
    return input;
}

std::string temp_rule_file(const std::string& text) {
    const std::filesystem::path p =
        std::filesystem::temp_directory_path() / "latq-test-ruleset.rules";
    std::ofstream out(p);
    out << text;
    out.close();
    return p.string();
}

} // namespace

TEST_CASE("rational construction reduces and normalizes") {
    CHECK(make_rational(2, 4) == Rational{1, 2});
    CHECK(make_rational(-2, -4) == Rational{1, 2});
    CHECK(make_rational(1, -2) == Rational{-1, 2});
    CHECK(make_rational(0, 7) == Rational{0, 1});
    CHECK_THROWS(make_rational(1, 0));
}

TEST_CASE("rational grid offsets") {
    // num * m / (2 den) when integral
    CHECK(rational_grid_offset(make_rational(1, 1), 16) == 8);  // pi
    CHECK(rational_grid_offset(make_rational(1, 2), 16) == 4);  // pi/2
    CHECK(rational_grid_offset(make_rational(-1, 4), 16) == -2);
    CHECK(rational_grid_offset(make_rational(1, 1), 2) == 1);
    CHECK_FALSE(rational_grid_offset(make_rational(1, 3), 16).has_value());
    CHECK_FALSE(rational_grid_offset(make_rational(1, 2), 2).has_value());
}

TEST_CASE("shipped rule libraries parse, format and validate") {
    struct Expect {
        const char* name;
        std::size_t rules;
        std::int64_t modulus;
    };
    for (const Expect& e : {Expect{"qft", 8, 2}, Expect{"ths", 22, 16},
                            Expect{"example1", 11, 2}, Expect{"example1-qa", 4, 2}}) {
        const RuleSet rs = read_ruleset(e.name);
        CHECK(rs.rules.size() == e.rules);
        CHECK(natural_modulus(rs) == e.modulus);
        CHECK_NOTHROW(validate_ruleset(rs, natural_modulus(rs)));
    }
}

TEST_CASE("rule files round trip byte exactly through parse and format") {
    for (const char* name : {"qft", "ths", "example1", "example1-qa"}) {
        const RuleSet rs = read_ruleset(name);
        const std::string text = format_ruleset(rs);
        CHECK(format_ruleset(parse_ruleset(text)) == text);
    }
}

TEST_CASE("parser diagnostics carry line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            parse_ruleset(text);
        } catch (const ParseError& e) {
            return e.line;
        }
        return -1;
    };
    CHECK(line_of("bogus\n") == 1);
    CHECK(line_of("ruleset x\nrule r\nnonsense\n") == 3);
    // lhs and rhs extents must agree
    CHECK(line_of("ruleset x\nrule r\nlhs\nH\nrhs\nH | H\n") > 0);
    // delta used but never declared
    CHECK(line_of("ruleset x\nrule r\nlhs\nRZ(a)\nrhs\nRZ(a+D)\n") > 0);
    // unknown cell
    CHECK(line_of("ruleset x\nrule r\nlhs\nQQ\nrhs\n.\n") == 4);
    // busy without a control
    CHECK(line_of("ruleset x\nrule r\nlhs\nBUSY | .\nrhs\n. | .\n") > 0);
    CHECK_THROWS_AS(parse_ruleset("ruleset x\nrule r\nlhs\nH\nrhs\n"), ParseError);
}

TEST_CASE("comments and blank lines are accepted") {
    const std::string text =
        "# leading comment\n"
        "ruleset c\n"
        "\n"
        "rule r # trailing comment\n"
        "lhs\n"
        "H\nH\n"
        "rhs\n"
        ".\n.\n";
    const RuleSet rs = parse_ruleset(text);
    REQUIRE(rs.rules.size() == 1);
    CHECK(rs.rules[0].lhs.steps == 2);
    CHECK(rs.rules[0].lhs.wires == 1);
}

TEST_CASE("load path validates, read path does not") {
    // H on the left, RZ(pi) on the right: parses fine, fails validation
    const std::string bad =
        "ruleset broken\n"
        "rule not-equal\n"
        "lhs\nH\n"
        "rhs\nRZ(pi)\n";
    CHECK_NOTHROW(parse_ruleset(bad));
    const std::string path = temp_rule_file(bad);
    CHECK_NOTHROW(read_ruleset(path));
    CHECK_THROWS_AS(load_ruleset(path), RuleValidationFailed);
    try {
        load_ruleset(path);
    } catch (const RuleValidationFailed& e) {
        CHECK(e.rule == "not-equal");
        CHECK(e.deficit > 1e-9);
    }
    std::filesystem::remove(path);
}

TEST_CASE("validate rule reports binding counts") {
    const RuleSet rs = read_ruleset("ths");
    const Rule* euler = nullptr;
    for (const Rule& r : rs.rules) {
        const ValidationResult v = validate_rule(r, 16);
        CHECK(v.pass);
        CHECK(v.max_deficit <= 1e-9);
        CHECK(v.bindings_checked > 0);
        if (r.kind == RuleKind::Euler) euler = &r;
    }
    // a finer grid pushes the euler binding space over the exhaustive cap
    REQUIRE(euler != nullptr);
    const ValidationResult wide = validate_rule(*euler, 32);
    CHECK(wide.pass);
    CHECK(wide.sampled);
    CHECK(wide.bindings_checked == 256);
}

TEST_CASE("two level instance has exactly one move each way") {
    const RuleSet rs = parse_ruleset(kTwoLevelRules);
    const CircuitTensor a = two_level_input();

    std::vector<Move> moves = enumerate_moves(rs, a);
    REQUIRE(moves.size() == 1);
    CHECK(moves[0].forward);
    CHECK(moves[0].t == 0);
    CHECK(moves[0].qx == 0);
    CHECK(moves[0].binding.vars == std::vector<std::int64_t>{1});

    const CircuitTensor b = apply_at(rs, a, moves[0]);
    CHECK(b.at(1, {0, 0}).kind == GateKind::RZ);
    CHECK(b.at(0, {0, 0}).kind == GateKind::Idle);
    CHECK(validate(b).empty());

    std::vector<Move> back = enumerate_moves(rs, b);
    REQUIRE(back.size() == 1);
    CHECK_FALSE(back[0].forward);
    CHECK(apply_at(rs, b, back[0]) == a);
}

TEST_CASE("reversed moves undo exactly") {
    const RuleSet rs = load_ruleset("example1");
    const CircuitTensor input = load_circuit("example1");
    const std::vector<Move> moves = enumerate_moves(rs, input);
    REQUIRE_FALSE(moves.empty());
    for (std::size_t i = 0; i < std::min<std::size_t>(moves.size(), 40); ++i) {
        const CircuitTensor next = apply_at(rs, input, moves[i]);
        CHECK(validate(next).empty());
        CHECK(apply_at(rs, next, reversed(moves[i])) == input);
    }
}

TEST_CASE("enumerate moves is ordered and deterministic") {
    const RuleSet rs = load_ruleset("example1");
    const CircuitTensor input = load_circuit("example1");
    const std::vector<Move> a = enumerate_moves(rs, input);
    const std::vector<Move> b = enumerate_moves(rs, input);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].rule == b[i].rule);
        CHECK(a[i].t == b[i].t);
        CHECK(a[i].binding == b[i].binding);
    }
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].rule <= a[i].rule);
}

TEST_CASE("moves preserve the circuit unitary") {
    const RuleSet rs = load_ruleset("example1-qa");
    CircuitTensor state = load_circuit("example1-qa");
    const Eigen::MatrixXcd u0 = circuit_unitary(state);
    Rng rng(0x9A17);
    for (int applied = 0; applied < 60; ++applied) {
        const std::vector<Move> moves = enumerate_moves(rs, state);
        REQUIRE_FALSE(moves.empty());
        const Move& mv = moves[rng.uniform_int(static_cast<std::int64_t>(moves.size()))];
        state = apply_at(rs, state, mv);
        CHECK(validate(state).empty());
    }
    CHECK(phase_deficit(u0, circuit_unitary(state)) <= 1e-9);
}

TEST_CASE("stale bindings are detected") {
    const RuleSet rs = parse_ruleset(kTwoLevelRules);
    const CircuitTensor a = two_level_input();
    std::vector<Move> moves = enumerate_moves(rs, a);
    REQUIRE(moves.size() == 1);
    CircuitTensor mutated = a;
    mutated.at(0, {0, 0}) = idle_token(); // the bound RZ is gone
    CHECK_THROWS_AS(make_patch(rs, mutated, moves[0]), StaleBinding);
}

TEST_CASE("anchor windows restrict move anchors") {
    const std::string windowed =
        "ruleset w\n"
        "rule hop\n"
        "window 1 -2\n"
        "lhs\nRZ(a)\n.\n"
        "rhs\n.\nRZ(a)\n";
    const RuleSet rs = parse_ruleset(windowed);
    REQUIRE(rs.rules.size() == 1);
    REQUIRE(rs.rules[0].window.has_value());

    const LatticeDims dims{6, {1}, 2};
    // pattern needs two steps: raw anchors 0..4; window [1, -2] keeps 1..3
    const auto range = anchor_time_range(rs.rules[0], dims);
    CHECK(range.first == 1);
    CHECK(range.second == 3);

    CircuitTensor c = CircuitTensor::all_idle(dims);
    c.at(0, {0, 0}) = single_token(GateKind::RZ, 1);
    CHECK(enumerate_moves(rs, c).empty()); // anchor 0 is outside the window
    c.at(0, {0, 0}) = idle_token();
    c.at(1, {0, 0}) = single_token(GateKind::RZ, 1);
    // forward hop at anchor 1; the reverse hop would anchor at 0, outside
    CHECK(enumerate_moves(rs, c).size() == 1);
}

TEST_CASE("orientation instantiates patterns along either axis") {
    const std::string text =
        "ruleset o\n"
        "rule flip\n"
        "lhs\nH | H\n"
        "rhs\n. | .\n";
    const RuleSet rs = parse_ruleset(text);
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{1, {2, 2}, 2});
    c.at(0, {0, 0}) = single_token(GateKind::H);
    c.at(0, {0, 1}) = single_token(GateKind::H);
    // the H pair lies along +y; the reverse direction matches the idle
    // column and would insert a pair there
    const std::vector<Move> moves = enumerate_moves(rs, c);
    REQUIRE(moves.size() == 2);
    REQUIRE(moves[0].forward);
    CHECK(moves[0].orient == PartnerDir::PlusY);
    CHECK_FALSE(moves[1].forward);
    CHECK(moves[1].qx == 1);
    const CircuitTensor gone = apply_at(rs, c, moves[0]);
    CHECK(fully_idle_steps(gone).size() == 1);
}

TEST_CASE("delta rules bind each declared value") {
    // shift an angle by +-pi/8 at modulus 16: both deltas are admissible
    const std::string text =
        "ruleset d\n"
        "rule shift\n"
        "delta pi/8, -pi/8\n"
        "lhs\nRZ(a)\nRZ(b)\n"
        "rhs\nRZ(a+D)\nRZ(b-D)\n";
    const RuleSet rs = parse_ruleset(text);
    CHECK_NOTHROW(validate_ruleset(rs, 16));
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{2, {1}, 16});
    c.at(0, {0, 0}) = single_token(GateKind::RZ, 3);
    c.at(1, {0, 0}) = single_token(GateKind::RZ, 7);
    const std::vector<Move> moves = enumerate_moves(rs, c);
    // forward with delta index 0 and 1, reverse with delta index 0 and 1
    CHECK(moves.size() == 4);
    for (const Move& mv : moves) {
        const CircuitTensor next = apply_at(rs, c, mv);
        const std::int64_t a = next.at(0, {0, 0}).angle;
        const std::int64_t b = next.at(1, {0, 0}).angle;
        CHECK((a + b) % 16 == 10); // the shift conserves the angle sum
    }
}

TEST_CASE("euler rule rewrites single qubit runs") {
    const RuleSet rs = read_ruleset("ths");
    const Rule* euler = nullptr;
    for (const Rule& r : rs.rules)
        if (r.kind == RuleKind::Euler) euler = &r;
    REQUIRE(euler != nullptr);
    CHECK(euler->steps() == 3);

    // a quarter-turn middle angle keeps the converted triple on the grid
    CircuitTensor c = CircuitTensor::all_idle(LatticeDims{3, {2, 2}, 16});
    c.at(0, {0, 0}) = single_token(GateKind::RZ, 3);
    c.at(1, {0, 0}) = single_token(GateKind::RX, 4);
    c.at(2, {0, 0}) = single_token(GateKind::RZ, 4);
    const Eigen::MatrixXcd u0 = circuit_unitary(c);

    const std::vector<Binding> bindings =
        matches_at(*euler, true, c, 0, 0, 0, PartnerDir::PlusX);
    REQUIRE_FALSE(bindings.empty());
    Move mv;
    mv.rule = static_cast<int>(euler - rs.rules.data());
    mv.forward = true;
    mv.binding = bindings[0];
    const CircuitTensor next = apply_at(rs, c, mv);
    CHECK(validate(next).empty());
    // the xzx form starts with an RX layer
    CHECK(next.at(0, {0, 0}).kind == GateKind::RX);
    CHECK(phase_deficit(u0, circuit_unitary(next)) <= 1e-9);
}

TEST_CASE("pattern fits is purely geometric") {
    const RuleSet rs = parse_ruleset(kTwoLevelRules);
    const LatticeDims dims{2, {2}, 2};
    CHECK(pattern_fits(rs.rules[0], dims, PartnerDir::PlusX, 0, 0, 0));
    CHECK_FALSE(pattern_fits(rs.rules[0], dims, PartnerDir::PlusX, 1, 0, 0));
    CHECK_FALSE(pattern_fits(rs.rules[0], dims, PartnerDir::PlusX, 0, 1, 0));
    CHECK_FALSE(pattern_fits(rs.rules[0], dims, PartnerDir::PlusY, 0, 0, 0));
}

TEST_CASE("builtin name resolution and file fallback") {
    CHECK_NOTHROW(read_ruleset("qft"));
    CHECK_THROWS(read_ruleset("no-such-ruleset"));
    const std::string path = temp_rule_file(kTwoLevelRules);
    const RuleSet rs = read_ruleset(path);
    CHECK(rs.name == "two-level");
    std::filesystem::remove(path);
}
