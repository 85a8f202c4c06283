#include "doctest.h"

#include "latq/lattice.hpp"

using namespace latq;

namespace {

LatticeDims chain(int steps, int qubits, std::int64_t modulus = 16) {
    return LatticeDims{steps, {qubits}, modulus};
}

LatticeDims grid(int steps, int ex, int ey, std::int64_t modulus = 16) {
    return LatticeDims{steps, {ex, ey}, modulus};
}

} // namespace

TEST_CASE("dims validation") {
    CHECK_NOTHROW(check_dims(chain(1, 1, 2)));
    CHECK_NOTHROW(check_dims(grid(3, 2, 4)));

    auto code = [](const LatticeDims& d) {
        try {
            check_dims(d);
        } catch (const LatticeError& e) {
            return e.code;
        }
        return LatticeError::Code::BadToken;
    };
    CHECK(code(chain(0, 2)) == LatticeError::Code::BadDims);
    CHECK(code(chain(1, 0)) == LatticeError::Code::BadDims);
    CHECK(code(chain(1, 2, 0)) == LatticeError::Code::BadDims);
    CHECK(code(chain(1, 2, 3)) == LatticeError::Code::BadDims);
    CHECK(code(chain(1, 2, 6)) == LatticeError::Code::BadDims);
    CHECK(code(LatticeDims{1, {}, 2}) == LatticeError::Code::BadDims);
    CHECK(code(LatticeDims{1, {2, 2, 2}, 2}) == LatticeError::Code::BadDims);
    CHECK(code(grid(1, 2, 0)) == LatticeError::Code::BadDims);
}

TEST_CASE("dims accessors") {
    LatticeDims d = grid(5, 3, 4);
    CHECK(d.rank() == 2);
    CHECK(d.extent_x() == 3);
    CHECK(d.extent_y() == 4);
    CHECK(d.qubit_count() == 12);
    CHECK(d.site_count() == 60);

    LatticeDims c = chain(7, 4);
    CHECK(c.rank() == 1);
    CHECK(c.extent_y() == 1);
    CHECK(c.qubit_count() == 4);
}

TEST_CASE("token constructors enforce kind constraints") {
    CHECK(idle_token().kind == GateKind::Idle);
    CHECK(busy_token().kind == GateKind::Busy);
    CHECK(single_token(GateKind::RZ, 3).angle == 3);
    CHECK(single_token(GateKind::H).angle == 0);

    CHECK_THROWS_AS(single_token(GateKind::CZ), LatticeError);
    CHECK_THROWS_AS(single_token(GateKind::Busy), LatticeError);
    CHECK_THROWS_AS(single_token(GateKind::H, 1), LatticeError);
    CHECK_THROWS_AS(control_token(GateKind::H, PartnerDir::PlusX), LatticeError);
    CHECK_THROWS_AS(control_token(GateKind::CZ, PartnerDir::PlusX, 1), LatticeError);
    CHECK(control_token(GateKind::CP, PartnerDir::PlusY, 5).partner == PartnerDir::PlusY);
}

TEST_CASE("kind names round trip") {
    for (int i = 0; i < kGateKindCount; ++i) {
        const GateKind k = static_cast<GateKind>(i);
        auto back = kind_from_name(kind_name(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK(kind_from_name(".") == GateKind::Idle);
    CHECK_FALSE(kind_from_name("XX").has_value());
}

TEST_CASE("coordinate ordering is y-major") {
    CHECK(coord_less({1, 0}, {0, 1}));
    CHECK(coord_less({0, 0}, {1, 0}));
    CHECK_FALSE(coord_less({0, 1}, {2, 0}));
    CHECK_FALSE(coord_less({1, 1}, {1, 1}));
}

TEST_CASE("all idle tensor and site indexing") {
    CircuitTensor t = CircuitTensor::all_idle(grid(2, 3, 2));
    CHECK(t.sites.size() == 12);
    for (const GateToken& g : t.sites) CHECK(g == idle_token());
    CHECK(t.qubit_index({2, 1}) == 5);
    CHECK(t.site_index(1, {2, 1}) == 11);
    CHECK(t.in_bounds(1, {2, 1}));
    CHECK_FALSE(t.in_bounds(2, {0, 0}));
    CHECK_FALSE(t.in_bounds({3, 0}));
}

TEST_CASE("encode decode round trip with canonical control placement") {
    InstructionList prog;
    prog.push_back({GateKind::H, 0, 0, {0, 0}, {}});
    prog.push_back({GateKind::RZ, 7, 0, {1, 0}, {}});
    // partner named first: control still lands on the lower coordinate
    prog.push_back({GateKind::CZ, 0, 1, {1, 0}, QubitCoord{0, 0}});
    prog.push_back({GateKind::CP, 3, 2, {0, 0}, QubitCoord{0, 1}});
    CircuitTensor t = encode_instructions(prog, grid(3, 2, 2));

    CHECK(t.at(1, {0, 0}).kind == GateKind::CZ);
    CHECK(t.at(1, {0, 0}).partner == PartnerDir::PlusX);
    CHECK(t.at(1, {1, 0}).kind == GateKind::Busy);
    CHECK(t.at(2, {0, 0}).partner == PartnerDir::PlusY);
    CHECK(validate(t).empty());

    InstructionList out = decode_instructions(t);
    REQUIRE(out.size() == 4);
    CHECK(out[0].kind == GateKind::H);
    CHECK(out[1].kind == GateKind::RZ);
    CHECK(out[2].q == QubitCoord{0, 0});
    CHECK(out[2].q2 == QubitCoord{1, 0});
    CHECK(out[3].q2 == QubitCoord{0, 1});
    CHECK(encode_instructions(out, t.dims) == t);
}

TEST_CASE("encode rejects bad placements") {
    auto code = [](const InstructionList& prog, const LatticeDims& d) {
        try {
            encode_instructions(prog, d);
        } catch (const LatticeError& e) {
            return e.code;
        }
        return LatticeError::Code::BadToken;
    };
    CHECK(code({{GateKind::H, 0, 0, {4, 0}, {}}}, chain(1, 4)) == LatticeError::Code::OutOfBounds);
    CHECK(code({{GateKind::H, 0, 2, {0, 0}, {}}}, chain(1, 4)) == LatticeError::Code::OutOfBounds);
    // same site twice
    CHECK(code({{GateKind::H, 0, 0, {0, 0}, {}}, {GateKind::RX, 1, 0, {0, 0}, {}}}, chain(1, 4)) ==
          LatticeError::Code::SiteCollision);
    // overlapping two-qubit gates
    CHECK(code({{GateKind::CZ, 0, 0, {0, 0}, QubitCoord{1, 0}},
                {GateKind::CZ, 0, 0, {1, 0}, QubitCoord{2, 0}}},
               chain(1, 4)) == LatticeError::Code::SiteCollision);
    // distance two pair
    CHECK(code({{GateKind::CZ, 0, 0, {0, 0}, QubitCoord{2, 0}}}, chain(1, 4)) ==
          LatticeError::Code::NonAdjacentPair);
    // diagonal pair
    CHECK(code({{GateKind::CP, 1, 0, {0, 0}, QubitCoord{1, 1}}}, grid(1, 2, 2)) ==
          LatticeError::Code::NonAdjacentPair);
    // missing partner on a two-qubit kind
    CHECK(code({{GateKind::CZ, 0, 0, {0, 0}, {}}}, chain(1, 4)) == LatticeError::Code::BadToken);
}

TEST_CASE("validate finds structural violations") {
    CircuitTensor t = CircuitTensor::all_idle(chain(2, 3, 4));
    CHECK(validate(t).empty());

    SUBCASE("unclaimed busy") {
        t.at(0, {1, 0}) = busy_token();
        REQUIRE_FALSE(validate(t).empty());
        CHECK_THROWS_AS(require_valid(t), LatticeError);
    }
    SUBCASE("angle out of range") {
        t.at(0, {0, 0}) = GateToken{GateKind::RZ, 4, PartnerDir::PlusX};
        CHECK_FALSE(validate(t).empty());
    }
    SUBCASE("negative angle") {
        t.at(0, {0, 0}) = GateToken{GateKind::RZ, -1, PartnerDir::PlusX};
        CHECK_FALSE(validate(t).empty());
    }
    SUBCASE("angle on a fixed gate") {
        t.at(0, {0, 0}) = GateToken{GateKind::H, 1, PartnerDir::PlusX};
        CHECK_FALSE(validate(t).empty());
    }
    SUBCASE("control without busy partner") {
        t.at(0, {0, 0}) = control_token(GateKind::CZ, PartnerDir::PlusX);
        CHECK_FALSE(validate(t).empty());
    }
    SUBCASE("control partner leaves the lattice") {
        t.at(0, {2, 0}) = control_token(GateKind::CZ, PartnerDir::PlusX);
        CHECK_FALSE(validate(t).empty());
    }
    SUBCASE("chain has no +y partners") {
        t.at(0, {0, 0}) = control_token(GateKind::CZ, PartnerDir::PlusY);
        CHECK_FALSE(validate(t).empty());
    }
    SUBCASE("busy claimed twice") {
        CircuitTensor g = CircuitTensor::all_idle(grid(1, 2, 2));
        g.at(0, {0, 1}) = control_token(GateKind::CZ, PartnerDir::PlusX);
        g.at(0, {1, 0}) = control_token(GateKind::CZ, PartnerDir::PlusY);
        g.at(0, {1, 1}) = busy_token();
        CHECK_FALSE(validate(g).empty());
    }
}

TEST_CASE("step helpers") {
    CircuitTensor t = CircuitTensor::all_idle(chain(4, 3, 4));
    t.at(1, {2, 0}) = single_token(GateKind::H);
    t.at(1, {0, 0}) = single_token(GateKind::RZ, 1);
    t.at(3, {0, 0}) = control_token(GateKind::CZ, PartnerDir::PlusX);
    t.at(3, {1, 0}) = busy_token();

    InstructionList step1 = gates_at_step(t, 1);
    REQUIRE(step1.size() == 2);
    CHECK(step1[0].q == QubitCoord{0, 0});
    CHECK(step1[1].q == QubitCoord{2, 0});

    CHECK(gates_at_step(t, 0).empty());
    CHECK(fully_idle_steps(t) == std::vector<int>{0, 2});

    CHECK(partner_coord(t, {0, 0}, PartnerDir::PlusX) == QubitCoord{1, 0});
    CHECK_FALSE(partner_coord(t, {2, 0}, PartnerDir::PlusX).has_value());
    CHECK_FALSE(partner_coord(t, {0, 0}, PartnerDir::PlusY).has_value());
}
