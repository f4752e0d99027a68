#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dynframe/data.hpp"
#include "dynframe/rng.hpp"
#include "oracles.hpp"

using namespace dynframe;

namespace {

Mat3 random_rotation(Rng& rng) {
    Vec3 axis = normalized(Vec3{rng.normal(), rng.normal(), rng.normal()});
    double t = rng.uniform(0, 6.283185307179586);
    double c = std::cos(t), s = std::sin(t), m = 1 - c;
    return Mat3{Vec3{c + axis[0] * axis[0] * m, axis[0] * axis[1] * m - axis[2] * s,
                     axis[0] * axis[2] * m + axis[1] * s},
                Vec3{axis[1] * axis[0] * m + axis[2] * s, c + axis[1] * axis[1] * m,
                     axis[1] * axis[2] * m - axis[0] * s},
                Vec3{axis[2] * axis[0] * m - axis[1] * s, axis[2] * axis[1] * m + axis[0] * s,
                     c + axis[2] * axis[2] * m}};
}

}  // namespace

TEST_CASE("empty dataset and malformed lines") {
    {
        std::ofstream f("empty.jsonl");
    }
    CHECK(load_dataset("empty.jsonl").empty());
    std::remove("empty.jsonl");

    {
        std::ofstream f("bad.jsonl");
        f << "{\"id\": \"ok\", \"lattice\": [4,0,0,0,4,0,0,0,4], \"species\": [6], "
             "\"positions\": [[0,0,0]], \"coords_kind\": \"cartesian\", \"target\": 1.0}\n";
        f << "this is not json\n";
    }
    bool threw = false;
    try {
        load_dataset("bad.jsonl");
    } catch (const DataError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(threw);
    std::remove("bad.jsonl");
}

TEST_CASE("fractional coordinates convert on load") {
    {
        std::ofstream f("frac.jsonl");
        f << "{\"id\": \"f\", \"lattice\": [4,0,0,0,4,0,0,0,4], \"species\": [6], "
             "\"positions\": [[0.5,0.5,0.5]], \"coords_kind\": \"fractional\", \"target\": 0.5}\n";
    }
    auto recs = load_dataset("frac.jsonl");
    REQUIRE(recs.size() == 1);
    auto s = recs[0].structure();
    CHECK(s.positions[0][0] == doctest::Approx(2.0));
    CHECK(s.positions[0][1] == doctest::Approx(2.0));
    CHECK(s.positions[0][2] == doctest::Approx(2.0));
    std::remove("frac.jsonl");
}

TEST_CASE("write then load round trips every numeric field bit-exactly") {
    auto recs = gen_synthetic(24, 99);
    save_dataset("rt.jsonl", recs);
    auto back = load_dataset("rt.jsonl");
    REQUIRE(back.size() == recs.size());
    for (size_t k = 0; k < recs.size(); ++k) {
        CHECK(back[k].id == recs[k].id);
        CHECK(back[k].lattice == recs[k].lattice);
        CHECK(back[k].species == recs[k].species);
        CHECK(back[k].target == recs[k].target);
        REQUIRE(back[k].positions.size() == recs[k].positions.size());
        for (size_t i = 0; i < recs[k].positions.size(); ++i)
            for (int c = 0; c < 3; ++c)
                CHECK(back[k].positions[i][c] == recs[k].positions[i][c]);
        REQUIRE(back[k].occupancies.size() == recs[k].occupancies.size());
        for (size_t i = 0; i < recs[k].occupancies.size(); ++i)
            CHECK(back[k].occupancies[i].probs == recs[k].occupancies[i].probs);
    }
    std::remove("rt.jsonl");
}

TEST_CASE("splits are deterministic, disjoint, exhaustive") {
    SplitSpec spec{0.8, 0.1, 0.1, 7};
    auto a = split(10, spec);
    CHECK(a.train.size() == 8);
    CHECK(a.val.size() == 1);
    CHECK(a.test.size() == 1);
    auto b = split(10, spec);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);

    std::vector<bool> seen(10, false);
    for (auto* part : {&a.train, &a.val, &a.test})
        for (int i : *part) {
            CHECK_FALSE(seen[size_t(i)]);
            seen[size_t(i)] = true;
        }
    for (bool s : seen) CHECK(s);

    auto all = split(10, SplitSpec{1.0, 0.0, 0.0, 3});
    CHECK(all.train.size() == 10);
    CHECK(all.val.empty());

    CHECK_THROWS_AS(split(10, SplitSpec{0.5, 0.1, 0.1, 3}), DataError);
}

TEST_CASE("synthetic dataset determinism and validity") {
    auto a = gen_synthetic(16, 5);
    auto b = gen_synthetic(16, 5);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].target == b[k].target);
        CHECK(a[k].positions == b[k].positions);
        CHECK(std::isfinite(a[k].target));
        auto s = a[k].structure();
        CHECK(s.natoms() >= 2);
        CHECK(s.natoms() <= 8);
        s.validate();
    }
    int occ = 0;
    auto big = gen_synthetic(120, 31);
    for (const auto& r : big) occ += r.occupancies.empty() ? 0 : 1;
    CHECK(occ > 2);  // site-mixed records do occur
}

TEST_CASE("synthetic target agrees with the direct-loop oracle") {
    auto recs = gen_synthetic(24, 11);
    for (const auto& r : recs) {
        auto s = r.structure();
        double direct = oracle::synthetic_target_direct(s, 4);
        CHECK(std::abs(direct - r.target) < 1e-10);
    }
}

TEST_CASE("synthetic target is invariant to rigid motion and supercells") {
    Rng rng(13);
    auto recs = gen_synthetic(12, 17);
    for (const auto& r : recs) {
        auto s = r.structure();
        double base = synthetic_target(s);
        CHECK(std::abs(base - r.target) < 1e-12);

        auto moved = rigid_transform(s, random_rotation(rng),
                                     {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
        CHECK(std::abs(synthetic_target(moved) - base) < 1e-10);

        auto sc = make_supercell(s, 2, 1, 1);
        CHECK(std::abs(synthetic_target(sc) - base) < 1e-10);
    }
}
