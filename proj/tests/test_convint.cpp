#include <dci/convint.hpp>
#include <dci/counterexample.hpp>

#include <doctest.h>

using namespace dci;

namespace {
StageParams params_from_data(const CounterexampleData& data, std::uint64_t seed = 9) {
    StageParams sp;
    std::vector<FMat> ordered;
    for (int ix : data.orderings[0]) ordered.push_back(to_float(data.x[ix - 1]));
    auto res = detect_tn(ordered, seed, 32);
    REQUIRE(res);
    sp.witness = res->config;
    sp.targets = ordered;
    return sp;
}
} // namespace

TEST_CASE("initial placement") {
    auto data = load_builtin();
    auto sp = params_from_data(data);
    // barycenter: accepted as a loop point
    CHECK(classify_start(sp.witness.p, sp));
    auto m0 = initial_map(sp.witness.p, sp);
    CHECK(m0.cells.size() == static_cast<std::size_t>(2 * sp.grid * sp.grid));
    CHECK(std::abs(m0.total_area() - 1.0) < 1e-12);

    // exact target: accepted as a fixed point
    auto place = classify_start(sp.targets[0], sp);
    REQUIRE(place);
    CHECK(place->kind == InitialPlacement::Kind::target);
    auto mt = initial_map(sp.targets[0], sp);
    auto mt6 = refine(mt, sp, 6);
    CHECK(mt6.cells.size() == mt.cells.size()); // leaves stay put

    // far away: rejected with a diagnostic
    FMat far(2, 2);
    far(0, 0) = 1e3;
    CHECK_FALSE(classify_start(far, sp));
    CHECK_THROWS_AS(initial_map(far, sp), std::invalid_argument);
}

TEST_CASE("zero stages is the identity") {
    auto data = load_builtin();
    auto sp = params_from_data(data);
    auto m0 = initial_map(sp.witness.p, sp);
    auto same = refine(m0, sp, 0);
    CHECK(same.cells.size() == m0.cells.size());
    CHECK(same.depth == m0.depth);
}

TEST_CASE("refinement structure and metrics") {
    auto data = load_builtin();
    auto sp = params_from_data(data);
    auto m0 = initial_map(sp.witness.p, sp);

    auto m2 = refine(m0, sp, 2);
    auto a2 = analyze(m2, sp.targets, 2);
    auto m6 = refine(m2, sp, 4);
    CHECK(m6.depth == 6);
    auto a6 = analyze(m6, sp.targets, 2);

    // budget
    CHECK(m6.cells.size() <= sp.max_cells);
    // partition bookkeeping
    CHECK(std::abs(a2.fraction_sum - 1.0) <= 1e-12);
    CHECK(std::abs(a6.fraction_sum - 1.0) <= 1e-12);
    // exact continuity and boundary trace
    CHECK(a6.max_tangential_jump <= 1e-12 * 10);
    CHECK(a6.max_edge_value_jump <= 1e-12);
    CHECK(a6.boundary_defect <= 1e-12);
    // target-anchored cells approach the targets by the schedule
    CHECK(a6.sup_leaf <= 0.25 * a2.sup_leaf);
    CHECK(a6.l1_all <= 0.5 * a2.l1_all);
    // most of the area is anchored
    CHECK(a6.leaf_mass > 0.9);
    // oscillation: every coarse dyadic square sees at least four targets
    CHECK(a2.min_distinct_targets >= 4);
    CHECK(a6.min_distinct_targets >= 4);
    // monotone progress across depths
    double prev = 1e300;
    for (int d = 1; d <= 6; ++d) {
        auto md = refine(m0, sp, d);
        auto ad = analyze(md, sp.targets, 1);
        CHECK(ad.sup_leaf <= prev + 1e-12);
        prev = ad.sup_leaf;
    }
}

TEST_CASE("leaf fractions approach the barycentric weights") {
    auto data = load_builtin();
    auto sp = params_from_data(data);
    auto m0 = initial_map(sp.witness.p, sp);
    auto m1 = refine(m0, sp, 1);
    auto a1 = analyze(m1, sp.targets, 1);
    auto dv = defining_vector(sp.witness.k);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a1.fractions[i] - dv.lambda[i]) < 0.05);
}

TEST_CASE("lifted stack stays near the lifted points") {
    auto data = load_builtin();
    auto sp = params_from_data(data);
    auto m0 = initial_map(sp.witness.p, sp);
    auto m4 = refine(m0, sp, 4);
    std::array<FMat, 4> lift{to_float(data.lift_a), to_float(data.lift_b), to_float(data.lift_c),
                             to_float(data.lift_d)};
    std::vector<FMat> lifted;
    for (int ix : data.orderings[0]) lifted.push_back(to_float(data.a[ix - 1]));
    auto rep = analyze(m4, sp.targets, 2, lift, &lifted);
    // operator norm of the lift rows bounds the stacked distance
    double op = 1 + frob_norm(lift[0]) + frob_norm(lift[2]);
    CHECK(rep.lift_sup <= op * rep.sup_all + 1e-9);
    CHECK(rep.lift_sup > 0);
}
