#include <dci/matrix.hpp>
#include <dci/synth.hpp>

#include <doctest.h>

#include <random>

using namespace dci;

namespace {
RMat rmat(std::initializer_list<std::initializer_list<long>> rows) {
    RMat m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (long v : r) m(i, j++) = Rational(v);
        ++i;
    }
    return m;
}

RMat random_rmat(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    RMat a(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) a(i, j) = synth::random_rational(rng, -5, 5, 4);
    return a;
}
} // namespace

TEST_CASE("rational string round trip") {
    Rational r = rational_from_string("-6/4");
    CHECK(to_string(r) == "-3/2");
    CHECK(to_string(rational_from_string("7")) == "7");
    CHECK(to_double(r) == -1.5);
    CHECK_THROWS(rational_from_string("1/-2"));
}

TEST_CASE("minor extraction") {
    RMat m = rmat({{1, 2}, {3, 4}, {5, 6}});
    MultiIndexPair z{{0, 1}, {0, 1}};
    CHECK(minor_matrix(m, z) == rmat({{1, 2}, {3, 4}}));

    RMat x1{{Rational(8, 5), Rational(-2)}, {Rational(-2), Rational(8, 5)}};
    CHECK(minor_matrix(x1, z) == x1);

    RMat d = rmat({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
    MultiIndexPair z2{{0, 2}, {0, 2}};
    CHECK(minor_matrix(d, z2) == rmat({{1, 0}, {0, 3}}));

    MultiIndexPair bad{{0, 5}, {0, 1}};
    CHECK_THROWS_AS(minor_matrix(m, bad), std::out_of_range);
}

TEST_CASE("minor of a minor composes") {
    std::mt19937_64 rng(11);
    RMat m = random_rmat(rng, 5, 5);
    MultiIndexPair z1{{0, 2, 3, 4}, {1, 2, 3, 4}};
    MultiIndexPair z2{{1, 2}, {0, 3}};
    CHECK(minor_matrix(minor_matrix(m, z1), z2) == minor_matrix(m, z1.composed_with(z2)));
}

TEST_CASE("adjugate identity") {
    CHECK(adjugate(RMat::identity(2)) == RMat::identity(2));
    RMat a = rmat({{1, 2}, {3, 4}});
    CHECK(adjugate(a) == rmat({{4, -2}, {-3, 1}}));
    CHECK(adjugate(a) * a == det(a) * RMat::identity(2));
    CHECK(det(a) == Rational(-2));
    CHECK(adjugate(rmat({{2}})) == rmat({{1}}));

    std::mt19937_64 rng(5);
    for (std::size_t n = 1; n <= 5; ++n) {
        for (int t = 0; t < 20; ++t) {
            RMat m = random_rmat(rng, n, n);
            RMat lhs = adjugate(m) * m;
            RMat rhs = det(m) * RMat::identity(n);
            CHECK(lhs == rhs);
            CHECK(m * adjugate(m) == rhs);
        }
    }
}

TEST_CASE("determinant under rank-one update") {
    RMat i2 = RMat::identity(2);
    RMat e11 = rmat({{1, 0}, {0, 0}});
    CHECK(det_rank_one_update(i2, e11) == Rational(2));

    RMat a = rmat({{1, 2}, {3, 4}});
    CHECK(det_rank_one_update(a, e11) == Rational(2));
    CHECK(det_rank_one_update(a, RMat(2, 2)) == det(a));

    RMat full = rmat({{1, 0}, {0, 1}});
    CHECK_THROWS_AS(det_rank_one_update(a, full), std::invalid_argument);

    std::mt19937_64 rng(7);
    for (int t = 0; t < 10000; ++t) {
        std::size_t n = 2 + (t % 3);
        RMat m = random_rmat(rng, n, n);
        std::vector<Rational> u(n), v(n);
        for (auto& x : u) x = synth::random_rational(rng, -4, 4, 3);
        for (auto& x : v) x = synth::random_rational(rng, -4, 4, 3);
        RMat b = outer(u, v);
        CHECK(det_rank_one_update(m, b) == det(m + b));
    }
}

TEST_CASE("exact kernel") {
    CHECK(kernel(RMat::identity(4)).empty());

    RMat ones = rmat({{1, 1}, {1, 1}});
    auto basis = kernel(ones);
    REQUIRE(basis.size() == 1);
    CHECK(basis[0][0] + basis[0][1] == 0);

    // band matrix with unit slack at mu = 1 (the control case)
    RMat w = rmat({{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}, {1, 0, 0, 1}});
    auto kb = kernel(w);
    REQUIRE(kb.size() == 1);
    Rational s = kb[0][0];
    CHECK(kb[0][1] == -s);
    CHECK(kb[0][2] == s);
    CHECK(kb[0][3] == -s);

    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        RMat m = random_rmat(rng, 3 + t % 3, 4 + t % 4);
        auto b = kernel(m);
        CHECK(rank(m) + b.size() == m.cols());
        for (const auto& v : b) {
            auto mv = matvec(m, v);
            for (const auto& x : mv) CHECK(x == 0);
        }
    }
}

TEST_CASE("float pipeline sanity") {
    FMat a{{2.0, 1.0}, {1.0, 3.0}};
    CHECK(det(a) == doctest::Approx(5.0));
    CHECK(rank(a) == 2);
    auto sol = solve(a, std::vector<double>{3.0, 4.0});
    REQUIRE(sol);
    CHECK((*sol)[0] == doctest::Approx(1.0));
    CHECK((*sol)[1] == doctest::Approx(1.0));
}
