#include <dci/multivector.hpp>

#include <doctest.h>

#include <random>

using namespace dci;

namespace {
std::vector<double> e(std::size_t i, std::size_t d = 4) {
    std::vector<double> v(d, 0.0);
    v[i] = 1.0;
    return v;
}

std::vector<double> rand_vec(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> g;
    std::vector<double> v(d);
    for (auto& x : v) x = g(rng);
    return v;
}

FMat rand_mat(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::normal_distribution<double> g;
    FMat x(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x(i, j) = g(rng);
    return x;
}
} // namespace

TEST_CASE("wedge basics") {
    auto w = wedge({e(0), e(1)});
    CHECK(w.coeff({0, 1}) == doctest::Approx(1.0));
    for (std::size_t p = 1; p < w.size(); ++p) CHECK(w[p] == doctest::Approx(0.0));

    auto wr = wedge({e(1), e(0)});
    for (std::size_t p = 0; p < w.size(); ++p) CHECK(wr[p] == doctest::Approx(-w[p]));

    std::vector<double> v = e(0);
    v[2] += 1.0; // e1 + e3
    auto wb = wedge({v, e(1)});
    CHECK(wb.coeff({0, 1}) == doctest::Approx(1.0));
    CHECK(wb.coeff({1, 2}) == doctest::Approx(-1.0)); // e3 ^ e2 = -(e2 ^ e3)
    CHECK(wb.coeff({0, 2}) == doctest::Approx(0.0));

    CHECK_THROWS(wedge({e(0), std::vector<double>(3, 1.0)}));
}

TEST_CASE("inner product equals the Gram determinant") {
    auto w12 = wedge({e(0), e(1)});
    auto w34 = wedge({e(2), e(3)});
    CHECK(mvec_inner(w12, w12) == doctest::Approx(1.0));
    CHECK(mvec_inner(w12, w34) == doctest::Approx(0.0));

    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        auto v1 = rand_vec(rng, 4), v2 = rand_vec(rng, 4);
        auto w1 = rand_vec(rng, 4), w2 = rand_vec(rng, 4);
        double lhs = mvec_inner(wedge({v1, v2}), wedge({w1, w2}));
        auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
            double s = 0;
            for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
            return s;
        };
        double gram = dot(v1, w1) * dot(v2, w2) - dot(v1, w2) * dot(v2, w1);
        CHECK(lhs == doctest::Approx(gram).epsilon(1e-10));
        CHECK(mvec_inner(wedge({v1, v2}), wedge({v1, v2})) >= -1e-12);
    }
}

TEST_CASE("integrand coordinates") {
    auto w12 = wedge({e(0), e(1)});
    auto c = phi_coords(w12);
    for (int i = 0; i < 5; ++i) CHECK(c[i] == doctest::Approx(0.0));
    CHECK(c[5] == doctest::Approx(1.0));

    auto w34 = wedge({e(2), e(3)});
    auto c2 = phi_coords(w34);
    CHECK(c2[4] == doctest::Approx(1.0));
    CHECK(c2[0] == doctest::Approx(0.0));
    CHECK(c2[5] == doctest::Approx(0.0));

    // isometry: coordinates are a signed permutation
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        auto tau = wedge({rand_vec(rng, 4), rand_vec(rng, 4)});
        auto cc = phi_coords(tau);
        double s = 0;
        for (double x : cc) s += x * x;
        CHECK(s == doctest::Approx(tau.norm() * tau.norm()).epsilon(1e-10));
        auto gen = phi_coords_general(tau);
        CHECK(gen.back() == doctest::Approx(tau.coeff({0, 1})));
    }

    // frame coordinates carry (X, det X) with the leading slot last
    for (int t = 0; t < 50; ++t) {
        auto x = rand_mat(rng, 2, 2);
        auto g = graph_frame(x);
        auto cc = phi_coords(g.w);
        CHECK(cc[0] == doctest::Approx(x(0, 0)));
        CHECK(cc[1] == doctest::Approx(x(1, 0)));
        CHECK(cc[2] == doctest::Approx(x(0, 1)));
        CHECK(cc[3] == doctest::Approx(x(1, 1)));
        CHECK(cc[4] == doctest::Approx(det(x)));
        CHECK(cc[5] == doctest::Approx(1.0));
        // last coordinate of the normalized orientation is 1/area
        auto unit = (1.0 / g.area) * g.w;
        CHECK(phi_coords(unit)[5] == doctest::Approx(1.0 / g.area));
        CHECK(g.area >= 1.0);
    }
}

TEST_CASE("graph frames") {
    auto g0 = graph_frame(FMat(2, 2));
    CHECK(g0.area == doctest::Approx(1.0));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(g0.h(i, j) == doctest::Approx(i == j && i < 2 ? 1.0 : 0.0));

    auto gi = graph_frame(FMat::identity(2));
    CHECK(gi.area == doctest::Approx(2.0));

    FMat x1{{1.6, -2.0}, {-2.0, 1.6}};
    auto g1 = graph_frame(x1);
    double d = det(x1);
    CHECK(d == doctest::Approx(1.6 * 1.6 - 4.0));
    double direct = std::sqrt(1.0 + 1.6 * 1.6 * 2 + 4.0 * 2 + d * d);
    CHECK(g1.area == doctest::Approx(direct).epsilon(1e-12));

    std::mt19937_64 rng(23);
    for (int t = 0; t < 1000; ++t) {
        auto x = rand_mat(rng, 2, 2);
        auto g = graph_frame(x);
        // projection: symmetric, idempotent, trace = m
        auto h2 = g.h * g.h;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(g.h(i, j) == doctest::Approx(g.h(j, i)).epsilon(1e-10));
                CHECK(h2(i, j) == doctest::Approx(g.h(i, j)).epsilon(1e-10));
            }
        CHECK(g.h.trace() == doctest::Approx(2.0).epsilon(1e-10));
        // area: Gram route vs closed form, and the orientation norm
        double nx = frob_norm(x);
        double closed = std::sqrt(1.0 + nx * nx + det(x) * det(x));
        CHECK(g.area == doctest::Approx(closed).epsilon(1e-12));
        CHECK(g.w.norm() == doctest::Approx(g.area).epsilon(1e-12));
    }

    // taller frames keep the invariants
    for (int t = 0; t < 50; ++t) {
        auto x = rand_mat(rng, 3, 2);
        auto g = graph_frame(x);
        CHECK(g.h.trace() == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(g.w.norm() == doctest::Approx(g.area).epsilon(1e-10));
    }
}
