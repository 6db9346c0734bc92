#include <dci/counterexample.hpp>
#include <dci/inclusion.hpp>
#include <dci/synth.hpp>

#include <doctest.h>

using namespace dci;

namespace {
IntegrandOracle quadratic_oracle() {
    IntegrandOracle f;
    f.value = [](const FMat& x) {
        double n = frob_norm(x);
        return 0.5 * n * n;
    };
    return f; // gradient via finite differences
}
} // namespace

TEST_CASE("plain inclusion point of the squared norm") {
    auto f = quadratic_oracle();
    auto p = kf_point(f, FMat(2, 2));
    CHECK(p.c == doctest::Approx(0.0));
    CHECK(frob_norm(p.y) < 1e-9);
    CHECK(frob_norm(p.z) < 1e-9);
    CHECK(p.beta == 1.0);
}

TEST_CASE("plain inclusion point of the determinant") {
    IntegrandOracle f;
    f.value = [](const FMat& x) { return det(x); };
    auto p = kf_point(f, FMat::identity(2));
    // gradient of det at the identity is the identity
    CHECK(frob_norm(p.y - FMat::identity(2)) < 1e-8);
    // Z = X^T Y - f Id = I - I = 0
    CHECK(frob_norm(p.z) < 1e-8);
}

TEST_CASE("gap matrix on identical values flags non-strictness") {
    std::vector<InclusionPoint<Rational>> pts(2);
    for (auto& p : pts) {
        p.x = RMat(2, 2);
        p.y = RMat(2, 2);
        p.z = RMat(2, 2);
        p.beta = 1;
        p.c = 0;
    }
    pts[1].x = RMat{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    auto rep = qij_report(pts, QijVariant::curl);
    CHECK_FALSE(rep.strictly_negative);
    CHECK(rep.q(0, 1) == 0);
}

TEST_CASE("gap matrix of a strictly convex quadratic is negative") {
    auto f = quadratic_oracle();
    synth::Rng rng(5);
    std::normal_distribution<double> g;
    for (int t = 0; t < 50; ++t) {
        std::vector<InclusionPoint<double>> pts;
        for (int i = 0; i < 4; ++i) {
            FMat x(2, 2);
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = 0; b < 2; ++b) x(a, b) = g(rng);
            pts.push_back(kf_point(f, x));
        }
        bool distinct = true;
        for (std::size_t i = 0; i < 4 && distinct; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                if (frob_norm(pts[i].x - pts[j].x) < 1e-6) distinct = false;
        if (!distinct) continue;
        auto rep = qij_report<double>(pts, QijVariant::straight, nullptr, 1e-12);
        CHECK(rep.strictly_negative);
    }
}

TEST_CASE("trace identity on exact instances") {
    synth::Rng rng(303);
    int made = 0;
    for (int t = 0; t < 80 && made < 50; ++t) {
        synth::InclusionInstance inst;
        try {
            inst = synth::random_inclusion_instance(rng, 5, 2, 2);
        } catch (const std::runtime_error&) {
            continue;
        }
        ++made;
        auto rep = tec_check(inst.config, inst.beta, inst.c);
        CHECK(rep.preconditions_hold);
        CHECK(rep.max_defect == 0);
        CHECK(rep.quadratic_identity_defect == 0);
        CHECK(rep.chain_identity_defect == 0);
        for (const auto& m : rep.mu) CHECK(m == 0);
    }
    CHECK(made >= 50);
}

TEST_CASE("trace identity trivial case") {
    synth::Rng rng(11);
    auto cfg = synth::random_tn_prime(rng, 5, 2, 2);
    cfg.x.p = RMat(2, 2);
    for (auto& d : cfg.d) d = RMat(2, 2);
    cfg.q = RMat(2, 2);
    std::vector<Rational> beta(5, Rational(1)), c(5, Rational(0));
    // rebuild Z from the inclusion structure: X^T * 0 - 0 = 0
    auto xs = assemble(cfg.x);
    cfg.r = RMat(2, 2);
    for (auto& e : cfg.e) e = RMat(2, 2);
    auto rep = tec_check(cfg, beta, c);
    CHECK(rep.preconditions_hold);
    CHECK(rep.max_defect == 0);
    for (const auto& m : rep.mu) CHECK(m == 0);
}

TEST_CASE("trace identity reports missing structure") {
    synth::Rng rng(21);
    auto cfg = synth::random_tn_prime(rng, 5, 2, 2);
    std::vector<Rational> beta(5, Rational(2)), c(5, Rational(1));
    auto rep = tec_check(cfg, beta, c);
    CHECK_FALSE(rep.preconditions_hold);
    CHECK_FALSE(rep.precondition_failures.empty());
}

TEST_CASE("rotated data reports the rotated structure, not a defect") {
    auto data = load_builtin();
    // wrap the embedded points as a stacked family on the first ordering
    std::vector<FMat> xs, ys, zs;
    std::vector<double> beta, c;
    for (int ix : data.orderings[0]) {
        xs.push_back(to_float(data.x[ix - 1]));
        ys.push_back(to_float(data.y[ix - 1]));
        zs.push_back(to_float(data.z[ix - 1]));
        beta.push_back(to_double(data.beta[ix - 1]));
        c.push_back(to_double(data.c[ix - 1]));
    }
    auto det_res = detect_tn(xs, 3, 32);
    REQUIRE(det_res);
    TnPrimeConfig<double> cfg;
    cfg.x = det_res->config;
    // derive the Y and Z witnesses from barycentric sums
    auto build_block = [&](const std::vector<FMat>& ws, FMat& base, std::vector<FMat>& legs) {
        std::size_t n = ws.size();
        std::vector<FMat> pb(n, FMat(ws[0].rows(), ws[0].cols()));
        for (std::size_t i = 0; i < n; ++i) {
            FMat s(ws[0].rows(), ws[0].cols());
            for (std::size_t j = 0; j < n; ++j) s = s + det_res->dv.t[i][j] * ws[j];
            pb[i] = s;
        }
        base = pb[0];
        legs.assign(n, FMat(ws[0].rows(), ws[0].cols()));
        FMat acc(ws[0].rows(), ws[0].cols());
        for (std::size_t i = 0; i + 1 < n; ++i) {
            legs[i] = pb[i + 1] - pb[i];
            acc = acc + legs[i];
        }
        legs[n - 1] = -acc;
    };
    build_block(ys, cfg.q, cfg.d);
    build_block(zs, cfg.r, cfg.e);
    for (const auto& ci : cfg.x.c) {
        FMat g = ci.transposed() * ci;
        // dominant right-vector
        double tr = g(0, 0) + g(1, 1);
        double dd = std::sqrt(std::max(0.0, (g(0, 0) - g(1, 1)) * (g(0, 0) - g(1, 1)) +
                                                 4 * g(0, 1) * g(0, 1)));
        double lam = 0.5 * (tr + dd);
        std::vector<double> nv{g(0, 1), lam - g(0, 0)};
        double nn = std::hypot(nv[0], nv[1]);
        if (nn < 1e-12) nv = {1.0, 0.0};
        else nv = {nv[0] / nn, nv[1] / nn};
        cfg.n_dir.push_back(nv);
    }
    // the rotated family does not satisfy the straight inclusion structure
    auto rep = tec_check(cfg, beta, c, 1e-7);
    CHECK_FALSE(rep.preconditions_hold);

    // converting to the straight form (Y -> -YJ, Z -> X^T Y' - beta c Id)
    // makes the whole structure exact up to the witness residual
    FMat jr = rotation_j<double>();
    std::vector<FMat> ys2, zs2;
    for (std::size_t i = 0; i < 5; ++i) {
        ys2.push_back(-1.0 * (ys[i] * jr));
        zs2.push_back(xs[i].transposed() * ys2.back() - (beta[i] * c[i]) * FMat::identity(2));
    }
    TnPrimeConfig<double> scfg;
    scfg.x = det_res->config;
    // use a zero base point: shift X legs are unchanged, the structure
    // checks only use the legs and assembled values
    build_block(ys2, scfg.q, scfg.d);
    build_block(zs2, scfg.r, scfg.e);
    scfg.n_dir = cfg.n_dir;
    // shift the X base to zero per the trace lemma hypothesis
    FMat p0 = scfg.x.p;
    scfg.x.p = FMat(2, 2);
    std::vector<FMat> zs3;
    for (std::size_t i = 0; i < 5; ++i)
        zs3.push_back((xs[i] - p0).transposed() * ys2[i] -
                      (beta[i] * c[i]) * FMat::identity(2));
    build_block(zs3, scfg.r, scfg.e);
    auto rep2 = tec_check(scfg, beta, c, 1e-6);
    CHECK(rep2.preconditions_hold);
    CHECK(rep2.max_defect < 1e-6);
    for (const auto& m : rep2.mu) CHECK(std::abs(m) < 1e-7);
}

TEST_CASE("wave-cone connection tests") {
    auto f = quadratic_oracle();
    // identical points are degenerate
    auto p = kf_point(f, FMat::identity(2));
    auto v = rank_connection_test(p, p);
    CHECK(v.degenerate);

    // theorem mode: nonnegative values, rank-one connected arguments, no
    // wave-cone connection for a strictly polyconvex integrand
    synth::Rng rng(17);
    std::normal_distribution<double> g;
    int connected = 0;
    for (int t = 0; t < 1000; ++t) {
        FMat x(2, 2);
        for (std::size_t a2 = 0; a2 < 2; ++a2)
            for (std::size_t b = 0; b < 2; ++b) x(a2, b) = g(rng);
        std::vector<double> u{g(rng), g(rng)}, nv{g(rng), g(rng)};
        double nn = std::hypot(nv[0], nv[1]);
        if (nn < 1e-6) continue;
        for (auto& q : nv) q /= nn;
        FMat x2 = x + outer(u, nv);
        auto a = kf_point(f, x);
        auto b = kf_point(f, x2);
        auto verdict = rank_connection_test(a, b, 1e-8);
        CHECK(verdict.theorem_mode);
        if (verdict.connected) ++connected;
    }
    CHECK(connected == 0);

    // hand-built opposite-sign pair: the scalar gaps are consistent with a
    // connection, and the stacked difference really lies in the cone
    InclusionPoint<Rational> a, b;
    a.x = RMat(2, 2);
    a.y = RMat{{Rational(0), Rational(0)}, {Rational(0), Rational(0)}};
    a.beta = Rational(2);
    a.c = Rational(-1);
    a.z = a.x.transposed() * a.y - (a.beta * a.c) * RMat::identity(2);
    std::vector<Rational> u{Rational(1), Rational(0)};
    std::vector<Rational> xi{Rational(0), Rational(1)};
    b.beta = Rational(1);
    b.c = Rational(1);
    b.x = a.x + outer(u, xi);
    // choose Y' = Y + D with D xi = 0 and the coupling consistency
    // <C, Y> = c' beta' - c beta = 1*1 - (-1)*2 = 3: impossible with Y = 0
    // unless we put the inner product into Y first
    a.y = RMat{{Rational(0), Rational(3)}, {Rational(0), Rational(0)}}; // <C,Y> = 3
    a.z = a.x.transposed() * a.y - (a.beta * a.c) * RMat::identity(2);
    b.y = a.y; // D = 0
    b.z = b.x.transposed() * b.y - (b.beta * b.c) * RMat::identity(2);
    auto verdict = rank_connection_test(a, b);
    CHECK_FALSE(verdict.theorem_mode);
    CHECK(verdict.connected);
    CHECK(verdict.coupling == verdict.coupling_expected);
    CHECK(verdict.inequalities_consistent);
}

TEST_CASE("nonnegative shift") {
    auto data = load_builtin();
    std::vector<InclusionPoint<Rational>> pts;
    for (std::size_t i = 0; i < 5; ++i) {
        InclusionPoint<Rational> p;
        p.x = data.x[i];
        p.y = data.y[i];
        p.z = data.z[i];
        p.beta = Rational(1); // value shift applies to unit multiplicity
        p.c = data.c[i];
        pts.push_back(p);
    }
    auto shifted = shift_nonnegative(pts);
    // minimum sits at the third entry
    Rational cmin = data.c[2];
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(shifted[i].c == data.c[i] - cmin);
        CHECK(shifted[i].c >= 0);
        CHECK(shifted[i].z == data.z[i] + cmin * RMat::identity(2));
    }
    CHECK(shifted[2].c == 0);

    // all equal values: everything collapses to zero
    for (auto& p : pts) p.c = Rational(3, 7);
    auto flat = shift_nonnegative(pts);
    for (const auto& p : flat) CHECK(p.c == 0);

    pts[0].beta = Rational(2);
    CHECK_THROWS_AS(shift_nonnegative(pts), std::invalid_argument);
}

TEST_CASE("contradiction implication") {
    std::vector<Rational> mu(5, Rational(0));
    std::vector<Rational> beta{Rational(2), Rational(5), Rational(10), Rational(1), Rational(2)};
    std::vector<Rational> c{Rational(1), Rational(0), Rational(2), Rational(1), Rational(3)};
    // nu consistent with mu = 0: nu_sigma = sum (beta_j - beta_sigma) t_j c_j >= 0
    auto dv = defining_vector(std::vector<Rational>{Rational(2), Rational(2), Rational(2),
                                                    Rational(2), Rational(2)});
    std::vector<Rational> nu(5, Rational(0));
    std::size_t sigma = 3; // smallest beta
    for (std::size_t j = 0; j < 5; ++j)
        nu[sigma] += (beta[j] - beta[sigma]) * dv.t[sigma][j] * c[j];
    CHECK(contradiction_implication(mu, nu, beta, c));
    // violated data must be flagged
    nu[sigma] = Rational(-1);
    CHECK_FALSE(contradiction_implication(mu, nu, beta, c));
}
