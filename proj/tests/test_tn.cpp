#include <dci/synth.hpp>
#include <dci/tn.hpp>

#include <doctest.h>

using namespace dci;

TEST_CASE("defining vector for equal factors") {
    std::vector<Rational> k{Rational(2), Rational(2), Rational(2)};
    auto dv = defining_vector(k);
    CHECK(dv.lambda == std::vector<Rational>{Rational(1, 7), Rational(2, 7), Rational(4, 7)});
    CHECK(dv.mu == Rational(8));
    CHECK(dv.xi == std::vector<Rational>{Rational(1), Rational(2), Rational(4)});
    CHECK(dv.t[0] == std::vector<Rational>{Rational(1, 7), Rational(2, 7), Rational(4, 7)});
    CHECK(dv.t[1] == std::vector<Rational>{Rational(4, 7), Rational(1, 7), Rational(2, 7)});
    CHECK(dv.t[2] == std::vector<Rational>{Rational(2, 7), Rational(4, 7), Rational(1, 7)});
    CHECK(reconstruct_k(dv) == k);
}

TEST_CASE("defining vector rejects factors at or below one") {
    CHECK_THROWS_AS(defining_vector(std::vector<Rational>{Rational(2), Rational(1)}),
                    std::domain_error);
}

TEST_CASE("defining vector round trip is exact") {
    synth::Rng rng(101);
    for (int t = 0; t < 100; ++t) {
        std::size_t n = 2 + t % 6; // up to 7
        auto k = synth::random_k(rng, n);
        auto dv = defining_vector(k);
        CHECK(reconstruct_k(dv) == k);
        Rational lsum(0);
        for (const auto& l : dv.lambda) {
            CHECK(l > 0);
            lsum += l;
        }
        CHECK(lsum == 1);
        CHECK(dv.mu > 1);
        CHECK(dv.xi[0] == 1);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(dv.xi[i] >= 1);
            if (i) CHECK(dv.xi[i] > dv.xi[i - 1]);
            Rational tsum(0);
            for (const auto& tv : dv.t[i]) {
                CHECK(tv > 0);
                tsum += tv;
            }
            CHECK(tsum == 1);
        }
        // xi_N = 1 + (mu - 1)(1 - lambda_N)
        CHECK(dv.xi[n - 1] == 1 + (dv.mu - 1) * (1 - dv.lambda[n - 1]));
    }
}

TEST_CASE("assemble") {
    TnConfig<Rational> cfg;
    cfg.p = RMat{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    cfg.c.assign(3, RMat(2, 2));
    cfg.k.assign(3, Rational(2));
    auto xs = assemble(cfg);
    for (const auto& x : xs) CHECK(x == cfg.p);

    // two-point configuration from an explicit rank-one pair
    std::vector<Rational> u{Rational(1), Rational(2)};
    std::vector<Rational> nv{Rational(1), Rational(0)};
    TnConfig<Rational> two;
    two.p = RMat(2, 2);
    two.c = {outer(u, nv), -1 * outer(u, nv)};
    two.k = {Rational(2), Rational(2)};
    auto x2 = assemble(two);
    CHECK(x2[0] == 2 * outer(u, nv));
    CHECK(x2[1] == -1 * outer(u, nv));
}

TEST_CASE("check_tn verdicts") {
    synth::Rng rng(7);
    auto cfg = synth::random_tn(rng, 5, 2, 2);
    auto xs = assemble(cfg);
    CHECK(check_tn(xs, cfg).pass);

    auto bad = cfg;
    bad.k[1] = Rational(1);
    auto rep = check_tn(assemble(cfg), bad);
    CHECK_FALSE(rep.pass);
    bool mentioned = false;
    for (const auto& f : rep.failures)
        if (f.find("k_2 not > 1") != std::string::npos) mentioned = true;
    CHECK(mentioned);
}

TEST_CASE("round trip detect on random configurations") {
    synth::Rng rng(31);
    int found = 0;
    for (int t = 0; t < 100; ++t) {
        auto cfg = synth::random_tn(rng, 3 + t % 3, 2, 2);
        auto xsr = assemble(cfg);
        std::vector<FMat> xs;
        for (const auto& x : xsr) xs.push_back(to_float(x));
        bool distinct = true;
        for (std::size_t i = 0; i < xs.size() && distinct; ++i)
            for (std::size_t j = i + 1; j < xs.size(); ++j)
                if (frob_norm(xs[i] - xs[j]) < 1e-9) { distinct = false; break; }
        if (!distinct) continue;
        auto det_res = detect_tn(xs, 1000 + t, 16);
        REQUIRE(det_res);
        CHECK(det_res->residual < 1e-9);
        ++found;
    }
    CHECK(found >= 90);
}

TEST_CASE("detect on a rank-one connected pair") {
    std::vector<Rational> u{Rational(1), Rational(0)};
    std::vector<Rational> nv{Rational(0), Rational(1)};
    std::vector<FMat> xs{to_float(2 * outer(u, nv)), to_float(-1 * outer(u, nv))};
    auto res = detect_tn(xs, 5, 16);
    REQUIRE(res);
    CHECK(check_tn(xs, res->config).pass);
}

TEST_CASE("detect rejects duplicates") {
    FMat a{{1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(detect_tn({a, a}, 1, 2), std::invalid_argument);
}

TEST_CASE("wave cone membership") {
    RMat zero22(2, 2);
    auto w = lambda_dc_member(zero22, zero22, zero22);
    REQUIRE(w);
    bool unit = false;
    for (const auto& x : w->xi)
        if (x != 0) unit = true;
    CHECK(unit);

    RMat x{{Rational(0), Rational(1)}, {Rational(0), Rational(0)}};
    RMat y{{Rational(1), Rational(0)}, {Rational(2), Rational(0)}};
    RMat z{{Rational(3), Rational(0)}, {Rational(-1), Rational(0)}};
    auto w2 = lambda_dc_member(x, y, z);
    REQUIRE(w2);
    // direction projectively (0,1)
    CHECK(w2->xi[0] == 0);
    CHECK(w2->xi[1] != 0);
    CHECK(x == outer(w2->u, w2->xi));

    CHECK_FALSE(lambda_dc_member(RMat::identity(2), zero22, zero22));
}

TEST_CASE("check_tn_prime verdicts") {
    synth::Rng rng(77);
    auto cfg = synth::random_tn_prime(rng, 5, 2, 2);
    // build stacked matrices
    TnConfig<Rational> ycfg{cfg.q, cfg.d, cfg.x.k};
    TnConfig<Rational> zcfg{cfg.r, cfg.e, cfg.x.k};
    auto xs = assemble(cfg.x);
    auto ys = assemble(ycfg);
    auto zs = assemble(zcfg);
    std::vector<RMat> stacked;
    for (std::size_t i = 0; i < 5; ++i) {
        RMat a(6, 2);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c2 = 0; c2 < 2; ++c2) {
                a(r, c2) = xs[i](r, c2);
                a(2 + r, c2) = ys[i](r, c2);
                a(4 + r, c2) = zs[i](r, c2);
            }
        stacked.push_back(a);
    }
    CHECK(check_tn_prime(stacked, cfg).pass);

    // all-zero blocks: not distinct
    TnPrimeConfig<Rational> degenerate = cfg;
    for (auto& ci : degenerate.x.c) ci = RMat(2, 2);
    for (auto& di : degenerate.d) di = RMat(2, 2);
    for (auto& ei : degenerate.e) ei = RMat(2, 2);
    auto dx = assemble(degenerate.x);
    std::vector<RMat> dst(5, RMat(6, 2));
    auto repd = check_tn_prime(dst, degenerate);
    CHECK_FALSE(repd.pass);

    // kernel violation
    auto broken = cfg;
    broken.d[0] = broken.d[0] + outer(std::vector<Rational>{Rational(1), Rational(0)},
                                      broken.n_dir[0]);
    auto repb = check_tn_prime(stacked, broken);
    CHECK_FALSE(repb.pass);
    bool wave = false;
    for (const auto& f : repb.failures)
        if (f.find("n_1 != 0") != std::string::npos || f.find("wave-cone") != std::string::npos)
            wave = true;
    CHECK(wave);
}

TEST_CASE("identity suite on random stacked configurations") {
    synth::Rng rng(55);
    for (int t = 0; t < 20; ++t) {
        auto cfg = synth::random_tn_prime(rng, 5, 2, 2);
        auto rep = identity_suite(cfg);
        CHECK(rep.pass);
        CHECK(rep.max_defect == 0);
    }
    // zero legs: both sides of every identity collapse to the base point
    TnPrimeConfig<Rational> cfg;
    cfg.x.p = RMat{{Rational(1), Rational(2)}, {Rational(3), Rational(4)}};
    cfg.x.c.assign(4, RMat(2, 2));
    cfg.x.k.assign(4, Rational(3, 2));
    cfg.q = RMat(2, 2);
    cfg.r = RMat(2, 2);
    cfg.d.assign(4, RMat(2, 2));
    cfg.e.assign(4, RMat(2, 2));
    cfg.n_dir.assign(4, {Rational(1), Rational(0)});
    CHECK(identity_suite(cfg).pass);
}

TEST_CASE("identity suite covers higher minor orders") {
    synth::Rng rng(99);
    for (std::size_t n = 2; n <= 4; ++n)
        for (std::size_t m = 2; m <= 4; ++m) {
            auto cfg = synth::random_tn(rng, 4, n, m);
            auto rep = identity_suite(cfg);
            CHECK(rep.pass);
        }
}
