#include <dci/synth.hpp>

namespace dci {
namespace synth {

Rational random_rational(Rng& rng, long lo, long hi, long den_max) {
    std::uniform_int_distribution<long> num(lo, hi);
    std::uniform_int_distribution<long> den(1, den_max);
    return Rational(num(rng), den(rng));
}

std::vector<Rational> random_k(Rng& rng, std::size_t count) {
    std::vector<Rational> k(count);
    std::uniform_int_distribution<long> num(1, 6), den(1, 4);
    for (auto& ki : k) ki = 1 + Rational(num(rng), den(rng));
    return k;
}

namespace {

bool parallel(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i] * b[j] - a[j] * b[i] != 0) return false;
    return true;
}

bool zero_vec(const std::vector<Rational>& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

/// Draws an exact random element of the null space of `constraints`
/// (rows = equations over the flattened unknowns); redraws coefficients
/// until the predicate accepts or attempts run out.
template <typename Pred>
std::optional<std::vector<Rational>> random_null_element(Rng& rng, const RMat& constraints,
                                                         Pred&& accept, int attempts = 64) {
    auto basis = kernel(constraints);
    if (basis.empty()) return std::nullopt;
    std::uniform_int_distribution<long> coef(-2, 2);
    for (int t = 0; t < attempts; ++t) {
        std::vector<Rational> v(constraints.cols(), Rational(0));
        for (const auto& b : basis) {
            Rational c(coef(rng));
            if (c == 0) continue;
            for (std::size_t q = 0; q < v.size(); ++q) v[q] += c * b[q];
        }
        if (accept(v)) return v;
    }
    return std::nullopt;
}

} // namespace

std::vector<std::vector<Rational>> random_directions(Rng& rng, std::size_t count, std::size_t m) {
    std::uniform_int_distribution<long> entry(-3, 3);
    std::vector<std::vector<Rational>> out;
    int guard = 0;
    while (out.size() < count) {
        if (++guard > 10000) throw std::runtime_error("direction sampling stalled");
        std::vector<Rational> v(m);
        for (auto& x : v) x = Rational(entry(rng));
        if (zero_vec(v)) continue;
        if (!out.empty() && parallel(out.back(), v)) continue;
        if (out.size() + 1 == count && parallel(out.front(), v)) continue;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<std::vector<Rational>> orthogonal_complement(const std::vector<Rational>& v) {
    std::size_t m = v.size();
    RMat row(1, m);
    for (std::size_t j = 0; j < m; ++j) row(0, j) = v[j];
    return kernel(row);
}

TnConfig<Rational> random_tn(Rng& rng, std::size_t count, std::size_t n, std::size_t m) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        auto k = random_k(rng, count);
        auto dirs = random_directions(rng, count, m);
        // u_i with sum_i u_i (x) n_i = 0: n*m equations over N*n unknowns
        RMat cons(n * m, count * n);
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < m; ++b) cons(a * m + b, i * n + a) = dirs[i][b];
        auto u = random_null_element(rng, cons, [&](const std::vector<Rational>& v) {
            for (std::size_t i = 0; i < count; ++i) {
                bool nz = false;
                for (std::size_t a = 0; a < n; ++a)
                    if (v[i * n + a] != 0) nz = true;
                if (!nz) return false;
            }
            return true;
        });
        if (!u) continue;
        TnConfig<Rational> cfg;
        cfg.p = RMat(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) cfg.p(i, j) = random_rational(rng);
        cfg.k = k;
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<Rational> ui(n);
            for (std::size_t a = 0; a < n; ++a) ui[a] = (*u)[i * n + a];
            cfg.c.push_back(outer(ui, dirs[i]));
        }
        auto xs = assemble(cfg);
        bool distinct = true;
        for (std::size_t i = 0; i < count && distinct; ++i)
            for (std::size_t j = i + 1; j < count; ++j)
                if (xs[i] == xs[j]) { distinct = false; break; }
        if (!distinct) continue;
        return cfg;
    }
    throw std::runtime_error("could not draw a valid configuration");
}

TnPrimeConfig<Rational> random_tn_prime(Rng& rng, std::size_t count, std::size_t n, std::size_t m) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        TnPrimeConfig<Rational> cfg;
        cfg.x = random_tn(rng, count, n, m);
        // recover the directions from the legs (row space of each C_i)
        cfg.n_dir.clear();
        for (const auto& ci : cfg.x.c) {
            std::optional<std::vector<Rational>> dir;
            for (std::size_t i = 0; i < n && !dir; ++i)
                if (!zero_vec(ci.row(i))) dir = ci.row(i);
            if (!dir) break;
            cfg.n_dir.push_back(*dir);
        }
        if (cfg.n_dir.size() != count) continue;

        // D_i = sum of w (x) (complement basis of n_i), sum D_i = 0
        std::vector<std::vector<std::vector<Rational>>> comp;
        std::size_t dof_per = 0;
        for (std::size_t i = 0; i < count; ++i) {
            comp.push_back(orthogonal_complement(cfg.n_dir[i]));
            dof_per = comp.back().size() * n;
        }
        RMat cons(n * m, count * dof_per);
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t t = 0; t < comp[i].size(); ++t)
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < m; ++b)
                        cons(a * m + b, i * dof_per + t * n + a) = comp[i][t][b];
        auto w = random_null_element(rng, cons, [](const std::vector<Rational>&) { return true; });
        if (!w) continue;
        cfg.d.clear();
        for (std::size_t i = 0; i < count; ++i) {
            RMat di(n, m);
            for (std::size_t t = 0; t < comp[i].size(); ++t) {
                std::vector<Rational> wi(n);
                for (std::size_t a = 0; a < n; ++a) wi[a] = (*w)[i * dof_per + t * n + a];
                di = di + outer(wi, comp[i][t]);
            }
            cfg.d.push_back(di);
        }
        // E_i rows span the complement of n_i as well: E_i n_i = 0
        std::size_t edof_per = comp[0].size() * m;
        RMat econs(m * m, count * edof_per);
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t t = 0; t < comp[i].size(); ++t)
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = 0; b < m; ++b)
                        econs(a * m + b, i * edof_per + t * m + a) = comp[i][t][b];
        auto ze = random_null_element(rng, econs, [](const std::vector<Rational>&) { return true; });
        if (!ze) continue;
        cfg.e.clear();
        for (std::size_t i = 0; i < count; ++i) {
            RMat ei(m, m);
            for (std::size_t t = 0; t < comp[i].size(); ++t) {
                std::vector<Rational> zi(m);
                for (std::size_t a = 0; a < m; ++a) zi[a] = (*ze)[i * edof_per + t * m + a];
                ei = ei + outer(zi, comp[i][t]);
            }
            cfg.e.push_back(ei);
        }
        cfg.q = RMat(n, m);
        cfg.r = RMat(m, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) cfg.q(i, j) = random_rational(rng);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) cfg.r(i, j) = random_rational(rng);

        // stacked distinctness
        TnConfig<Rational> ycfg{cfg.q, cfg.d, cfg.x.k};
        TnConfig<Rational> zcfg{cfg.r, cfg.e, cfg.x.k};
        auto xs = assemble(cfg.x);
        auto ys = assemble(ycfg);
        auto zsb = assemble(zcfg);
        bool distinct = true;
        for (std::size_t i = 0; i < count && distinct; ++i)
            for (std::size_t j = i + 1; j < count; ++j)
                if (xs[i] == xs[j] && ys[i] == ys[j] && zsb[i] == zsb[j]) { distinct = false; break; }
        if (!distinct) continue;
        return cfg;
    }
    throw std::runtime_error("could not draw a valid stacked configuration");
}

InclusionInstance random_inclusion_instance(Rng& rng, std::size_t count, std::size_t n,
                                            std::size_t m) {
    for (int attempt = 0; attempt < 400; ++attempt) {
        TnConfig<Rational> xcfg = random_tn(rng, count, n, m);
        xcfg.p = RMat(n, m); // base point at the origin
        std::vector<std::vector<Rational>> dirs;
        bool ok = true;
        for (const auto& ci : xcfg.c) {
            std::optional<std::vector<Rational>> dir;
            for (std::size_t i = 0; i < n && !dir; ++i)
                if (!zero_vec(ci.row(i))) dir = ci.row(i);
            if (!dir) { ok = false; break; }
            dirs.push_back(*dir);
        }
        if (!ok) continue;
        auto xs = assemble(xcfg);
        auto dv = defining_vector(xcfg.k);

        std::vector<Rational> beta(count);
        std::uniform_int_distribution<long> bnum(1, 5);
        for (auto& b : beta) b = Rational(bnum(rng));

        std::vector<std::vector<std::vector<Rational>>> comp;
        for (std::size_t i = 0; i < count; ++i) comp.push_back(orthogonal_complement(dirs[i]));
        std::size_t dof_d = comp[0].size() * n; // per-increment D parameters
        std::size_t nq = n * m;
        std::size_t dim = nq + count * dof_d + count; // Q, D params, c

        auto build = [&](const std::vector<Rational>& z) {
            RMat q(n, m);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < m; ++b) q(a, b) = z[a * m + b];
            std::vector<RMat> d;
            for (std::size_t i = 0; i < count; ++i) {
                RMat di(n, m);
                for (std::size_t t = 0; t < comp[i].size(); ++t) {
                    std::vector<Rational> wi(n);
                    for (std::size_t a = 0; a < n; ++a) wi[a] = z[nq + i * dof_d + t * n + a];
                    di = di + outer(wi, comp[i][t]);
                }
                d.push_back(di);
            }
            std::vector<Rational> c(count);
            for (std::size_t i = 0; i < count; ++i) c[i] = z[nq + count * dof_d + i];
            return std::make_tuple(q, d, c);
        };

        // constraints: sum D = 0 and the trace identity
        //   sum_j k_j (k_j - 1) t^i_j C_j^T D_j n_i = mu_i n_i with
        //   mu_i = k_i <C_i, Y_i> - beta_i c_i + sum_j beta_j t^i_j c_j
        auto constraints = [&](const std::vector<Rational>& z) {
            auto [q, d, c] = build(z);
            std::vector<Rational> out;
            RMat s(n, m);
            for (const auto& di : d) s = s + di;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < m; ++b) out.push_back(s(a, b));
            std::vector<RMat> ys;
            for (std::size_t i = 0; i < count; ++i) {
                RMat yi = q;
                for (std::size_t j = 0; j < i; ++j) yi = yi + d[j];
                yi = yi + xcfg.k[i] * d[i];
                ys.push_back(yi);
            }
            for (std::size_t i = 0; i < count; ++i) {
                std::vector<Rational> lhs(m, Rational(0));
                for (std::size_t j = 0; j < count; ++j) {
                    auto v = matvec(xcfg.c[j].transposed() * d[j], dirs[i]);
                    Rational f = xcfg.k[j] * (xcfg.k[j] - 1) * dv.t[i][j];
                    for (std::size_t a = 0; a < m; ++a) lhs[a] += f * v[a];
                }
                Rational mui = xcfg.k[i] * frobenius_inner(xcfg.c[i], ys[i]) - beta[i] * c[i];
                for (std::size_t j = 0; j < count; ++j) mui += beta[j] * dv.t[i][j] * c[j];
                for (std::size_t a = 0; a < m; ++a) out.push_back(lhs[a] - mui * dirs[i][a]);
            }
            return out;
        };

        std::vector<Rational> z0(dim, Rational(0));
        auto base = constraints(z0);
        RMat cons(base.size(), dim);
        for (std::size_t qdx = 0; qdx < dim; ++qdx) {
            std::vector<Rational> z(dim, Rational(0));
            z[qdx] = 1;
            auto col = constraints(z);
            for (std::size_t r2 = 0; r2 < base.size(); ++r2) cons(r2, qdx) = col[r2] - base[r2];
        }
        // the system is homogeneous (base = 0), draw from its kernel
        auto sol = random_null_element(rng, cons, [&](const std::vector<Rational>& z) {
            auto [q, d, c] = build(z);
            (void)q;
            (void)c;
            for (const auto& di : d) {
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < m; ++b)
                        if (di(a, b) != 0) return true;
            }
            return false;
        });
        if (!sol) continue;
        auto [q, d, c] = build(*sol);

        TnPrimeConfig<Rational> cfg;
        cfg.x = xcfg;
        cfg.q = q;
        cfg.d = d;
        cfg.n_dir = dirs;
        // Z-block from the inclusion structure, then the increment solve
        std::vector<RMat> ys, zs;
        for (std::size_t i = 0; i < count; ++i) {
            RMat yi = q;
            for (std::size_t j = 0; j < i; ++j) yi = yi + d[j];
            yi = yi + xcfg.k[i] * d[i];
            ys.push_back(yi);
            RMat zi = xs[i].transposed() * yi - (beta[i] * c[i]) * RMat::identity(m);
            zs.push_back(zi);
        }
        std::vector<RMat> pz(count, RMat(m, m));
        for (std::size_t i = 0; i < count; ++i) {
            RMat s(m, m);
            for (std::size_t j = 0; j < count; ++j) s = s + dv.t[i][j] * zs[j];
            pz[i] = s;
        }
        cfg.r = pz[0];
        cfg.e.assign(count, RMat(m, m));
        RMat esum(m, m);
        for (std::size_t i = 0; i + 1 < count; ++i) {
            cfg.e[i] = pz[i + 1] - pz[i];
            esum = esum + cfg.e[i];
        }
        cfg.e[count - 1] = -esum;
        // consistency: the chain and kernel conditions must close exactly
        bool consistent = true;
        for (std::size_t i = 0; i < count && consistent; ++i) {
            if (!(zs[i] == pz[i] + xcfg.k[i] * cfg.e[i])) consistent = false;
            if (!zero_vec(matvec(cfg.e[i], dirs[i]))) consistent = false;
        }
        if (!consistent) continue;
        return InclusionInstance{cfg, beta, c};
    }
    throw std::runtime_error("could not draw an inclusion-structured instance");
}

} // namespace synth
} // namespace dci
