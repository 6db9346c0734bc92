#pragma once

#include <dci/matrix.hpp>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dci {

/// Barycentric data (lambda, mu) of a configuration, with the induced
/// probability vectors t^i and their normalizations xi_i.
template <typename S>
struct DefiningVector {
    std::vector<S> lambda; // positive, sums to 1
    S mu;                  // > 1
    std::vector<S> xi;     // xi_1 = 1, nondecreasing
    std::vector<std::vector<S>> t; // t[i][j], each row positive with l1 norm 1

    std::size_t count() const { return lambda.size(); }
};

template <typename S>
DefiningVector<S> defining_vector_from_lambda_mu(std::vector<S> lambda, S mu) {
    DefiningVector<S> dv;
    dv.lambda = std::move(lambda);
    dv.mu = mu;
    std::size_t n = dv.lambda.size();
    dv.xi.resize(n);
    dv.t.assign(n, std::vector<S>(n));
    S before(0);
    for (std::size_t i = 0; i < n; ++i) {
        dv.xi[i] = S(1) + (mu - S(1)) * before;
        for (std::size_t j = 0; j < n; ++j)
            dv.t[i][j] = (j < i ? mu * dv.lambda[j] : dv.lambda[j]) / dv.xi[i];
        before += dv.lambda[i];
    }
    return dv;
}

/// Inverts the k_i factors to (lambda, mu): consecutive weights satisfy
/// lambda_{i+1} (k_{i+1} - 1) = k_i lambda_i, the total is 1 and
/// mu = 1 + 1/(lambda_1 (k_1 - 1)). The k-reconstruction below recovers
/// the input exactly on rationals.
template <typename S>
DefiningVector<S> defining_vector(const std::vector<S>& k) {
    if (k.size() < 2) throw std::invalid_argument("need at least two factors");
    for (const S& ki : k)
        if (!(ki > S(1))) throw std::domain_error("all k_i must exceed 1");
    std::size_t n = k.size();
    std::vector<S> lambda(n);
    lambda[0] = S(1);
    for (std::size_t i = 1; i < n; ++i) lambda[i] = lambda[i - 1] * k[i - 1] / (k[i] - S(1));
    S total(0);
    for (const S& l : lambda) total += l;
    for (S& l : lambda) l /= total;
    S mu = S(1) + S(1) / (lambda[0] * (k[0] - S(1)));
    return defining_vector_from_lambda_mu(std::move(lambda), mu);
}

/// k_i = (mu (lambda_1 + ... + lambda_i) + lambda_{i+1} + ... + lambda_N)
///       / ((mu - 1) lambda_i).
template <typename S>
std::vector<S> reconstruct_k(const DefiningVector<S>& dv) {
    std::size_t n = dv.count();
    std::vector<S> k(n);
    S head(0), total(0);
    for (const S& l : dv.lambda) total += l;
    for (std::size_t i = 0; i < n; ++i) {
        head += dv.lambda[i];
        k[i] = (dv.mu * head + (total - head)) / ((dv.mu - S(1)) * dv.lambda[i]);
    }
    return k;
}

/// Witness data P, C_i, k_i for an ordered configuration
/// X_i = P + C_1 + ... + C_{i-1} + k_i C_i with rank-one legs summing to 0.
template <typename S>
struct TnConfig {
    Matrix<S> p;
    std::vector<Matrix<S>> c;
    std::vector<S> k;

    std::size_t count() const { return c.size(); }
    std::size_t nrows() const { return p.rows(); }
    std::size_t ncols() const { return p.cols(); }
};

template <typename S>
std::vector<Matrix<S>> assemble(const TnConfig<S>& cfg) {
    std::vector<Matrix<S>> xs;
    Matrix<S> acc = cfg.p;
    for (std::size_t i = 0; i < cfg.count(); ++i) {
        xs.push_back(acc + cfg.k[i] * cfg.c[i]);
        acc = acc + cfg.c[i];
    }
    return xs;
}

/// X/Y/Z-stacked witness: the three blocks share the factors k_i, and each
/// increment triple (C_i, D_i, E_i) lies in the div-curl wave cone with a
/// common direction n_i.
template <typename S>
struct TnPrimeConfig {
    TnConfig<S> x;               // P, C_i, k_i
    Matrix<S> q, r;              // base points of the Y and Z blocks
    std::vector<Matrix<S>> d, e; // increments, D_i n_i = 0, E_i n_i = 0
    std::vector<std::vector<S>> n_dir;

    std::size_t count() const { return x.count(); }
};

struct CheckReport {
    bool pass = true;
    std::vector<std::string> failures;
    double max_residual = 0;

    void fail(const std::string& msg) {
        pass = false;
        failures.push_back(msg);
    }
    std::string summary() const {
        if (pass) return "ok";
        std::ostringstream os;
        for (const auto& f : failures) os << f << "; ";
        return os.str();
    }
};

namespace tn_detail {
template <typename S>
double residual_norm(const Matrix<S>& m) {
    return frob_norm(m);
}
template <typename S>
bool near_zero(const Matrix<S>& m, double tol) {
    if constexpr (std::is_same_v<S, Rational>) {
        (void)tol;
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (m(i, j) != 0) return false;
        return true;
    } else {
        return frob_norm(m) <= tol;
    }
}
} // namespace tn_detail

/// Verifies the ordered family X against a witness: distinctness,
/// reconstruction residuals, rank-one legs, zero leg sum, k_i > 1.
/// Exact verdict on rational inputs.
template <typename S>
CheckReport check_tn(const std::vector<Matrix<S>>& xs, const TnConfig<S>& cfg, double tol = 1e-9) {
    CheckReport rep;
    if (xs.size() != cfg.count() || xs.size() < 2) {
        rep.fail("need >= 2 matrices matching the witness count");
        return rep;
    }
    double scale = 1;
    for (const auto& x : xs) scale = std::max(scale, frob_norm(x));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j)
            if (tn_detail::near_zero(xs[i] - xs[j], tol * scale))
                rep.fail("X_" + std::to_string(i + 1) + " equals X_" + std::to_string(j + 1));
    for (std::size_t i = 0; i < cfg.count(); ++i) {
        if (!(cfg.k[i] > S(1))) rep.fail("k_" + std::to_string(i + 1) + " not > 1");
        if (!rank_at_most_one(cfg.c[i], tol)) rep.fail("rank(C_" + std::to_string(i + 1) + ") > 1");
    }
    Matrix<S> sum(cfg.p.rows(), cfg.p.cols());
    for (const auto& ci : cfg.c) sum = sum + ci;
    if (!tn_detail::near_zero(sum, tol * scale)) rep.fail("sum of C_i is not zero");
    auto rebuilt = assemble(cfg);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double res = tn_detail::residual_norm(xs[i] - rebuilt[i]);
        rep.max_residual = std::max(rep.max_residual, res);
        if (!tn_detail::near_zero(xs[i] - rebuilt[i], tol * scale))
            rep.fail("reconstruction residual at X_" + std::to_string(i + 1));
    }
    return rep;
}

/// A witness is nondegenerate when every leg has rank exactly one.
template <typename S>
bool is_nondegenerate(const TnConfig<S>& cfg, double tol = 1e-9) {
    for (const auto& ci : cfg.c)
        if (tn_detail::near_zero(ci, tol)) return false;
    return true;
}

/// Wave-cone membership for a stacked triple: X = u (x) xi with Y xi = 0
/// and Z xi = 0. Returns the direction and the factor u when they exist.
template <typename S>
struct WaveConeWitness {
    std::vector<S> xi;
    std::vector<S> u;
};

template <typename S>
std::optional<WaveConeWitness<S>> lambda_dc_member(const Matrix<S>& x, const Matrix<S>& y,
                                                   const Matrix<S>& z, double tol = 1e-10) {
    std::size_t m = x.cols();
    if (y.cols() != m || z.cols() != m || z.rows() != m)
        throw std::invalid_argument("wave-cone blocks must share the column count");
    if (!rank_at_most_one(x, tol)) return std::nullopt;

    auto try_direction = [&](std::vector<S> xi) -> std::optional<WaveConeWitness<S>> {
        // normalize: floats to unit norm, rationals projectively
        if constexpr (std::is_same_v<S, Rational>) {
            for (std::size_t j = 0; j < m; ++j)
                if (xi[j] != 0) {
                    S lead = xi[j];
                    for (auto& v : xi) v /= lead;
                    break;
                }
        } else {
            double nn = 0;
            for (auto v : xi) nn += to_double(v) * to_double(v);
            nn = std::sqrt(nn);
            if (nn == 0) return std::nullopt;
            for (auto& v : xi) v /= nn;
        }
        auto zero_vec = [&](const std::vector<S>& v) {
            if constexpr (std::is_same_v<S, Rational>) {
                for (const auto& e : v)
                    if (e != 0) return false;
                return true;
            } else {
                double s = 0;
                for (auto e : v) s += e * e;
                return std::sqrt(s) <= tol * (1 + frob_norm(y) + frob_norm(z));
            }
        };
        if (!zero_vec(matvec(y, xi)) || !zero_vec(matvec(z, xi))) return std::nullopt;
        // u from X = u (x) xi: least-squares factor, exact when consistent
        std::vector<S> u(x.rows(), S(0));
        S g(0);
        for (const auto& v : xi) g += v * v;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            S dot(0);
            for (std::size_t j = 0; j < m; ++j) dot += x(i, j) * xi[j];
            u[i] = dot / g;
        }
        if (!tn_detail::near_zero(x - outer(u, xi), tol * (1 + frob_norm(x))))
            return std::nullopt;
        return WaveConeWitness<S>{xi, u};
    };

    bool x_zero = tn_detail::near_zero(x, tol);
    if (!x_zero) {
        // direction spans the row space of the rank-one X
        std::size_t best = 0;
        double bestn = -1;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double rn = 0;
            for (std::size_t j = 0; j < m; ++j) rn += to_double(x(i, j)) * to_double(x(i, j));
            if (rn > bestn) { bestn = rn; best = i; }
        }
        return try_direction(x.row(best));
    }
    // X = 0: any common kernel direction of Y and Z qualifies
    Matrix<S> stacked(y.rows() + z.rows(), m);
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < m; ++j) stacked(i, j) = y(i, j);
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < m; ++j) stacked(y.rows() + i, j) = z(i, j);
    auto basis = kernel(stacked, tol);
    if (basis.empty()) return std::nullopt;
    return try_direction(basis.front());
}

/// Verifies a stacked T'-witness: block reconstruction, wave-cone
/// membership of each increment triple with its shared direction, zero
/// sums, and the derived orthogonality <C_i, D_i> = 0.
template <typename S>
CheckReport check_tn_prime(const std::vector<Matrix<S>>& stacked, const TnPrimeConfig<S>& cfg,
                           double tol = 1e-9) {
    CheckReport rep;
    std::size_t nn = cfg.x.nrows(), m = cfg.x.ncols(), cnt = cfg.count();
    if (stacked.size() != cnt || cnt < 2) {
        rep.fail("need >= 2 stacked matrices matching the witness count");
        return rep;
    }
    for (const auto& a : stacked)
        if (a.rows() != 2 * nn + m || a.cols() != m) {
            rep.fail("stacked block shape mismatch");
            return rep;
        }
    double scale = 1;
    for (const auto& a : stacked) scale = std::max(scale, frob_norm(a));
    for (std::size_t i = 0; i < cnt; ++i)
        for (std::size_t j = i + 1; j < cnt; ++j)
            if (tn_detail::near_zero(stacked[i] - stacked[j], tol * scale))
                rep.fail("A_" + std::to_string(i + 1) + " equals A_" + std::to_string(j + 1));

    auto slice = [&](const Matrix<S>& a, std::size_t r0, std::size_t rows) {
        Matrix<S> out(rows, m);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < m; ++j) out(i, j) = a(r0 + i, j);
        return out;
    };

    // reconstruction of all three blocks with shared k
    TnConfig<S> ycfg{cfg.q, cfg.d, cfg.x.k};
    TnConfig<S> zcfg{cfg.r, cfg.e, cfg.x.k};
    auto xr = assemble(cfg.x), yr = assemble(ycfg), zr = assemble(zcfg);
    for (std::size_t i = 0; i < cnt; ++i) {
        Matrix<S> res = slice(stacked[i], 0, nn) - xr[i];
        Matrix<S> resy = slice(stacked[i], nn, nn) - yr[i];
        Matrix<S> resz = slice(stacked[i], 2 * nn, m) - zr[i];
        rep.max_residual = std::max({rep.max_residual, tn_detail::residual_norm(res),
                                     tn_detail::residual_norm(resy), tn_detail::residual_norm(resz)});
        if (!tn_detail::near_zero(res, tol * scale) || !tn_detail::near_zero(resy, tol * scale) ||
            !tn_detail::near_zero(resz, tol * scale))
            rep.fail("block reconstruction residual at A_" + std::to_string(i + 1));
    }
    for (std::size_t i = 0; i < cnt; ++i) {
        if (!(cfg.x.k[i] > S(1))) rep.fail("k_" + std::to_string(i + 1) + " not > 1");
        const auto& ni = cfg.n_dir[i];
        // C_i v = 0 for v orth to n_i  <=>  C_i = u (x) n_i
        auto w = lambda_dc_member(cfg.x.c[i], cfg.d[i], cfg.e[i], tol);
        bool ok = false;
        if (w) {
            // shared direction must be n_i (projectively)
            S cross(0);
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = a + 1; b < m; ++b)
                    cross += (w->xi[a] * ni[b] - w->xi[b] * ni[a]) * (w->xi[a] * ni[b] - w->xi[b] * ni[a]);
            if constexpr (std::is_same_v<S, Rational>) ok = (cross == 0);
            else ok = to_double(cross) <= tol;
        } else {
            // zero triple is allowed only if declared direction still kills D and E
            bool all_zero = tn_detail::near_zero(cfg.x.c[i], tol) &&
                            tn_detail::near_zero(cfg.d[i], tol) && tn_detail::near_zero(cfg.e[i], tol);
            ok = all_zero;
        }
        if (!ok) rep.fail("wave-cone violation at increment " + std::to_string(i + 1));
        // direct kernel conditions against the declared direction
        auto dv = matvec(cfg.d[i], ni);
        auto ev = matvec(cfg.e[i], ni);
        auto vec_zero = [&](const std::vector<S>& v) {
            if constexpr (std::is_same_v<S, Rational>) {
                for (const auto& e2 : v)
                    if (e2 != 0) return false;
                return true;
            } else {
                double s = 0;
                for (auto e2 : v) s += e2 * e2;
                return std::sqrt(s) <= tol * scale;
            }
        };
        if (!vec_zero(dv)) rep.fail("D_" + std::to_string(i + 1) + " n_" + std::to_string(i + 1) + " != 0");
        if (!vec_zero(ev)) rep.fail("E_" + std::to_string(i + 1) + " n_" + std::to_string(i + 1) + " != 0");
        // derived property: <C_i, D_i> = 0
        S ip = frobenius_inner(cfg.x.c[i], cfg.d[i]);
        if constexpr (std::is_same_v<S, Rational>) {
            if (ip != 0) rep.fail("<C_i,D_i> != 0 at " + std::to_string(i + 1));
        } else {
            if (std::abs(to_double(ip)) > tol * scale * scale)
                rep.fail("<C_i,D_i> != 0 at " + std::to_string(i + 1));
        }
    }
    auto zero_sum = [&](const std::vector<Matrix<S>>& ms, const char* name) {
        Matrix<S> s(ms[0].rows(), ms[0].cols());
        for (const auto& mm : ms) s = s + mm;
        if (!tn_detail::near_zero(s, tol * scale)) rep.fail(std::string(name) + " do not sum to zero");
    };
    zero_sum(cfg.x.c, "C_i");
    zero_sum(cfg.d, "D_i");
    zero_sum(cfg.e, "E_i");
    // distinct X rows induce a plain configuration
    bool xdistinct = true;
    for (std::size_t i = 0; i < cnt && xdistinct; ++i)
        for (std::size_t j = i + 1; j < cnt; ++j)
            if (tn_detail::near_zero(xr[i] - xr[j], tol * scale)) { xdistinct = false; break; }
    if (xdistinct) {
        auto sub = check_tn(xr, cfg.x, tol);
        if (!sub.pass) rep.fail("X-block fails as a plain configuration: " + sub.summary());
    }
    return rep;
}

/// Result of the identity sweep over a configuration: barycentric sums,
/// minor sums for every order, and the quadratic leg identity.
struct IdentityReport {
    bool pass = true;
    double max_defect = 0;
    std::vector<std::string> failures;
};

template <typename S>
IdentityReport identity_suite(const TnPrimeConfig<S>& cfg, double tol = 1e-11) {
    IdentityReport rep;
    const auto& k = cfg.x.k;
    auto dv = defining_vector(k);
    std::size_t cnt = cfg.count();
    auto xs = assemble(cfg.x);
    TnConfig<S> ycfg{cfg.q, cfg.d, k};
    TnConfig<S> zcfg{cfg.r, cfg.e, k};
    auto ys = assemble(ycfg), zs = assemble(zcfg);

    auto check_zero = [&](const Matrix<S>& m, const std::string& what) {
        double res = frob_norm(m);
        rep.max_defect = std::max(rep.max_defect, res);
        bool ok;
        if constexpr (std::is_same_v<S, Rational>) ok = tn_detail::near_zero(m, 0);
        else ok = res <= tol;
        if (!ok) {
            rep.pass = false;
            rep.failures.push_back(what);
        }
    };
    auto check_zero_s = [&](const S& v, const std::string& what) {
        double res = std::abs(to_double(v));
        rep.max_defect = std::max(rep.max_defect, res);
        bool ok;
        if constexpr (std::is_same_v<S, Rational>) ok = (v == 0);
        else ok = res <= tol;
        if (!ok) {
            rep.pass = false;
            rep.failures.push_back(what);
        }
    };

    // barycentric block sums: sum_j t^i_j W_j = base + increments below i
    for (std::size_t i = 0; i < cnt; ++i) {
        Matrix<S> sx(cfg.x.p.rows(), cfg.x.p.cols());
        Matrix<S> sy(cfg.q.rows(), cfg.q.cols());
        Matrix<S> sz(cfg.r.rows(), cfg.r.cols());
        for (std::size_t j = 0; j < cnt; ++j) {
            sx = sx + dv.t[i][j] * xs[j];
            sy = sy + dv.t[i][j] * ys[j];
            sz = sz + dv.t[i][j] * zs[j];
        }
        Matrix<S> px = cfg.x.p, py = cfg.q, pz = cfg.r;
        for (std::size_t j = 0; j < i; ++j) {
            px = px + cfg.x.c[j];
            py = py + cfg.d[j];
            pz = pz + cfg.e[j];
        }
        check_zero(sx - px, "barycentric sum defect on X at i=" + std::to_string(i + 1));
        check_zero(sy - py, "barycentric sum defect on Y at i=" + std::to_string(i + 1));
        check_zero(sz - pz, "barycentric sum defect on Z at i=" + std::to_string(i + 1));
    }

    // minor sums for all orders >= 2 (order 1 is the linear case above)
    std::size_t n = cfg.x.p.rows(), m = cfg.x.p.cols();
    for (std::size_t r = 2; r <= std::min(n, m); ++r) {
        for (const auto& z : all_index_pairs(n, m, r)) {
            for (std::size_t i = 0; i < cnt; ++i) {
                Matrix<S> pi = cfg.x.p;
                for (std::size_t j = 0; j < i; ++j) pi = pi + cfg.x.c[j];
                S lhs(0);
                for (std::size_t j = 0; j < cnt; ++j)
                    lhs += dv.t[i][j] * det(minor_matrix(xs[j], z));
                S rhs = det(minor_matrix(pi, z));
                check_zero_s(lhs - rhs, "minor-sum defect at i=" + std::to_string(i + 1));
            }
        }
    }

    // quadratic leg identity:
    // sum_j lambda_j (X_j - P)^T (Y_j - Q) = sum_j k_j (k_j - 1) lambda_j C_j^T D_j
    Matrix<S> lhs(m, m), rhs(m, m);
    for (std::size_t j = 0; j < cnt; ++j) {
        lhs = lhs + dv.lambda[j] * ((xs[j] - cfg.x.p).transposed() * (ys[j] - cfg.q));
        rhs = rhs + (k[j] * (k[j] - S(1)) * dv.lambda[j]) * (cfg.x.c[j].transposed() * cfg.d[j]);
    }
    check_zero(lhs - rhs, "quadratic leg identity defect");
    return rep;
}

/// identity_suite for a plain configuration: wraps it as a stacked one
/// with zero Y/Z blocks.
template <typename S>
IdentityReport identity_suite(const TnConfig<S>& cfg, double tol = 1e-11) {
    TnPrimeConfig<S> wrapped;
    wrapped.x = cfg;
    std::size_t m = cfg.ncols(), n = cfg.nrows();
    wrapped.q = Matrix<S>(n, m);
    wrapped.r = Matrix<S>(m, m);
    wrapped.d.assign(cfg.count(), Matrix<S>(n, m));
    wrapped.e.assign(cfg.count(), Matrix<S>(m, m));
    wrapped.n_dir.assign(cfg.count(), std::vector<S>(m, S(0)));
    return identity_suite(wrapped, tol);
}

/// Detection result: the witness plus solver diagnostics.
struct DetectResult {
    TnConfig<double> config;
    DefiningVector<double> dv;
    double residual = 0;
    int wins = 0; // multistarts that reached the same minimum
};

/// Searches for (lambda, mu) making all minor sums of the differences
/// vanish, then reconstructs and validates the witness. Deterministic in
/// the seed; returns nullopt when no start reaches the residual target.
std::optional<DetectResult> detect_tn(const std::vector<FMat>& xs, std::uint64_t seed = 1,
                                      int starts = 32, double target = 1e-9);

} // namespace dci
