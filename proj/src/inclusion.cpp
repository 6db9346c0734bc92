#include <dci/inclusion.hpp>

namespace dci {

FMat fd_gradient(const std::function<double(const FMat&)>& f, const FMat& x) {
    double h = 1e-5 * (1.0 + frob_norm(x));
    FMat g(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            FMat xp = x;
            auto at = [&](double d) {
                xp(i, j) = x(i, j) + d;
                return f(xp);
            };
            g(i, j) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
        }
    return g;
}

FMat IntegrandOracle::grad(const FMat& x) const {
    if (gradient) return gradient(x);
    return fd_gradient(value, x);
}

InclusionPoint<double> kf_point(const IntegrandOracle& f, const FMat& x) {
    InclusionPoint<double> p;
    p.x = x;
    p.c = f.value(x);
    p.y = f.grad(x);
    p.z = x.transposed() * p.y - p.c * FMat::identity(x.cols());
    p.beta = 1.0;
    if (f.minor_derivatives) p.dz = f.minor_derivatives(x);
    return p;
}

template <typename S>
Matrix<S> rotation_j() {
    Matrix<S> j(2, 2);
    j(0, 1) = S(-1);
    j(1, 0) = S(1);
    return j;
}
template RMat rotation_j<Rational>();
template FMat rotation_j<double>();

namespace {

template <typename S>
S minor_gap_term(const InclusionPoint<S>& pi, const Matrix<S>& xj) {
    // sum over stored minor derivatives of
    //   <cof(Xi^Z)^T, Xj^Z - Xi^Z> - det(Xj^Z) + det(Xi^Z)
    S acc(0);
    for (const auto& [key, d] : pi.dz) {
        MultiIndexPair z{key.rows, key.cols};
        Matrix<S> xiz = minor_matrix(pi.x, z);
        Matrix<S> xjz = minor_matrix(xj, z);
        S term = frobenius_inner(adjugate(xiz).transposed(), xjz - xiz) - det(xjz) + det(xiz);
        acc += d * term;
    }
    return acc;
}

template <typename S>
bool is_neg(const S& v, double margin) {
    if constexpr (std::is_same_v<S, Rational>) {
        (void)margin;
        return v < 0;
    } else {
        return v < -margin;
    }
}

} // namespace

template <typename S>
QijReport<S> qij_report(const std::vector<InclusionPoint<S>>& pts, QijVariant variant,
                        const TnConfig<S>* witness, double strict_margin) {
    std::size_t n = pts.size();
    if (n < 2) throw std::invalid_argument("need at least two points");
    QijReport<S> rep;
    rep.q = Matrix<S>(n, n);
    Matrix<S> j2 = rotation_j<S>();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t jj = 0; jj < n; ++jj) {
            if (i == jj) continue;
            const auto& pi = pts[i];
            const auto& pj = pts[jj];
            S q(0);
            if (variant == QijVariant::curl) {
                if (pi.x.rows() != 2 || pi.x.cols() != 2)
                    throw std::invalid_argument("curl variant expects 2x2 blocks");
                q = pi.c - pj.c + pi.d_full() * det(pi.x - pj.x) +
                    frobenius_inner(pi.x - pj.x, pi.y * j2) / pi.beta;
            } else {
                q = pi.c - pj.c + frobenius_inner(pi.y, pj.x - pi.x) / pi.beta -
                    minor_gap_term(pi, pj.x);
            }
            rep.q(i, jj) = q;
            if (!is_neg(q, strict_margin)) rep.violations.push_back({i, jj});
        }
    }
    rep.strictly_negative = rep.violations.empty();
    if (witness) {
        if (witness->count() != n) throw std::invalid_argument("witness size mismatch");
        auto dv = defining_vector(witness->k);
        rep.nu.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            // effective unrotated Y for the support inequalities
            Matrix<S> yi = pts[i].y;
            if (variant == QijVariant::curl) yi = S(-1) * (pts[i].y * j2);
            S nu = pts[i].beta * pts[i].c - pts[i].beta * [&] {
                S s(0);
                for (std::size_t j = 0; j < n; ++j) s += dv.t[i][j] * pts[j].c;
                return s;
            }() - witness->k[i] * frobenius_inner(yi, witness->c[i]);
            rep.nu[i] = nu;
        }
    }
    return rep;
}

template QijReport<Rational> qij_report(const std::vector<InclusionPoint<Rational>>&, QijVariant,
                                        const TnConfig<Rational>*, double);
template QijReport<double> qij_report(const std::vector<InclusionPoint<double>>&, QijVariant,
                                      const TnConfig<double>*, double);

template <typename S>
TecReport<S> tec_check(const TnPrimeConfig<S>& cfg, const std::vector<S>& beta,
                       const std::vector<S>& c, double tol) {
    std::size_t n = cfg.count(), m = cfg.x.ncols();
    if (beta.size() != n || c.size() != n)
        throw std::invalid_argument("beta/c size mismatch");
    TecReport<S> rep;

    auto near_zero = [&](const Matrix<S>& mm) {
        if constexpr (std::is_same_v<S, Rational>) return tn_detail::near_zero(mm, 0);
        else return frob_norm(mm) <= tol;
    };

    if (!near_zero(cfg.x.p)) rep.precondition_failures.push_back("base point is not zero");
    auto xs = assemble(cfg.x);
    TnConfig<S> ycfg{cfg.q, cfg.d, cfg.x.k};
    TnConfig<S> zcfg{cfg.r, cfg.e, cfg.x.k};
    auto ys = assemble(ycfg);
    auto zs = assemble(zcfg);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix<S> want = xs[i].transposed() * ys[i] - (beta[i] * c[i]) * Matrix<S>::identity(m);
        if (!near_zero(zs[i] - want))
            rep.precondition_failures.push_back(
                "Z_" + std::to_string(i + 1) +
                " does not equal X^T Y - beta c Id (inclusion-set structure absent)");
    }
    rep.preconditions_hold = rep.precondition_failures.empty();

    auto dv = defining_vector(cfg.x.k);
    rep.mu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        S mui = cfg.x.k[i] * frobenius_inner(cfg.x.c[i], ys[i]) - beta[i] * c[i];
        for (std::size_t j = 0; j < n; ++j) mui += beta[j] * dv.t[i][j] * c[j];
        rep.mu[i] = mui;
    }
    if (!rep.preconditions_hold) return rep;

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<S> lhs(m, S(0));
        for (std::size_t j = 0; j < n; ++j) {
            auto v = matvec(cfg.x.c[j].transposed() * cfg.d[j], cfg.n_dir[i]);
            S f = cfg.x.k[j] * (cfg.x.k[j] - S(1)) * dv.t[i][j];
            for (std::size_t a = 0; a < m; ++a) lhs[a] += f * v[a];
        }
        double defect = 0;
        for (std::size_t a = 0; a < m; ++a)
            defect += std::pow(to_double(lhs[a] - rep.mu[i] * cfg.n_dir[i][a]), 2);
        rep.max_defect = std::max(rep.max_defect, std::sqrt(defect));
    }

    // quadratic leg identity at base zero:
    //   sum_j lambda_j X_j^T Y_j = sum_j k_j (k_j - 1) lambda_j C_j^T D_j
    {
        Matrix<S> lhs(m, m), rhs(m, m);
        for (std::size_t j = 0; j < n; ++j) {
            lhs = lhs + dv.lambda[j] * (xs[j].transposed() * ys[j]);
            rhs = rhs + (cfg.x.k[j] * (cfg.x.k[j] - S(1)) * dv.lambda[j]) *
                            (cfg.x.c[j].transposed() * cfg.d[j]);
        }
        rep.quadratic_identity_defect = frob_norm(lhs - rhs);
    }

    // partial-sum identity for every i:
    //   R + sum_{j<i} E_j = (1/xi_i) [ sum_j k_j(k_j-1) lambda_j C_j^T D_j
    //     + (mu - 1) sum_{j<i} lambda_j X_j^T Y_j ] - sum_j beta_j t^i_j c_j Id
    {
        Matrix<S> full(m, m);
        for (std::size_t j = 0; j < n; ++j)
            full = full + (cfg.x.k[j] * (cfg.x.k[j] - S(1)) * dv.lambda[j]) *
                              (cfg.x.c[j].transposed() * cfg.d[j]);
        for (std::size_t i = 0; i < n; ++i) {
            Matrix<S> lhs = cfg.r;
            for (std::size_t j = 0; j < i; ++j) lhs = lhs + cfg.e[j];
            Matrix<S> partial(m, m);
            for (std::size_t j = 0; j < i; ++j)
                partial = partial + dv.lambda[j] * (xs[j].transposed() * ys[j]);
            S csum(0);
            for (std::size_t j = 0; j < n; ++j) csum += beta[j] * dv.t[i][j] * c[j];
            Matrix<S> rhs = (S(1) / dv.xi[i]) * (full + (dv.mu - S(1)) * partial) -
                            csum * Matrix<S>::identity(m);
            rep.chain_identity_defect =
                std::max(rep.chain_identity_defect, frob_norm(lhs - rhs));
        }
    }
    return rep;
}

template TecReport<Rational> tec_check(const TnPrimeConfig<Rational>&, const std::vector<Rational>&,
                                       const std::vector<Rational>&, double);
template TecReport<double> tec_check(const TnPrimeConfig<double>&, const std::vector<double>&,
                                     const std::vector<double>&, double);

template <typename S>
ConnectionVerdict<S> rank_connection_test(const InclusionPoint<S>& a, const InclusionPoint<S>& b,
                                          double tol) {
    ConnectionVerdict<S> v;
    Matrix<S> dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    double scale = 1 + frob_norm(a.x) + frob_norm(b.x);
    if (frob_norm(dx) <= tol * scale && frob_norm(dy) <= tol * scale &&
        frob_norm(dz) <= tol * scale) {
        v.degenerate = true;
        return v;
    }
    bool a_nonneg, b_nonneg;
    if constexpr (std::is_same_v<S, Rational>) {
        a_nonneg = a.c >= 0;
        b_nonneg = b.c >= 0;
    } else {
        a_nonneg = a.c >= -tol;
        b_nonneg = b.c >= -tol;
    }
    v.theorem_mode = a_nonneg && b_nonneg;
    auto w = lambda_dc_member(dx, dy, dz, tol);
    v.connected = w.has_value();
    if (w) {
        v.witness = w;
        v.coupling = frobenius_inner(dx, a.y);
        v.coupling_expected = b.beta * b.c - a.beta * a.c;
    }
    // strict support gaps: both can hold only when the signed quantities
    // c'(beta' - beta) and c(beta - beta') are negative
    S g = b.beta * b.c - a.beta * a.c;
    S one = a.beta * (a.c - b.c) + g;   // beta (c - c') + (c'b' - cb) < 0
    S two = b.beta * (b.c - a.c) - g;   // beta'(c' - c) - (c'b' - cb) < 0
    if constexpr (std::is_same_v<S, Rational>) v.inequalities_consistent = one < 0 && two < 0;
    else v.inequalities_consistent = one < -tol && two < -tol;
    return v;
}

template ConnectionVerdict<Rational> rank_connection_test(const InclusionPoint<Rational>&,
                                                          const InclusionPoint<Rational>&, double);
template ConnectionVerdict<double> rank_connection_test(const InclusionPoint<double>&,
                                                        const InclusionPoint<double>&, double);

template <typename S>
std::vector<InclusionPoint<S>> shift_nonnegative(const std::vector<InclusionPoint<S>>& pts) {
    if (pts.empty()) return {};
    for (const auto& p : pts)
        if (!(p.beta == S(1)))
            throw std::invalid_argument("only unit-multiplicity points can be shifted");
    S cmin = pts[0].c;
    for (const auto& p : pts)
        if (p.c < cmin) cmin = p.c;
    std::vector<InclusionPoint<S>> out = pts;
    std::size_t m = pts[0].z.rows();
    for (auto& p : out) {
        p.c = p.c - cmin;
        p.z = p.z + cmin * Matrix<S>::identity(m);
    }
    return out;
}

template std::vector<InclusionPoint<Rational>> shift_nonnegative(
    const std::vector<InclusionPoint<Rational>>&);
template std::vector<InclusionPoint<double>> shift_nonnegative(
    const std::vector<InclusionPoint<double>>&);

template <typename S>
bool contradiction_implication(const std::vector<S>& mu, const std::vector<S>& nu,
                               const std::vector<S>& beta, const std::vector<S>& c, double tol) {
    bool all_mu_zero = true, all_c_nonneg = true;
    for (const auto& m : mu)
        if (std::abs(to_double(m)) > tol) all_mu_zero = false;
    for (const auto& ci : c)
        if (to_double(ci) < -tol) all_c_nonneg = false;
    if (!all_mu_zero || !all_c_nonneg) return true; // premises fail, nothing to check
    std::size_t sigma = 0;
    for (std::size_t i = 1; i < beta.size(); ++i)
        if (beta[i] < beta[sigma]) sigma = i;
    return to_double(nu[sigma]) >= -tol;
}

template bool contradiction_implication(const std::vector<Rational>&, const std::vector<Rational>&,
                                        const std::vector<Rational>&, const std::vector<Rational>&,
                                        double);
template bool contradiction_implication(const std::vector<double>&, const std::vector<double>&,
                                        const std::vector<double>&, const std::vector<double>&,
                                        double);

} // namespace dci
