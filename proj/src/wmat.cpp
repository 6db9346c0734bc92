#include <dci/wmat.hpp>

namespace dci {

namespace {

template <typename S>
std::vector<std::vector<S>> window_basis(const TnPrimeConfig<S>& cfg,
                                         const std::vector<std::size_t>& sbar) {
    std::vector<std::vector<S>> basis;
    for (auto s : sbar) basis.push_back(cfg.n_dir[s % cfg.count()]);
    return basis;
}

} // namespace

template <typename S>
MMatrixReport<S> m_matrices(const TnPrimeConfig<S>& cfg, const std::vector<S>& beta,
                            const std::vector<S>& c, double tol) {
    std::size_t n = cfg.count();
    std::size_t m = cfg.x.ncols();
    if (beta.size() != n || c.size() != n)
        throw std::invalid_argument("beta and c must match the configuration size");
    auto dv = defining_vector(cfg.x.k);

    MMatrixReport<S> rep;
    std::vector<Matrix<S>> ctd;
    for (std::size_t j = 0; j < n; ++j) ctd.push_back(cfg.x.c[j].transposed() * cfg.d[j]);

    std::vector<S> alpha(n);
    for (std::size_t j = 0; j < n; ++j)
        alpha[j] = cfg.x.k[j] * (cfg.x.k[j] - S(1)) * dv.lambda[j];

    for (std::size_t i = 0; i < n; ++i) {
        Matrix<S> mi(m, m);
        for (std::size_t j = 0; j < n; ++j) {
            S w = (j < i) ? dv.mu * alpha[j] : alpha[j];
            mi = mi + w * ctd[j];
        }
        rep.m.push_back(mi);
    }

    // trace-free: each C_j^T D_j has trace <C_j, D_j> = 0
    rep.traces_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        S tr = rep.m[i].trace();
        bool zero;
        if constexpr (std::is_same_v<S, Rational>) zero = (tr == 0);
        else zero = std::abs(to_double(tr)) <= tol;
        if (!zero) {
            rep.traces_zero = false;
            rep.notes.push_back("trace of M_" + std::to_string(i + 1) + " nonzero");
        }
    }

    // trace-identity values from the stacked data
    TnConfig<S> ycfg{cfg.q, cfg.d, cfg.x.k};
    auto ys = assemble(ycfg);
    for (std::size_t i = 0; i < n; ++i) {
        S mui = cfg.x.k[i] * frobenius_inner(cfg.x.c[i], ys[i]) - beta[i] * c[i];
        for (std::size_t j = 0; j < n; ++j) mui += beta[j] * dv.t[i][j] * c[j];
        rep.mu_values.push_back(mui);
    }

    // structural span relation: (M_i - M_{i+a}) n_{i+a} lies in the span
    // of n_i .. n_{i+a-1}; holds for any wave-cone increments
    rep.span_structure = true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 1; a < n; ++a) {
            std::size_t ia = i + a;
            Matrix<S> diffm(m, m);
            if (ia < n) diffm = rep.m[i] - rep.m[ia];
            else diffm = rep.m[i] - dv.mu * rep.m[ia - n];
            auto v = matvec(diffm, cfg.n_dir[ia % n]);
            std::vector<std::vector<S>> sp;
            for (std::size_t b = 0; b < a; ++b) sp.push_back(cfg.n_dir[(i + b) % n]);
            bool zero = true;
            for (const auto& x : v) {
                if constexpr (std::is_same_v<S, Rational>) {
                    if (x != 0) zero = false;
                } else {
                    if (std::abs(to_double(x)) > tol) zero = false;
                }
            }
            if (!zero && !wmat_detail::in_span(sp, v, tol)) {
                rep.span_structure = false;
                rep.notes.push_back("span relation fails at i=" + std::to_string(i + 1) +
                                    ", a=" + std::to_string(a));
            }
        }
    }

    // triangular representation in the window basis: express M_i on the
    // basis n_s, s in Sbar_i (completed orthogonally when C < m) and check
    // strict lower entries vanish while the diagonal carries xi_s mu_s,
    // mu-scaled past the wrap
    NormalFamily<S> normals{cfg.n_dir};
    rep.triangular = true;
    WStructure<S> ws;
    try {
        ws = build_w(normals, dv.mu, tol);
    } catch (const std::exception& e) {
        rep.triangular = false;
        rep.notes.push_back(std::string("window scan failed: ") + e.what());
        return rep;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto basis = window_basis(cfg, ws.sbar[i]);
        std::size_t cc = basis.size();
        Matrix<S> rows(cc, m);
        for (std::size_t r = 0; r < cc; ++r)
            for (std::size_t q = 0; q < m; ++q) rows(r, q) = basis[r][q];
        for (const auto& extra : kernel(rows, tol)) basis.push_back(extra);
        Matrix<S> bmat(m, m);
        for (std::size_t col = 0; col < m; ++col)
            for (std::size_t q = 0; q < m; ++q) bmat(q, col) = basis[col][q];
        for (std::size_t col = 0; col < m; ++col) {
            auto img = matvec(rep.m[i], basis[col]);
            auto coords = solve(bmat, img, tol);
            if (!coords) {
                rep.triangular = false;
                rep.notes.push_back("window basis is singular at i=" + std::to_string(i + 1));
                continue;
            }
            for (std::size_t row = 0; row < m; ++row) {
                S want(0);
                bool diag = (row == col && col < cc);
                if (diag) {
                    std::size_t s = ws.sbar[i][col];
                    std::size_t jmod = s % n;
                    want = S(dv.xi[jmod] * rep.mu_values[jmod]);
                    if (s >= n) want = S(dv.mu * want);
                }
                bool strict_lower = row > col && col < cc;
                bool bottom_right = row >= cc && col >= cc;
                if (!diag && !strict_lower && !bottom_right) continue;
                S defect = (*coords)[row] - want;
                bool zero;
                if constexpr (std::is_same_v<S, Rational>) zero = (defect == 0);
                else zero = std::abs(to_double(defect)) <= tol * 10;
                if (!zero) {
                    rep.triangular = false;
                    rep.notes.push_back("triangular defect at i=" + std::to_string(i + 1) +
                                        " entry (" + std::to_string(row + 1) + "," +
                                        std::to_string(col + 1) + ")");
                }
            }
        }
    }
    return rep;
}

template MMatrixReport<Rational> m_matrices(const TnPrimeConfig<Rational>&,
                                            const std::vector<Rational>&,
                                            const std::vector<Rational>&, double);
template MMatrixReport<double> m_matrices(const TnPrimeConfig<double>&,
                                          const std::vector<double>&, const std::vector<double>&,
                                          double);

} // namespace dci
