#include <dci/tn.hpp>

#include <cmath>
#include <random>

namespace dci {

namespace {

struct Param {
    std::vector<double> a; // N-1 free logits, last fixed at 0
    double b;              // mu = 1 + 1e-6 + exp(b)

    std::size_t dim() const { return a.size() + 1; }
};

void unpack(const Param& p, std::vector<double>& lambda, double& mu) {
    std::size_t n = p.a.size() + 1;
    lambda.resize(n);
    double mx = 0;
    for (double v : p.a) mx = std::max(mx, v);
    double tot = std::exp(0.0 - mx);
    for (std::size_t i = 0; i + 1 < n; ++i) tot += std::exp(p.a[i] - mx);
    for (std::size_t i = 0; i + 1 < n; ++i) lambda[i] = std::exp(p.a[i] - mx) / tot;
    lambda[n - 1] = std::exp(0.0 - mx) / tot;
    mu = 1.0 + 1e-6 + std::exp(p.b);
}

// packed[i * n + j] holds the determinants of all order>=2 minors of
// X_j - X_i as a column.
std::vector<double> residual(std::size_t n, const std::vector<FMat>& packed,
                             const std::vector<double>& lambda, double mu) {
    auto dv = defining_vector_from_lambda_mu(lambda, mu);
    std::vector<double> out;
    out.reserve(n * packed[0].rows());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t nmin = packed[i * n].rows();
        for (std::size_t q = 0; q < nmin; ++q) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += dv.t[i][j] * packed[i * n + j](q, 0);
            out.push_back(s);
        }
    }
    return out;
}

} // namespace

std::optional<DetectResult> detect_tn(const std::vector<FMat>& xs, std::uint64_t seed, int starts,
                                      double target) {
    std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("need at least two matrices");
    std::size_t rows = xs[0].rows(), cols = xs[0].cols();
    double scale = 1;
    for (const auto& x : xs) scale = std::max(scale, frob_norm(x));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (frob_norm(xs[i] - xs[j]) <= 1e-12 * scale)
                throw std::invalid_argument("matrices must be pairwise distinct");

    // precompute all order>=2 minors of every difference
    std::vector<MultiIndexPair> zs;
    for (std::size_t r = 2; r <= std::min(rows, cols); ++r)
        for (const auto& z : all_index_pairs(rows, cols, r)) zs.push_back(z);
    if (zs.empty()) throw std::invalid_argument("need at least one order-2 minor");
    std::vector<FMat> packed(n * n, FMat(zs.size(), 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            FMat d = xs[j] - xs[i];
            for (std::size_t q = 0; q < zs.size(); ++q)
                packed[i * n + j](q, 0) = det(minor_matrix(d, zs[q]));
        }

    auto eval = [&](const Param& p) {
        std::vector<double> lambda;
        double mu;
        unpack(p, lambda, mu);
        return residual(n, packed, lambda, mu);
    };

    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expd(1.0);
    std::uniform_real_distribution<double> unif(std::log(1.1), std::log(20.0));

    struct Candidate {
        double rn = std::numeric_limits<double>::infinity();
        double mu = std::numeric_limits<double>::infinity();
        Param p;
    };
    std::vector<Candidate> candidates;

    for (int s = 0; s < starts; ++s) {
        // Dirichlet(1) start for lambda
        std::vector<double> lam(n);
        double tot = 0;
        for (auto& l : lam) {
            l = expd(rng) + 1e-6;
            tot += l;
        }
        for (auto& l : lam) l /= tot;
        Param p;
        p.a.resize(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) p.a[i] = std::log(lam[i] / lam[n - 1]);
        p.b = unif(rng);

        double lm = 1e-4;
        auto r = eval(p);
        double rn2 = 0;
        for (double v : r) rn2 += v * v;
        for (int it = 0; it < 250; ++it) {
            std::size_t dim = p.dim();
            // numeric Jacobian
            FMat jt_j(dim, dim);
            std::vector<double> jt_r(dim, 0.0);
            std::vector<std::vector<double>> jac(r.size(), std::vector<double>(dim));
            const double h = 1e-7;
            for (std::size_t q = 0; q < dim; ++q) {
                Param pp = p;
                if (q + 1 < dim) pp.a[q] += h;
                else pp.b += h;
                auto rp = eval(pp);
                for (std::size_t t = 0; t < r.size(); ++t) jac[t][q] = (rp[t] - r[t]) / h;
            }
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < dim; ++b) {
                    double s2 = 0;
                    for (std::size_t t = 0; t < r.size(); ++t) s2 += jac[t][a] * jac[t][b];
                    jt_j(a, b) = s2;
                }
                double s2 = 0;
                for (std::size_t t = 0; t < r.size(); ++t) s2 += jac[t][a] * r[t];
                jt_r[a] = s2;
            }
            // Levenberg-Marquardt step
            bool advanced = false;
            for (int tries = 0; tries < 8 && !advanced; ++tries) {
                FMat lhs = jt_j;
                for (std::size_t a = 0; a < dim; ++a) lhs(a, a) += lm * (1 + jt_j(a, a));
                std::vector<double> rhs(dim);
                for (std::size_t a = 0; a < dim; ++a) rhs[a] = -jt_r[a];
                auto dx = solve(lhs, rhs, 1e-300);
                if (!dx) { lm *= 10; continue; }
                Param pn = p;
                for (std::size_t a = 0; a + 1 < dim; ++a)
                    pn.a[a] += std::clamp((*dx)[a], -3.0, 3.0);
                pn.b += std::clamp((*dx)[dim - 1], -3.0, 3.0);
                pn.b = std::clamp(pn.b, -30.0, 30.0);
                auto rn = eval(pn);
                double rn2n = 0;
                for (double v : rn) rn2n += v * v;
                if (rn2n < rn2) {
                    p = pn;
                    r = rn;
                    rn2 = rn2n;
                    lm = std::max(lm * 0.3, 1e-12);
                    advanced = true;
                } else {
                    lm *= 10;
                }
            }
            if (!advanced || rn2 < 1e-30 * scale * scale) break;
        }
        double rn = std::sqrt(rn2);
        std::vector<double> lambda;
        double mu;
        unpack(p, lambda, mu);
        candidates.push_back({rn, mu, p});
    }

    // Feasible roots of the minor-sum system are not always witnesses
    // (spurious solutions reconstruct with some k_i <= 1), so validate
    // every converged candidate and keep the best one that passes.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (std::abs(a.rn - b.rn) > 1e-13) return a.rn < b.rn;
        return a.mu < b.mu;
    });
    std::optional<DetectResult> best_valid;
    int wins = 0;
    for (const auto& cand : candidates) {
        if (cand.rn > target * scale) break;
        std::vector<double> lambda;
        double mu;
        unpack(cand.p, lambda, mu);
        auto dv = defining_vector_from_lambda_mu(lambda, mu);

        // reconstruct the witness from the barycentric sums
        std::vector<FMat> pbar(n, FMat(rows, cols));
        for (std::size_t i = 0; i < n; ++i) {
            FMat s(rows, cols);
            for (std::size_t j = 0; j < n; ++j) s = s + dv.t[i][j] * xs[j];
            pbar[i] = s;
        }
        TnConfig<double> cfg;
        cfg.p = pbar[0];
        cfg.c.resize(n, FMat(rows, cols));
        FMat csum(rows, cols);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            cfg.c[i] = pbar[i + 1] - pbar[i];
            csum = csum + cfg.c[i];
        }
        cfg.c[n - 1] = -csum;
        cfg.k.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double num = frobenius_inner(xs[i] - pbar[i], cfg.c[i]);
            double den = frobenius_inner(cfg.c[i], cfg.c[i]);
            cfg.k[i] = den > 0 ? num / den : 0.0;
        }
        auto rep = check_tn(xs, cfg, target / scale);
        double res = std::max(cand.rn, rep.max_residual);
        if (rep.pass && res <= target * scale) {
            if (!best_valid) best_valid = DetectResult{cfg, dv, res, 0};
            ++wins;
        }
    }
    if (best_valid) best_valid->wins = wins;
    return best_valid;
}

} // namespace dci
