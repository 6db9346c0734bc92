#pragma once

#include <dci/tn.hpp>

#include <set>

namespace dci {

/// Cyclic family of kernel directions n_1..n_N (n_{i+N} = n_i). Exact
/// mode keeps rational directions projectively; float mode expects unit
/// vectors.
template <typename S>
struct NormalFamily {
    std::vector<std::vector<S>> n;

    std::size_t count() const { return n.size(); }
    std::size_t dim() const { return n.empty() ? 0 : n.front().size(); }
    const std::vector<S>& at(std::size_t i) const { return n[i % n.size()]; }
};

/// Index combinatorics of the spectral bookkeeping: the greedy window
/// bases Sbar_i over {1..2N}, their mod-N versions split into upper and
/// lower parts, and the 0/1/mu matrix they generate.
template <typename S>
struct WStructure {
    std::vector<std::vector<std::size_t>> sbar; // 0-based indices in [0, 2N)
    std::vector<std::set<std::size_t>> s_mod;   // mod-N index sets
    std::vector<std::set<std::size_t>> s_upper; // entries >= i (value 1)
    std::vector<std::set<std::size_t>> s_lower; // entries < i (value mu)
    std::size_t common_cardinality = 0;
    Matrix<S> w;
    S mu;
};

/// Certificate of the kernel reduction: one equation x_i = a_i x_{h(i)}
/// per consecutive row difference, with a_i = 1 when h(i) > i and mu
/// otherwise (h(i) = i encodes (1 - mu) x_i = 0).
template <typename S>
struct ReductionCertificate {
    std::vector<std::size_t> h;
    std::vector<S> a;
    bool trivial = false;
    std::string detail;
};

template <typename S>
struct KernelVerdict {
    bool trivial_by_elimination = false;
    bool trivial_by_reduction = false;
    std::vector<std::vector<S>> kernel_basis;
    ReductionCertificate<S> reduction;

    bool agree() const { return trivial_by_elimination == trivial_by_reduction; }
    bool trivial() const { return trivial_by_elimination; }
};

namespace wmat_detail {

template <typename S>
bool parallel(const std::vector<S>& a, const std::vector<S>& b, double tol) {
    if constexpr (std::is_same_v<S, Rational>) {
        (void)tol;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j)
                if (a[i] * b[j] - a[j] * b[i] != 0) return false;
        return true;
    } else {
        double na = 0, nb = 0, cross = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                double c = a[i] * b[j] - a[j] * b[i];
                cross += c * c;
            }
        return cross <= tol * tol * na * nb;
    }
}

/// Span-membership via a rank test; exact on rationals, Gram-based
/// tolerance on floats.
template <typename S>
bool in_span(const std::vector<std::vector<S>>& have, const std::vector<S>& cand, double tol) {
    if (have.empty()) return false;
    Matrix<S> m(have.size() + 1, cand.size());
    for (std::size_t i = 0; i < have.size(); ++i)
        for (std::size_t j = 0; j < cand.size(); ++j) m(i, j) = have[i][j];
    for (std::size_t j = 0; j < cand.size(); ++j) m(have.size(), j) = cand[j];
    Matrix<S> base(have.size(), cand.size());
    for (std::size_t i = 0; i < have.size(); ++i)
        for (std::size_t j = 0; j < cand.size(); ++j) base(i, j) = have[i][j];
    return rank(m, tol) == rank(base, tol);
}

} // namespace wmat_detail

/// Greedy left-to-right independence scan over the cyclic window starting
/// at i, producing the index bookkeeping and the 0/1/mu matrix. Throws
/// when two cyclically-consecutive directions are parallel (such families
/// cannot arise from a genuine stacked configuration).
template <typename S>
WStructure<S> build_w(const NormalFamily<S>& normals, const S& mu, double tol = 1e-10) {
    if (!(mu > S(1))) throw std::invalid_argument("mu must exceed 1");
    std::size_t n = normals.count();
    if (n < 2) throw std::invalid_argument("need at least two directions");
    for (std::size_t i = 0; i < n; ++i)
        if (wmat_detail::parallel(normals.at(i), normals.at(i + 1), tol))
            throw std::invalid_argument("consecutive directions " + std::to_string(i + 1) + "," +
                                        std::to_string(i + 2) + " are parallel (non-admissible)");
    WStructure<S> ws;
    ws.mu = mu;
    ws.w = Matrix<S>(n, n);
    std::optional<std::size_t> card;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> sel{i};
        std::vector<std::vector<S>> chosen{normals.at(i)};
        for (std::size_t k = i + 1; k <= i + n - 1; ++k) {
            if (!wmat_detail::in_span(chosen, normals.at(k), tol)) {
                sel.push_back(k);
                chosen.push_back(normals.at(k));
            }
        }
        if (!card) card = sel.size();
        else if (*card != sel.size())
            throw std::logic_error("window bases have unequal cardinality");
        ws.sbar.push_back(sel);
        std::set<std::size_t> smod, up, low;
        for (auto s : sel) {
            std::size_t j = s % n;
            smod.insert(j);
            if (j >= i) up.insert(j);
            else low.insert(j);
        }
        ws.s_mod.push_back(smod);
        ws.s_upper.push_back(up);
        ws.s_lower.push_back(low);
        for (auto j : up) ws.w(i, j) = S(1);
        for (auto j : low) ws.w(i, j) = mu;
    }
    ws.common_cardinality = *card;
    return ws;
}

/// Two independent triviality verdicts for the kernel of W: exact
/// elimination and the consecutive-row-difference reduction. A verdict
/// disagreement is an internal error.
template <typename S>
KernelVerdict<S> kernel_trivial(const WStructure<S>& ws) {
    KernelVerdict<S> v;
    v.kernel_basis = kernel(ws.w);
    v.trivial_by_elimination = v.kernel_basis.empty();

    std::size_t n = ws.w.rows();
    auto& red = v.reduction;
    red.h.assign(n, 0);
    red.a.assign(n, S(0));
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
        // difference of row i with row i+1 (row N against mu * row 1)
        std::vector<S> diff(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (i + 1 < n) diff[j] = ws.w(i, j) - ws.w(i + 1, j);
            else diff[j] = ws.w(n - 1, j) - ws.mu * ws.w(0, j);
        }
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j < n; ++j)
            if (diff[j] != S(0)) nz.push_back(j);
        if (nz.empty()) {
            red.detail = "rows " + std::to_string(i + 1) + " and next coincide";
            ok = false;
            break;
        }
        if (nz.size() > 2 || diff[i] == S(0)) {
            red.detail = "row difference at " + std::to_string(i + 1) +
                         " does not reduce to a two-term relation";
            ok = false;
            break;
        }
        if (nz.size() == 1) {
            // (1 - mu) x_i = 0
            if (nz[0] != i || !(diff[i] == S(1) - ws.mu)) {
                red.detail = "unexpected single-entry difference at row " + std::to_string(i + 1);
                ok = false;
                break;
            }
            red.h[i] = i;
            red.a[i] = ws.mu;
            continue;
        }
        std::size_t other = nz[0] == i ? nz[1] : nz[0];
        // diff[i] x_i + diff[other] x_other = 0 with diff[i] = 1
        if (!(diff[i] == S(1))) {
            red.detail = "pivot coefficient is not 1 at row " + std::to_string(i + 1);
            ok = false;
            break;
        }
        if (diff[other] == S(-1) && other > i) {
            red.h[i] = other;
            red.a[i] = S(1);
        } else if (diff[other] == -ws.mu && other <= i) {
            red.h[i] = other;
            red.a[i] = ws.mu;
        } else {
            red.detail = "companion coefficient pattern violated at row " + std::to_string(i + 1);
            ok = false;
            break;
        }
    }
    if (ok) {
        // iterate x_i = a_i x_{h(i)}: every h-cycle must pick up at least
        // one factor mu > 1, forcing the cycle values to zero; off-cycle
        // values vanish by propagation
        for (std::size_t start = 0; start < n && ok; ++start) {
            std::size_t cur = start;
            std::set<std::size_t> seen;
            while (!seen.count(cur)) {
                seen.insert(cur);
                cur = red.h[cur];
            }
            std::size_t cyc = cur;
            bool cycle_mu = false;
            do {
                if (red.a[cur] == ws.mu) cycle_mu = true;
                cur = red.h[cur];
            } while (cur != cyc);
            if (!cycle_mu) {
                red.detail = "mu-free cycle reachable from " + std::to_string(start + 1);
                ok = false;
            }
        }
    }
    red.trivial = ok;
    v.trivial_by_reduction = ok;
    if (!v.agree())
        throw std::logic_error("kernel verdicts disagree: elimination says " +
                               std::string(v.trivial_by_elimination ? "trivial" : "nontrivial") +
                               ", reduction says " +
                               std::string(v.trivial_by_reduction ? "trivial" : "nontrivial") +
                               (red.detail.empty() ? "" : " (" + red.detail + ")"));
    return v;
}

/// Diagnostic data for the weighted increment-product matrices
/// M_i = mu sum_{j<i} a_j C_j^T D_j + sum_{j>=i} a_j C_j^T D_j with
/// a_j = k_j (k_j - 1) lambda_j.
template <typename S>
struct MMatrixReport {
    std::vector<Matrix<S>> m;
    std::vector<S> mu_values;     // trace-identity values, zero on valid data
    bool traces_zero = false;
    bool span_structure = false;  // (M_i - M_{i+a}) n_{i+a} in span of the window
    bool triangular = false;      // representation in the window basis
    std::vector<std::string> notes;
};

template <typename S>
MMatrixReport<S> m_matrices(const TnPrimeConfig<S>& cfg, const std::vector<S>& beta,
                            const std::vector<S>& c, double tol = 1e-10);

} // namespace dci
