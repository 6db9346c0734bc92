#pragma once

#include <dci/tn.hpp>

#include <functional>
#include <map>

namespace dci {

/// Key for minor-derivative tables: an index pair in canonical form.
struct MinorKey {
    std::vector<std::size_t> rows, cols;
    bool operator<(const MinorKey& o) const {
        if (rows != o.rows) return rows < o.rows;
        return cols < o.cols;
    }
    static MinorKey of(const MultiIndexPair& z) { return MinorKey{z.rows, z.cols}; }
};

/// One stacked point (X, Y, Z) of an inclusion set, with multiplicity
/// beta, value c and the minor-derivative coefficients of the underlying
/// convex model at X.
template <typename S>
struct InclusionPoint {
    Matrix<S> x, y, z;
    S beta = S(1);
    S c = S(0);
    std::map<MinorKey, S> dz;

    S d_full() const {
        // the determinant coefficient for square X (single top-order minor)
        for (const auto& [k, v] : dz)
            if (k.rows.size() == x.rows() && k.cols.size() == x.cols()) return v;
        return S(0);
    }
};

/// Evaluators for a polyconvex integrand: value, gradient, and the
/// derivative with respect to each minor of order >= 2. The gradient
/// defaults to five-point central differences when no closed form is
/// attached.
struct IntegrandOracle {
    std::function<double(const FMat&)> value;
    std::function<FMat(const FMat&)> gradient; // may be empty
    std::function<std::map<MinorKey, double>(const FMat&)> minor_derivatives; // may be empty

    FMat grad(const FMat& x) const;
};

/// Five-point central difference gradient with step 1e-5 (1 + |X|).
FMat fd_gradient(const std::function<double(const FMat&)>& f, const FMat& x);

/// The stacked point of the plain inclusion set at X:
/// (X, Df(X), X^T Df(X) - f(X) Id), multiplicity 1.
InclusionPoint<double> kf_point(const IntegrandOracle& f, const FMat& x);

enum class QijVariant { straight, curl };

/// Pairwise convexity-gap matrix. The straight variant is the polyconvex
/// support inequality
///   Q_ij = c_i - c_j + <Y_i, X_j - X_i>/beta_i
///          - sum_Z d^i_Z (<cof(X_i^Z)^T, X_j^Z - X_i^Z> - det X_j^Z + det X_i^Z),
/// the curl variant the rotated two-by-two form
///   Q_ij = c_i - c_j + d_i det(X_i - X_j) + <X_i - X_j, Y_i J>/beta_i.
template <typename S>
struct QijReport {
    Matrix<S> q;
    std::vector<S> nu; // filled when a defining vector is supplied
    bool strictly_negative = false;
    std::vector<std::pair<std::size_t, std::size_t>> violations;
};

template <typename S>
Matrix<S> rotation_j();

template <typename S>
QijReport<S> qij_report(const std::vector<InclusionPoint<S>>& pts, QijVariant variant,
                        const TnConfig<S>* witness = nullptr, double strict_margin = 1e-9);

/// Trace-identity check on stacked data with base point zero and
///   Z_i = X_i^T Y_i - beta_i c_i Id.
/// Computes both sides of
///   sum_j k_j (k_j - 1) t^i_j C_j^T D_j n_i = mu_i n_i,
///   mu_i = k_i <C_i, Y_i> - beta_i c_i + sum_j beta_j t^i_j c_j,
/// plus the intermediate quadratic identities; when a precondition fails
/// the report names it instead of claiming a defect.
template <typename S>
struct TecReport {
    bool preconditions_hold = false;
    std::vector<std::string> precondition_failures;
    std::vector<S> mu;
    double max_defect = 0;              // |LHS_i - mu_i n_i| over i
    double quadratic_identity_defect = 0; // leg-sum identity
    double chain_identity_defect = 0;     // partial-sum identities
};

template <typename S>
TecReport<S> tec_check(const TnPrimeConfig<S>& cfg, const std::vector<S>& beta,
                       const std::vector<S>& c, double tol = 1e-10);

/// Wave-cone connection test between two stacked points. Theorem mode
/// (both values nonnegative) asserts no connection exists; exploration
/// mode reports whatever is found together with the scalar consistency
/// data used by the contradiction argument.
template <typename S>
struct ConnectionVerdict {
    bool degenerate = false;             // identical points
    bool connected = false;              // difference lies in the wave cone
    bool theorem_mode = false;           // both c >= 0
    std::optional<WaveConeWitness<S>> witness;
    S coupling = S(0);                   // <C, Y>, defined when connected
    S coupling_expected = S(0);          // c' beta' - c beta
    bool inequalities_consistent = false; // the two strict gaps can coexist
};

template <typename S>
ConnectionVerdict<S> rank_connection_test(const InclusionPoint<S>& a, const InclusionPoint<S>& b,
                                          double tol = 1e-10);

/// Shifts plain inclusion points (beta = 1) so the minimum value becomes
/// zero: c' = c - min c, Z' = Z + (min c) Id.
template <typename S>
std::vector<InclusionPoint<S>> shift_nonnegative(const std::vector<InclusionPoint<S>>& pts);

/// Arithmetic form of the contradiction step: when every mu_i vanishes
/// and all values are nonnegative, the nu entry at the minimal
/// multiplicity is nonnegative.
template <typename S>
bool contradiction_implication(const std::vector<S>& mu, const std::vector<S>& nu,
                               const std::vector<S>& beta, const std::vector<S>& c,
                               double tol = 1e-12);

} // namespace dci
