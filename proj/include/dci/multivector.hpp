#pragma once

#include <dci/matrix.hpp>

#include <array>
#include <cmath>
#include <vector>

namespace dci {

/// Degree-m element of the exterior algebra of R^{ambient}, stored on the
/// basis of increasing multi-indices. The first basis slot is always
/// e_1 ^ ... ^ e_m; the remaining multi-indices follow lexicographically.
class MultiVector {
public:
    MultiVector(std::size_t ambient, std::size_t degree)
        : ambient_(ambient), degree_(degree), basis_(basis_indices(ambient, degree)),
          coeffs_(basis_.size(), 0.0) {}

    static std::vector<std::vector<std::size_t>> basis_indices(std::size_t ambient, std::size_t degree) {
        std::vector<std::vector<std::size_t>> all;
        std::vector<std::size_t> cur;
        auto rec = [&](auto&& self, std::size_t start) -> void {
            if (cur.size() == degree) { all.push_back(cur); return; }
            for (std::size_t i = start; i + (degree - cur.size()) <= ambient; ++i) {
                cur.push_back(i);
                self(self, i + 1);
                cur.pop_back();
            }
        };
        rec(rec, 0);
        // move e_1^...^e_m to the front, keep the rest in lexicographic order
        std::vector<std::size_t> first(degree);
        for (std::size_t i = 0; i < degree; ++i) first[i] = i;
        std::vector<std::vector<std::size_t>> out;
        out.push_back(first);
        for (auto& idx : all)
            if (idx != first) out.push_back(idx);
        return out;
    }

    std::size_t ambient() const { return ambient_; }
    std::size_t degree() const { return degree_; }
    std::size_t size() const { return coeffs_.size(); }
    const std::vector<std::vector<std::size_t>>& basis() const { return basis_; }
    double& operator[](std::size_t i) { return coeffs_[i]; }
    double operator[](std::size_t i) const { return coeffs_[i]; }

    /// Coefficient on e_{i1} ^ ... ^ e_{im} for a strictly increasing index
    /// tuple (0-based).
    double coeff(const std::vector<std::size_t>& idx) const {
        for (std::size_t p = 0; p < basis_.size(); ++p)
            if (basis_[p] == idx) return coeffs_[p];
        throw std::out_of_range("multi-index not in basis");
    }

    MultiVector operator+(const MultiVector& o) const {
        check(o);
        MultiVector r = *this;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) r.coeffs_[i] += o.coeffs_[i];
        return r;
    }
    MultiVector operator-(const MultiVector& o) const {
        check(o);
        MultiVector r = *this;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) r.coeffs_[i] -= o.coeffs_[i];
        return r;
    }
    friend MultiVector operator*(double s, const MultiVector& m) {
        MultiVector r = m;
        for (auto& c : r.coeffs_) c *= s;
        return r;
    }

    double norm() const {
        double s = 0;
        for (double c : coeffs_) s += c * c;
        return std::sqrt(s);
    }

private:
    void check(const MultiVector& o) const {
        if (ambient_ != o.ambient_ || degree_ != o.degree_)
            throw std::invalid_argument("multivector shape mismatch");
    }
    std::size_t ambient_, degree_;
    std::vector<std::vector<std::size_t>> basis_;
    std::vector<double> coeffs_;
};

/// Wedge of m vectors in R^d: the coefficient on e_I is the minor of the
/// column matrix [v_1 ... v_m] taken on rows I.
inline MultiVector wedge(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) throw std::invalid_argument("wedge of nothing");
    std::size_t d = vectors[0].size(), m = vectors.size();
    for (const auto& v : vectors)
        if (v.size() != d) throw std::invalid_argument("wedge dimension mismatch");
    if (m > d) throw std::invalid_argument("degree exceeds ambient dimension");
    MultiVector out(d, m);
    FMat sub(m, m);
    const auto& basis = out.basis();
    for (std::size_t p = 0; p < basis.size(); ++p) {
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) sub(a, b) = vectors[b][basis[p][a]];
        out[p] = det(sub);
    }
    return out;
}

/// Euclidean inner product; on simple vectors it is the Gram determinant.
inline double mvec_inner(const MultiVector& a, const MultiVector& b) {
    if (a.ambient() != b.ambient() || a.degree() != b.degree())
        throw std::invalid_argument("multivector inner shape mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Coordinates for the degree-2, ambient-4 integrand layout:
/// (<t,e3^e2>, <t,e4^e2>, <t,e1^e3>, <t,e1^e4>, <t,e3^e4>, <t,e1^e2>).
/// Slot table holds (basis position, sign) for that fixed order, so the
/// layout reproduces bit-exactly.
inline std::array<double, 6> phi_coords(const MultiVector& tau) {
    if (tau.ambient() != 4 || tau.degree() != 2)
        throw std::invalid_argument("phi_coords expects a 2-vector of R^4");
    // basis order: (1,2) first, then (1,3),(1,4),(2,3),(2,4),(3,4)
    auto pos = [&](std::size_t i, std::size_t j) {
        std::vector<std::size_t> idx{i, j};
        const auto& b = tau.basis();
        for (std::size_t p = 0; p < b.size(); ++p)
            if (b[p] == idx) return p;
        throw std::logic_error("missing basis index");
    };
    return {
        -tau[pos(1, 2)], // <t, e3^e2> = -coeff(e2^e3)
        -tau[pos(1, 3)], // <t, e4^e2>
        tau[pos(0, 2)],  // <t, e1^e3>
        tau[pos(0, 3)],  // <t, e1^e4>
        tau[pos(2, 3)],  // <t, e3^e4>
        tau[pos(0, 1)],  // <t, e1^e2>
    };
}

/// General layout: all non-leading coefficients in basis order, with the
/// e_1^...^e_m component moved to the last slot.
inline std::vector<double> phi_coords_general(const MultiVector& tau) {
    std::vector<double> out;
    out.reserve(tau.size());
    for (std::size_t p = 1; p < tau.size(); ++p) out.push_back(tau[p]);
    out.push_back(tau[0]);
    return out;
}

/// Graph frame of X in R^{n x m}: the tangent-frame matrix [I; X], the
/// first-fundamental-form inverse, the orthogonal projection onto the
/// graph plane, the orienting m-vector and the area element.
struct GraphFrame {
    FMat x;          // n x m
    FMat m_frame;    // (n+m) x m, columns span the tangent plane
    FMat s;          // m x m, (M^T M)^{-1}
    FMat h;          // (n+m) x (n+m) projection
    MultiVector w;   // wedge of the frame columns
    double area;     // sqrt(det(I + X^T X)), equals |w|
};

inline FMat frame_matrix(const FMat& x) {
    std::size_t n = x.rows(), m = x.cols();
    FMat mf(n + m, m);
    for (std::size_t j = 0; j < m; ++j) mf(j, j) = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) mf(m + i, j) = x(i, j);
    return mf;
}

inline FMat inverse_small(const FMat& a) {
    auto n = a.rows();
    FMat aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n + i) = 1.0;
    }
    auto piv = rref_in_place(aug, 1e-14);
    if (piv.size() != n) throw std::invalid_argument("singular matrix inversion");
    FMat inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

inline GraphFrame graph_frame(const FMat& x) {
    FMat mf = frame_matrix(x);
    FMat gram = mf.transposed() * mf;
    FMat s = inverse_small(gram);
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        std::vector<double> c(mf.rows());
        for (std::size_t i = 0; i < mf.rows(); ++i) c[i] = mf(i, j);
        cols.push_back(std::move(c));
    }
    return GraphFrame{x, mf, s, mf * s * mf.transposed(), wedge(cols), std::sqrt(det(gram))};
}

} // namespace dci
