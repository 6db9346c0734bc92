#pragma once

#include <dci/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

namespace dci {

/// Dense row-major matrix over an exact (Rational) or floating (double)
/// scalar. Sized for the small systems this project needs (<= ~12x12);
/// everything is by-value and re-entrant.
template <typename S>
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, S fill = S(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<S>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    S& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const S& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    Matrix operator+(const Matrix& o) const {
        check_same_shape(o);
        Matrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
        return r;
    }
    Matrix operator-(const Matrix& o) const {
        check_same_shape(o);
        Matrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
        return r;
    }
    Matrix operator-() const {
        Matrix r = *this;
        for (auto& x : r.data_) x = -x;
        return r;
    }
    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
        Matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const S& a = (*this)(i, k);
                if (a == S(0)) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }
    friend Matrix operator*(const S& s, const Matrix& m) {
        Matrix r = m;
        for (auto& x : r.data_) x = s * x;
        return r;
    }

    Matrix transposed() const {
        Matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    S trace() const {
        S t(0);
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    std::vector<S> row(std::size_t i) const {
        return std::vector<S>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
    }

    const std::vector<S>& data() const { return data_; }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("matrix shape mismatch");
    }
    std::size_t rows_, cols_;
    std::vector<S> data_;
};

using RMat = Matrix<Rational>;
using FMat = Matrix<double>;

template <typename S>
std::vector<S> matvec(const Matrix<S>& m, const std::vector<S>& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("matvec shape mismatch");
    std::vector<S> r(m.rows(), S(0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r[i] += m(i, j) * v[j];
    return r;
}

template <typename S>
S frobenius_inner(const Matrix<S>& a, const Matrix<S>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("frobenius shape mismatch");
    S s(0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
    return s;
}

template <typename S>
Matrix<S> outer(const std::vector<S>& u, const std::vector<S>& v) {
    Matrix<S> m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

inline FMat to_float(const RMat& m) {
    FMat f(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) f(i, j) = to_double(m(i, j));
    return f;
}

/// Ordered row/column index selection (1-based in serialized form,
/// 0-based here). Rows and columns must be strictly increasing.
struct MultiIndexPair {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;

    std::size_t order() const { return rows.size(); }

    void validate(std::size_t nrows, std::size_t ncols) const {
        if (rows.size() != cols.size() || rows.empty())
            throw std::invalid_argument("index pair must select equal, nonzero row/col counts");
        auto ok = [](const std::vector<std::size_t>& v, std::size_t n) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i] >= n) return false;
                if (i && v[i] <= v[i - 1]) return false;
            }
            return true;
        };
        if (!ok(rows, nrows) || !ok(cols, ncols))
            throw std::out_of_range("index pair out of range or not strictly increasing");
    }

    /// The pair selecting this subminor of an outer minor, pushed to the
    /// outer matrix: composition of index selections.
    MultiIndexPair composed_with(const MultiIndexPair& inner) const {
        MultiIndexPair out;
        for (auto i : inner.rows) out.rows.push_back(rows.at(i));
        for (auto j : inner.cols) out.cols.push_back(cols.at(j));
        return out;
    }
};

/// All order-r index pairs of an n x m matrix.
inline std::vector<MultiIndexPair> all_index_pairs(std::size_t n, std::size_t m, std::size_t r) {
    auto subsets = [](std::size_t total, std::size_t r) {
        std::vector<std::vector<std::size_t>> out;
        std::vector<std::size_t> cur;
        auto rec = [&](auto&& self, std::size_t start) -> void {
            if (cur.size() == r) { out.push_back(cur); return; }
            for (std::size_t i = start; i + (r - cur.size()) <= total; ++i) {
                cur.push_back(i);
                self(self, i + 1);
                cur.pop_back();
            }
        };
        rec(rec, 0);
        return out;
    };
    std::vector<MultiIndexPair> out;
    for (const auto& I : subsets(n, r))
        for (const auto& J : subsets(m, r)) out.push_back(MultiIndexPair{I, J});
    return out;
}

template <typename S>
Matrix<S> minor_matrix(const Matrix<S>& m, const MultiIndexPair& z) {
    z.validate(m.rows(), m.cols());
    Matrix<S> r(z.order(), z.order());
    for (std::size_t a = 0; a < z.order(); ++a)
        for (std::size_t b = 0; b < z.order(); ++b) r(a, b) = m(z.rows[a], z.cols[b]);
    return r;
}

namespace detail {
inline bool pivot_ok(const Rational& x) { return x != 0; }
inline bool pivot_ok(double x) { return std::abs(x) > 1e-12; }
inline Rational pivot_size(const Rational& x) { return rat_abs(x); }
inline double pivot_size(double x) { return std::abs(x); }
} // namespace detail

/// Determinant by Gaussian elimination with pivoting; exact over Rational.
template <typename S>
S det(const Matrix<S>& m0) {
    if (m0.rows() != m0.cols()) throw std::invalid_argument("determinant of non-square matrix");
    std::size_t n = m0.rows();
    if (n == 0) return S(1); // empty-minor convention
    Matrix<S> m = m0;
    S d(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (detail::pivot_size(m(i, c)) > detail::pivot_size(m(p, c))) p = i;
        if (!detail::pivot_ok(m(p, c))) {
            if constexpr (std::is_same_v<S, Rational>) {
                if (m(p, c) != 0) { /* exact nonzero but tiny is fine */ }
                else return S(0);
            } else {
                if (m(p, c) == 0.0) return S(0);
            }
        }
        if (m(p, c) == S(0)) return S(0);
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
            d = -d;
        }
        d *= m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m(i, c) == S(0)) continue;
            S f = m(i, c) / m(c, c);
            for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
        }
    }
    return d;
}

/// Reduced row echelon form; returns pivot column list. For doubles a
/// relative tolerance decides rank.
template <typename S>
std::vector<std::size_t> rref_in_place(Matrix<S>& m, double tol = 1e-10) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        for (std::size_t i = r; i < m.rows(); ++i)
            if (detail::pivot_size(m(i, c)) > detail::pivot_size(m(p, c))) p = i;
        bool ok;
        if constexpr (std::is_same_v<S, Rational>) {
            (void)tol;
            ok = m(p, c) != 0;
        } else {
            ok = std::abs(m(p, c)) > tol;
        }
        if (!ok) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        S pv = m(r, c);
        for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) /= pv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || m(i, c) == S(0)) continue;
            S f = m(i, c);
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

template <typename S>
std::size_t rank(const Matrix<S>& m, double tol = 1e-10) {
    Matrix<S> w = m;
    return rref_in_place(w, tol).size();
}

/// Exact basis of the null space; empty iff the kernel is trivial.
template <typename S>
std::vector<std::vector<S>> kernel(const Matrix<S>& m, double tol = 1e-10) {
    Matrix<S> w = m;
    auto pivots = rref_in_place(w, tol);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<std::vector<S>> basis;
    for (std::size_t f = 0; f < m.cols(); ++f) {
        if (is_pivot[f]) continue;
        std::vector<S> v(m.cols(), S(0));
        v[f] = S(1);
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -w(r, f);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Solves A x = b exactly; nullopt when inconsistent or underdetermined
/// entries are left at zero (particular solution).
template <typename S>
std::optional<std::vector<S>> solve(const Matrix<S>& a, const std::vector<S>& b, double tol = 1e-10) {
    if (a.rows() != b.size()) throw std::invalid_argument("solve shape mismatch");
    Matrix<S> aug(a.rows(), a.cols() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
        aug(i, a.cols()) = b[i];
    }
    auto pivots = rref_in_place(aug, tol);
    for (std::size_t r = 0; r < pivots.size(); ++r)
        if (pivots[r] == a.cols()) return std::nullopt; // pivot in the rhs column
    std::vector<S> x(a.cols(), S(0));
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, a.cols());
    return x;
}

/// cof(A) with cof(A)*A = A*cof(A) = det(A)*I; for 1x1 returns [[1]]
/// (determinant of the empty minor is 1).
template <typename S>
Matrix<S> adjugate(const Matrix<S>& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("adjugate of non-square matrix");
    std::size_t n = a.rows();
    Matrix<S> r(n, n);
    if (n == 0) return r;
    if (n == 1) { r(0, 0) = S(1); return r; }
    Matrix<S> sub(n - 1, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // entry (i,j) = (-1)^{i+j} det(A with row j, col i deleted)
            std::size_t a2 = 0;
            for (std::size_t p = 0; p < n; ++p) {
                if (p == j) continue;
                std::size_t b2 = 0;
                for (std::size_t q = 0; q < n; ++q) {
                    if (q == i) continue;
                    sub(a2, b2) = a(p, q);
                    ++b2;
                }
                ++a2;
            }
            S d = det(sub);
            r(i, j) = ((i + j) % 2 == 0) ? d : -d;
        }
    }
    return r;
}

template <typename S>
bool rank_at_most_one(const Matrix<S>& b, double tol = 1e-10) {
    if constexpr (std::is_same_v<S, Rational>) {
        (void)tol;
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t k = i + 1; k < b.rows(); ++k)
                for (std::size_t j = 0; j < b.cols(); ++j)
                    for (std::size_t l = j + 1; l < b.cols(); ++l)
                        if (b(i, j) * b(k, l) - b(i, l) * b(k, j) != 0) return false;
        return true;
    } else {
        double scale = 0;
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) scale = std::max(scale, std::abs(b(i, j)));
        if (scale == 0) return true;
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t k = i + 1; k < b.rows(); ++k)
                for (std::size_t j = 0; j < b.cols(); ++j)
                    for (std::size_t l = j + 1; l < b.cols(); ++l)
                        if (std::abs(b(i, j) * b(k, l) - b(i, l) * b(k, j)) > tol * scale * scale)
                            return false;
        return true;
    }
}

/// det(A + B) for rank(B) <= 1, evaluated as det(A) + <cof(A)^T, B>.
template <typename S>
S det_rank_one_update(const Matrix<S>& a, const Matrix<S>& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("det_rank_one_update needs square matrices of equal size");
    if (!rank_at_most_one(b)) throw std::invalid_argument("update term must have rank <= 1");
    return det(a) + frobenius_inner(adjugate(a).transposed(), b);
}

template <typename S>
double frob_norm(const Matrix<S>& m) {
    double s = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double x = to_double(m(i, j));
            s += x * x;
        }
    return std::sqrt(s);
}

} // namespace dci
