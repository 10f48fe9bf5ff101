#pragma once

// Small dense matrices over the rings used in this library, plus exact
// p-adic elimination with pivot-valuation tracking.

#include <cassert>
#include <functional>
#include <vector>

#include <padex/padic.hpp>

namespace padex {

inline PadicInt zero_like(const PadicInt& s) { return PadicInt::zero(s.p(), s.prec()); }
inline PadicInt one_like(const PadicInt& s) { return PadicInt::one(s.p(), s.prec()); }

template <class T>
class Matrix {
public:
    Matrix() : r_(0), c_(0) {}
    Matrix(long r, long c, const T& fill) : r_(r), c_(c), data_((size_t)(r * c), fill) {}

    static Matrix identity(long r, const T& sample) {
        Matrix m(r, r, zero_like(sample));
        for (long i = 0; i < r; ++i) m(i, i) = one_like(sample);
        return m;
    }

    long rows() const { return r_; }
    long cols() const { return c_; }

    T& operator()(long i, long j) { return data_[(size_t)(i * c_ + j)]; }
    const T& operator()(long i, long j) const { return data_[(size_t)(i * c_ + j)]; }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        assert(a.r_ == b.r_ && a.c_ == b.c_);
        Matrix r = a;
        for (size_t i = 0; i < r.data_.size(); ++i) r.data_[i] = r.data_[i] + b.data_[i];
        return r;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        assert(a.r_ == b.r_ && a.c_ == b.c_);
        Matrix r = a;
        for (size_t i = 0; i < r.data_.size(); ++i) r.data_[i] = r.data_[i] - b.data_[i];
        return r;
    }

    Matrix operator-() const {
        Matrix r = *this;
        for (auto& x : r.data_) x = -x;
        return r;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        assert(a.c_ == b.r_);
        Matrix r(a.r_, b.c_, zero_like(a.data_[0]));
        for (long i = 0; i < a.r_; ++i)
            for (long k = 0; k < a.c_; ++k)
                for (long j = 0; j < b.c_; ++j)
                    r(i, j) = r(i, j) + a(i, k) * b(k, j);
        return r;
    }

    Matrix scaled(const T& s) const {
        Matrix r = *this;
        for (auto& x : r.data_) x = x * s;
        return r;
    }

    Matrix transpose() const {
        Matrix r(c_, r_, data_.empty() ? T() : zero_like(data_[0]));
        for (long i = 0; i < r_; ++i)
            for (long j = 0; j < c_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    // cofactor expansion; fine for the ranks this library works at
    T det() const {
        assert(r_ == c_ && r_ >= 1);
        if (r_ == 1) return (*this)(0, 0);
        T acc = zero_like(data_[0]);
        for (long j = 0; j < c_; ++j) {
            Matrix sub(r_ - 1, c_ - 1, zero_like(data_[0]));
            for (long i = 1; i < r_; ++i) {
                long cc = 0;
                for (long jj = 0; jj < c_; ++jj) {
                    if (jj == j) continue;
                    sub(i - 1, cc++) = (*this)(i, jj);
                }
            }
            T term = (*this)(0, j) * sub.det();
            acc = (j % 2 == 0) ? acc + term : acc - term;
        }
        return acc;
    }

    static Matrix block_diag(const Matrix& a, const Matrix& b) {
        Matrix r(a.r_ + b.r_, a.c_ + b.c_, zero_like(a.data_.empty() ? b.data_[0] : a.data_[0]));
        for (long i = 0; i < a.r_; ++i)
            for (long j = 0; j < a.c_; ++j) r(i, j) = a(i, j);
        for (long i = 0; i < b.r_; ++i)
            for (long j = 0; j < b.c_; ++j) r(a.r_ + i, a.c_ + j) = b(i, j);
        return r;
    }

    // Kronecker sum a (x) I + I (x) b, the tensor-product connection matrix
    static Matrix kron_sum(const Matrix& a, const Matrix& b) {
        long n = a.r_ * b.r_;
        Matrix r(n, n, zero_like(a.data_[0]));
        for (long i = 0; i < a.r_; ++i)
            for (long j = 0; j < a.c_; ++j)
                for (long k = 0; k < b.r_; ++k) {
                    r(i * b.r_ + k, j * b.r_ + k) = r(i * b.r_ + k, j * b.r_ + k) + a(i, j);
                }
        for (long i = 0; i < a.r_; ++i)
            for (long k = 0; k < b.r_; ++k)
                for (long l = 0; l < b.c_; ++l)
                    r(i * b.r_ + k, i * b.r_ + l) = r(i * b.r_ + k, i * b.r_ + l) + b(k, l);
        return r;
    }

    template <class F>
    Matrix<std::invoke_result_t<F, T>> map(F&& f) const {
        using U = std::invoke_result_t<F, T>;
        Matrix<U> r;
        r.resize_raw(r_, c_);
        for (long i = 0; i < r_; ++i)
            for (long j = 0; j < c_; ++j) r(i, j) = f((*this)(i, j));
        return r;
    }

    void resize_raw(long r, long c) { r_ = r; c_ = c; data_.assign((size_t)(r * c), T()); }

private:
    template <class U> friend class Matrix;
    long r_, c_;
    std::vector<T> data_;
};

// --- exact p-adic linear algebra -----------------------------------------

struct PivotReport {
    long rank = 0;
    long max_pivot_valuation = 0;   // worst division loss during elimination
};

// Kernel of an m x n matrix over Q_p by exact elimination; pivots chosen
// with maximal valuation margin (minimal valuation).  Returns a basis of
// the kernel with deterministic normalization (pivot-free coordinates set
// to one at the lex-first free column).
inline std::vector<std::vector<PadicInt>> padic_kernel(Matrix<PadicInt> a,
                                                       PivotReport* report = nullptr) {
    long m = a.rows(), n = a.cols();
    std::vector<long> pivot_col(m, -1);
    std::vector<bool> col_used(n, false);
    long rank = 0;
    long max_piv_val = 0;
    for (long row = 0; row < m && rank < n; ++row) {
        // best pivot in remaining columns of this row range: scan all
        // not-yet-pivoted rows/cols for a minimal-valuation entry
        long bi = -1, bj = -1;
        Rat bv;
        for (long i = row; i < m; ++i)
            for (long j = 0; j < n; ++j) {
                if (col_used[j]) continue;
                auto v = a(i, j).valuation();
                if (!v) continue;
                if (bi < 0 || *v < bv) { bi = i; bj = j; bv = *v; }
            }
        if (bi < 0) break; // all remaining rows vanish at precision
        // swap rows
        if (bi != row)
            for (long j = 0; j < n; ++j) std::swap(a(row, j), a(bi, j));
        col_used[bj] = true;
        pivot_col[row] = bj;
        max_piv_val = std::max(max_piv_val, boost::multiprecision::numerator(bv).convert_to<long>());
        PadicInt inv = a(row, bj).inverse();
        for (long j = 0; j < n; ++j) a(row, j) = a(row, j) * inv;
        for (long i = 0; i < m; ++i) {
            if (i == row) continue;
            if (a(i, bj).is_zero_at_prec()) continue;
            PadicInt f = a(i, bj);
            for (long j = 0; j < n; ++j) a(i, j) = a(i, j) - f * a(row, j);
        }
        ++rank;
    }
    if (report) { report->rank = rank; report->max_pivot_valuation = max_piv_val; }

    std::vector<std::vector<PadicInt>> basis;
    PadicInt sample = a.rows() && a.cols() ? a(0, 0) : PadicInt();
    for (long j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        std::vector<PadicInt> v(n, zero_like(sample));
        v[j] = one_like(sample);
        for (long row = 0; row < m; ++row) {
            if (pivot_col[row] < 0) continue;
            v[pivot_col[row]] = -a(row, j);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

// Inverse of a square matrix over Q_p; throws PrecisionError when singular
// at the working precision.
inline Matrix<PadicInt> padic_inverse(Matrix<PadicInt> a) {
    long n = a.rows();
    Matrix<PadicInt> inv = Matrix<PadicInt>::identity(n, a(0, 0));
    for (long col = 0; col < n; ++col) {
        long bi = -1;
        Rat bv;
        for (long i = col; i < n; ++i) {
            auto v = a(i, col).valuation();
            if (!v) continue;
            if (bi < 0 || *v < bv) { bi = i; bv = *v; }
        }
        if (bi < 0) throw PrecisionError("padic_inverse: singular at precision");
        if (bi != col)
            for (long j = 0; j < n; ++j) {
                std::swap(a(col, j), a(bi, j));
                std::swap(inv(col, j), inv(bi, j));
            }
        PadicInt f = a(col, col).inverse();
        for (long j = 0; j < n; ++j) { a(col, j) = a(col, j) * f; inv(col, j) = inv(col, j) * f; }
        for (long i = 0; i < n; ++i) {
            if (i == col || a(i, col).is_zero_at_prec()) continue;
            PadicInt g = a(i, col);
            for (long j = 0; j < n; ++j) {
                a(i, j) = a(i, j) - g * a(col, j);
                inv(i, j) = inv(i, j) - g * inv(col, j);
            }
        }
    }
    return inv;
}

} // namespace padex
