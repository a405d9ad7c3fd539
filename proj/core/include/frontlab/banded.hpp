#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "frontlab/error.hpp"

namespace frontlab {

/// Square band matrix with kl sub- and ku super-diagonals.
template <class T>
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), data_(static_cast<std::size_t>(n) * (kl + ku + 1), T{}) {
        require(n > 0 && kl >= 0 && ku >= 0, "BandedMatrix: bad shape");
    }

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] int lower() const { return kl_; }
    [[nodiscard]] int upper() const { return ku_; }
    [[nodiscard]] bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_ && i >= 0 && j >= 0 && i < n_ && j < n_; }

    T& operator()(int i, int j) { return data_[index(i, j)]; }
    T operator()(int i, int j) const { return in_band(i, j) ? data_[index(i, j)] : T{}; }

    void add(int i, int j, T v) {
        require(in_band(i, j), "BandedMatrix: entry outside band");
        data_[index(i, j)] += v;
    }

    [[nodiscard]] std::vector<T> multiply(std::span<const T> x) const {
        std::vector<T> y(static_cast<std::size_t>(n_), T{});
        for (int i = 0; i < n_; ++i) {
            T acc{};
            const int j0 = std::max(0, i - kl_), j1 = std::min(n_ - 1, i + ku_);
            for (int j = j0; j <= j1; ++j) acc += data_[index(i, j)] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = acc;
        }
        return y;
    }

    [[nodiscard]] std::vector<T> multiply_transpose(std::span<const T> x) const {
        std::vector<T> y(static_cast<std::size_t>(n_), T{});
        for (int i = 0; i < n_; ++i) {
            const int j0 = std::max(0, i - kl_), j1 = std::min(n_ - 1, i + ku_);
            for (int j = j0; j <= j1; ++j) y[static_cast<std::size_t>(j)] += data_[index(i, j)] * x[static_cast<std::size_t>(i)];
        }
        return y;
    }

    /// this + s * I
    [[nodiscard]] BandedMatrix shifted(T s) const {
        BandedMatrix out = *this;
        for (int i = 0; i < n_; ++i) out(i, i) += s;
        return out;
    }

    /// a * this + b * I
    [[nodiscard]] BandedMatrix affine(T a, T b) const {
        BandedMatrix out = *this;
        for (T& v : out.data_) v *= a;
        for (int i = 0; i < n_; ++i) out(i, i) += b;
        return out;
    }

    template <class U>
    [[nodiscard]] BandedMatrix<U> cast() const {
        BandedMatrix<U> out(n_, kl_, ku_);
        for (int i = 0; i < n_; ++i)
            for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) out(i, j) = U((*this)(i, j));
        return out;
    }

private:
    [[nodiscard]] std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(ku_ + i - j) + static_cast<std::size_t>(j) * static_cast<std::size_t>(kl_ + ku_ + 1);
    }

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<T> data_;
};

/// Band LU with partial pivoting (the gbtf2 scheme); U gains kl extra super-diagonals.
template <class T>
class BandedLU {
public:
    BandedLU() = default;
    explicit BandedLU(const BandedMatrix<T>& a) { factor(a); }

    void factor(const BandedMatrix<T>& a) {
        n_ = a.size();
        kl_ = a.lower();
        ku_ = a.upper();
        ld_ = 2 * kl_ + ku_ + 1;
        ab_.assign(static_cast<std::size_t>(ld_) * n_, T{});
        piv_.assign(static_cast<std::size_t>(n_), 0);
        for (int j = 0; j < n_; ++j)
            for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) at(i, j) = a(i, j);
        int ju = 0;
        for (int j = 0; j < n_; ++j) {
            const int km = std::min(kl_, n_ - 1 - j);
            int p = 0;
            double best = std::abs(at(j, j));
            for (int r = 1; r <= km; ++r) {
                const double v = std::abs(at(j + r, j));
                if (v > best) {
                    best = v;
                    p = r;
                }
            }
            piv_[static_cast<std::size_t>(j)] = j + p;
            if (best == 0.0) fail(ErrorKind::LinearSolveFailure, "band LU: singular matrix");
            ju = std::max(ju, std::min(j + ku_ + p, n_ - 1));
            if (p != 0)
                for (int c = j; c <= ju; ++c) std::swap(at(j, c), at(j + p, c));
            const T inv = T(1) / at(j, j);
            for (int r = 1; r <= km; ++r) at(j + r, j) *= inv;
            for (int c = j + 1; c <= ju; ++c) {
                const T ujc = at(j, c);
                if (ujc == T{}) continue;
                for (int r = 1; r <= km; ++r) at(j + r, c) -= at(j + r, j) * ujc;
            }
        }
        min_pivot_ = std::abs(at(0, 0));
        max_pivot_ = min_pivot_;
        for (int j = 1; j < n_; ++j) {
            min_pivot_ = std::min(min_pivot_, std::abs(at(j, j)));
            max_pivot_ = std::max(max_pivot_, std::abs(at(j, j)));
        }
    }

    [[nodiscard]] int size() const { return n_; }
    /// Crude conditioning indicator from the pivots.
    [[nodiscard]] double pivot_ratio() const { return max_pivot_ > 0 ? min_pivot_ / max_pivot_ : 0.0; }

    void solve_in_place(std::span<T> b) const {
        for (int j = 0; j < n_; ++j) {
            const int km = std::min(kl_, n_ - 1 - j);
            const int p = piv_[static_cast<std::size_t>(j)];
            if (p != j) std::swap(b[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(p)]);
            const T bj = b[static_cast<std::size_t>(j)];
            for (int r = 1; r <= km; ++r) b[static_cast<std::size_t>(j + r)] -= at(j + r, j) * bj;
        }
        const int kv = kl_ + ku_;
        for (int j = n_ - 1; j >= 0; --j) {
            b[static_cast<std::size_t>(j)] /= at(j, j);
            const T bj = b[static_cast<std::size_t>(j)];
            for (int i = std::max(0, j - kv); i < j; ++i) b[static_cast<std::size_t>(i)] -= at(i, j) * bj;
        }
    }

    /// Solves A^T x = b.
    void solve_transpose_in_place(std::span<T> b) const {
        const int kv = kl_ + ku_;
        for (int j = 0; j < n_; ++j) {
            T acc = b[static_cast<std::size_t>(j)];
            for (int i = std::max(0, j - kv); i < j; ++i) acc -= at(i, j) * b[static_cast<std::size_t>(i)];
            b[static_cast<std::size_t>(j)] = acc / at(j, j);
        }
        for (int j = n_ - 1; j >= 0; --j) {
            const int km = std::min(kl_, n_ - 1 - j);
            T acc = b[static_cast<std::size_t>(j)];
            for (int r = 1; r <= km; ++r) acc -= at(j + r, j) * b[static_cast<std::size_t>(j + r)];
            b[static_cast<std::size_t>(j)] = acc;
            const int p = piv_[static_cast<std::size_t>(j)];
            if (p != j) std::swap(b[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(p)]);
        }
    }

    [[nodiscard]] std::vector<T> solve(std::span<const T> b) const {
        std::vector<T> x(b.begin(), b.end());
        solve_in_place(x);
        return x;
    }

private:
    T& at(int i, int j) { return ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ld_]; }
    const T& at(int i, int j) const { return ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ld_]; }

    int n_ = 0, kl_ = 0, ku_ = 0, ld_ = 0;
    std::vector<T> ab_;
    std::vector<int> piv_;
    double min_pivot_ = 0.0, max_pivot_ = 0.0;
};

}  // namespace frontlab
