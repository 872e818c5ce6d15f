#pragma once

// Compressed-row sparse matrices and a Jacobi-preconditioned conjugate
// gradient solver. Everything here runs in a fixed loop order, so results
// are bit-reproducible for a given build.

#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sle {

struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;

    std::size_t rows() const { return n; }
    std::size_t nonzeros() const { return val.size(); }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const {
        const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
        const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return val[static_cast<std::size_t>(it - col.begin())];
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
        return d;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[i] = s;
        }
    }

    std::vector<double> operator*(std::span<const double> x) const {
        std::vector<double> y(n);
        multiply(x, y);
        return y;
    }
};

/// Accumulates (i, j, v) contributions row by row; duplicates are summed in
/// insertion order.
class CsrBuilder {
public:
    explicit CsrBuilder(std::size_t n) : rows_(n) {}

    void add(std::size_t i, std::size_t j, double v) { rows_[i].emplace_back(j, v); }

    CsrMatrix build() && {
        CsrMatrix A;
        A.n = rows_.size();
        A.row_ptr.assign(A.n + 1, 0);
        for (std::size_t i = 0; i < A.n; ++i) {
            auto& row = rows_[i];
            std::stable_sort(row.begin(), row.end(),
                             [](const auto& x, const auto& y) { return x.first < y.first; });
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (!A.col.empty() && A.col.size() > A.row_ptr[i] && A.col.back() == row[k].first) {
                    A.val.back() += row[k].second;
                } else {
                    A.col.push_back(row[k].first);
                    A.val.push_back(row[k].second);
                }
            }
            A.row_ptr[i + 1] = A.col.size();
            row.clear();
            row.shrink_to_fit();
        }
        return A;
    }

private:
    std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// Carries the residual history of a linear solve that hit its iteration cap.
class LinearSolveError : public std::runtime_error {
public:
    LinearSolveError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

struct LinearSolveResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> residual_history;
};

/// Relative residual that rounding alone can produce at x:
/// 64 eps || |A| |x| || / ||rhs||.
inline double rounding_floor(const CsrMatrix& A, std::span<const double> x, double bnorm) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.n; ++i) {
        double row = 0.0;
        for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) row += std::abs(A.val[k] * x[A.col[k]]);
        s += row * row;
    }
    return 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(s) / bnorm;
}

/// Solves A x = rhs for SPD A to ||A x - rhs|| <= tol ||rhs|| with Jacobi-
/// preconditioned CG. `x0` is an optional starting guess. A tolerance below
/// the rounding floor of the true residual is met at that floor.
inline LinearSolveResult conjugate_gradient(const CsrMatrix& A, std::span<const double> rhs, double tol,
                                            std::optional<std::span<const double>> x0 = std::nullopt,
                                            int max_iter = -1) {
    if (!(tol > 0.0)) throw DomainError("conjugate_gradient: tol must be > 0");
    const std::size_t n = A.rows();
    if (rhs.size() != n) throw DomainError("conjugate_gradient: size mismatch");
    if (max_iter < 0) max_iter = static_cast<int>(std::max<std::size_t>(10 * n, 1000));

    LinearSolveResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) return res;

    if (x0 && x0->size() == n) std::copy(x0->begin(), x0->end(), res.x.begin());

    const std::vector<double> diag = A.diagonal();
    std::vector<double> r(n), z(n), p(n), q(n);

    // Restart once from the current iterate if the recursively updated
    // residual drifted away from the true residual.
    for (int attempt = 0; attempt < 2; ++attempt) {
        A.multiply(res.x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
        double rnorm = norm2(r);
        res.residual_history.push_back(rnorm / bnorm);
        if (rnorm <= tol * bnorm) {
            res.relative_residual = rnorm / bnorm;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        p = z;
        double rz = dot(r, z);
        while (res.iterations < max_iter) {
            A.multiply(p, q);
            const double alpha = rz / dot(p, q);
            for (std::size_t i = 0; i < n; ++i) {
                res.x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++res.iterations;
            rnorm = norm2(r);
            res.residual_history.push_back(rnorm / bnorm);
            if (rnorm <= tol * bnorm) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        A.multiply(res.x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
        res.relative_residual = norm2(r) / bnorm;
        if (res.relative_residual <= std::max(tol, rounding_floor(A, res.x, bnorm))) return res;
        if (res.iterations >= max_iter) break;
    }
    throw LinearSolveError("conjugate_gradient: no convergence after " + std::to_string(res.iterations) +
                               " iterations (relative residual " + std::to_string(res.relative_residual) + ")",
                           res.residual_history);
}

} // namespace sle
