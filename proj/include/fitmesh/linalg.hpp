#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fitmesh/errors.hpp"

namespace fitmesh {

/// Small dense row-major matrix. Sized for the n x n coupling blocks of the
/// discrete systems (n is the number of equations, typically 1..4).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

/// LU factorization with partial pivoting of a square matrix.
/// Throws SolverError on a singular pivot.
class LuFactor {
public:
    explicit LuFactor(Matrix m) : lu_(std::move(m)), perm_(static_cast<std::size_t>(lu_.rows())) {
        const int n = lu_.rows();
        for (int i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;
        for (int col = 0; col < n; ++col) {
            int pivot = col;
            double best = std::abs(lu_(col, col));
            for (int r = col + 1; r < n; ++r) {
                const double v = std::abs(lu_(r, col));
                if (v > best) {
                    best = v;
                    pivot = r;
                }
            }
            if (best == 0.0) throw SolverError("singular pivot block");
            if (pivot != col) {
                for (int j = 0; j < n; ++j) std::swap(lu_(col, j), lu_(pivot, j));
                std::swap(perm_[static_cast<std::size_t>(col)], perm_[static_cast<std::size_t>(pivot)]);
            }
            const double inv = 1.0 / lu_(col, col);
            for (int r = col + 1; r < n; ++r) {
                const double factor = lu_(r, col) * inv;
                lu_(r, col) = factor;
                for (int j = col + 1; j < n; ++j) lu_(r, j) -= factor * lu_(col, j);
            }
        }
    }

    /// Solve A x = b for a single right-hand side.
    std::vector<double> solve(std::span<const double> b) const {
        const int n = lu_.rows();
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(i)] -= lu_(i, j) * x[static_cast<std::size_t>(j)];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[static_cast<std::size_t>(i)] -= lu_(i, j) * x[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(i)] /= lu_(i, i);
        }
        return x;
    }

    /// Solve A X = B column by column.
    Matrix solve(const Matrix& b) const {
        const int n = lu_.rows();
        Matrix x(n, b.cols());
        std::vector<double> column(static_cast<std::size_t>(n));
        for (int j = 0; j < b.cols(); ++j) {
            for (int i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = b(i, j);
            const std::vector<double> sol = solve(column);
            for (int i = 0; i < n; ++i) x(i, j) = sol[static_cast<std::size_t>(i)];
        }
        return x;
    }

private:
    Matrix lu_;
    std::vector<int> perm_;
};

/// Block-tridiagonal linear system with square blocks of equal size.
/// lower[0] and upper[last] are unused. rhs is stored block-contiguously.
struct BlockTridiagonalSystem {
    std::vector<Matrix> lower;
    std::vector<Matrix> diag;
    std::vector<Matrix> upper;
    std::vector<double> rhs;

    int block_rows() const { return static_cast<int>(diag.size()); }
    int block_size() const { return diag.empty() ? 0 : diag.front().rows(); }
};

struct SolverOptions {
    double residual_tolerance = 1e-10; // accepted residual: tol * (1 + max|rhs|)
    bool dense_fallback = false;       // retry with a dense full-matrix solve
};

namespace detail {

inline void require_consistent(const BlockTridiagonalSystem& sys) {
    const int rows = sys.block_rows();
    const int m = sys.block_size();
    if (rows < 1 || m < 1) throw SolverError("block system: empty");
    if (static_cast<int>(sys.lower.size()) != rows || static_cast<int>(sys.upper.size()) != rows)
        throw SolverError("block system: band size mismatch");
    if (static_cast<int>(sys.rhs.size()) != rows * m)
        throw SolverError("block system: rhs size mismatch");
    for (int j = 0; j < rows; ++j) {
        if (sys.diag[static_cast<std::size_t>(j)].rows() != m || sys.diag[static_cast<std::size_t>(j)].cols() != m)
            throw SolverError("block system: diagonal block shape mismatch");
        if (j > 0 && (sys.lower[static_cast<std::size_t>(j)].rows() != m || sys.lower[static_cast<std::size_t>(j)].cols() != m))
            throw SolverError("block system: lower block shape mismatch");
        if (j + 1 < rows && (sys.upper[static_cast<std::size_t>(j)].rows() != m || sys.upper[static_cast<std::size_t>(j)].cols() != m))
            throw SolverError("block system: upper block shape mismatch");
    }
}

inline std::vector<double> block_thomas(const BlockTridiagonalSystem& sys) {
    const int rows = sys.block_rows();
    const int m = sys.block_size();

    // Normalized forward sweep: carry G_j = inv(D'_j) C_j and g_j = inv(D'_j) b'_j.
    std::vector<Matrix> carry(static_cast<std::size_t>(rows));
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(rows));

    Matrix pivot = sys.diag[0];
    std::vector<double> rhs_block(sys.rhs.begin(), sys.rhs.begin() + m);
    for (int j = 0;; ++j) {
        LuFactor lu(pivot);
        partial[static_cast<std::size_t>(j)] = lu.solve(rhs_block);
        if (j + 1 == rows) break;
        carry[static_cast<std::size_t>(j)] = lu.solve(sys.upper[static_cast<std::size_t>(j)]);

        const Matrix& sub = sys.lower[static_cast<std::size_t>(j) + 1];
        pivot = sys.diag[static_cast<std::size_t>(j) + 1];
        const Matrix prod = multiply(sub, carry[static_cast<std::size_t>(j)]);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) pivot(r, c) -= prod(r, c);

        rhs_block.assign(sys.rhs.begin() + static_cast<std::ptrdiff_t>(j + 1) * m,
                         sys.rhs.begin() + static_cast<std::ptrdiff_t>(j + 2) * m);
        for (int r = 0; r < m; ++r) {
            double acc = 0.0;
            for (int c = 0; c < m; ++c) acc += sub(r, c) * partial[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
            rhs_block[static_cast<std::size_t>(r)] -= acc;
        }
    }

    std::vector<double> x(static_cast<std::size_t>(rows) * m);
    std::copy(partial[static_cast<std::size_t>(rows) - 1].begin(), partial[static_cast<std::size_t>(rows) - 1].end(),
              x.begin() + static_cast<std::ptrdiff_t>(rows - 1) * m);
    for (int j = rows - 2; j >= 0; --j) {
        for (int r = 0; r < m; ++r) {
            double acc = partial[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
            for (int c = 0; c < m; ++c)
                acc -= carry[static_cast<std::size_t>(j)](r, c) * x[static_cast<std::size_t>(j + 1) * m + c];
            x[static_cast<std::size_t>(j) * m + r] = acc;
        }
    }
    return x;
}

} // namespace detail

/// Max-norm residual |A x - b| of a candidate solution.
inline double residual_inf(const BlockTridiagonalSystem& sys, std::span<const double> x) {
    const int rows = sys.block_rows();
    const int m = sys.block_size();
    double worst = 0.0;
    for (int j = 0; j < rows; ++j) {
        for (int r = 0; r < m; ++r) {
            double acc = -sys.rhs[static_cast<std::size_t>(j) * m + r];
            for (int c = 0; c < m; ++c) {
                acc += sys.diag[static_cast<std::size_t>(j)](r, c) * x[static_cast<std::size_t>(j) * m + c];
                if (j > 0) acc += sys.lower[static_cast<std::size_t>(j)](r, c) * x[static_cast<std::size_t>(j - 1) * m + c];
                if (j + 1 < rows) acc += sys.upper[static_cast<std::size_t>(j)](r, c) * x[static_cast<std::size_t>(j + 1) * m + c];
            }
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

/// Assemble the full dense matrix and solve by Gaussian elimination with
/// partial pivoting. Quadratic storage; intended for diagnostics and as the
/// fallback path of solve_block_tridiagonal.
inline std::vector<double> solve_dense(const BlockTridiagonalSystem& sys) {
    detail::require_consistent(sys);
    const int rows = sys.block_rows();
    const int m = sys.block_size();
    const int dim = rows * m;

    Matrix full(dim, dim);
    for (int j = 0; j < rows; ++j)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) {
                full(j * m + r, j * m + c) = sys.diag[static_cast<std::size_t>(j)](r, c);
                if (j > 0) full(j * m + r, (j - 1) * m + c) = sys.lower[static_cast<std::size_t>(j)](r, c);
                if (j + 1 < rows) full(j * m + r, (j + 1) * m + c) = sys.upper[static_cast<std::size_t>(j)](r, c);
            }
    return LuFactor(std::move(full)).solve(sys.rhs);
}

/// Solve a block-tridiagonal system by block forward elimination and back
/// substitution, with dense LU (partial pivoting) for the pivot blocks.
///
/// The returned solution satisfies |A x - b| <= tol * (1 + max|b|); if the
/// sweep cannot reach that and `dense_fallback` is set the dense path is
/// tried before giving up with SolverError.
inline std::vector<double> solve_block_tridiagonal(const BlockTridiagonalSystem& sys,
                                                   const SolverOptions& options = {}) {
    detail::require_consistent(sys);
    double rhs_scale = 0.0;
    for (double v : sys.rhs) rhs_scale = std::max(rhs_scale, std::abs(v));
    const double bound = options.residual_tolerance * (1.0 + rhs_scale);

    std::vector<double> x = detail::block_thomas(sys);
    if (residual_inf(sys, x) <= bound) return x;

    if (options.dense_fallback) {
        x = solve_dense(sys);
        if (residual_inf(sys, x) <= bound) return x;
    }
    throw SolverError("block solve residual exceeds tolerance");
}

} // namespace fitmesh
