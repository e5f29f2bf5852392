#pragma once

#include "mgdwr/constraints.hpp"

#include <memory>
#include <span>
#include <vector>

namespace mgdwr {

using Vector = std::vector<double>;

/// Square matrix in compressed row storage with a fixed sparsity pattern.
class SparseMatrix {
public:
    SparseMatrix() = default;
    /// `row_ptr` has n+1 entries; columns within a row must be sorted.
    SparseMatrix(int n, std::vector<int> row_ptr, std::vector<int> cols);
    /// Builds from (row, col, value) triplets; duplicates are summed.
    static SparseMatrix from_triplets(int n, const std::vector<int>& rows, const std::vector<int>& cols,
                                      const std::vector<double>& values);
    static SparseMatrix identity(int n);

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] std::size_t nnz() const { return cols_.size(); }
    [[nodiscard]] const std::vector<int>& row_ptr() const { return row_ptr_; }
    [[nodiscard]] const std::vector<int>& cols() const { return cols_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }

    /// Position of (i,j) in the value array, -1 if outside the pattern.
    [[nodiscard]] int find(int i, int j) const;
    void add(int i, int j, double v);
    [[nodiscard]] double at(int i, int j) const;
    void set_zero();

    [[nodiscard]] Vector multiply(std::span<const double> x) const;
    [[nodiscard]] Vector multiply_transposed(std::span<const double> x) const;
    [[nodiscard]] double max_abs() const;

private:
    int n_{0};
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// LU factorization (UMFPACK) of a sparse matrix, reusable for A x = b and
/// A^T x = b. Throws SingularMatrix.
class DirectSolver {
public:
    explicit DirectSolver(const SparseMatrix& a);
    ~DirectSolver();
    DirectSolver(const DirectSolver&) = delete;
    DirectSolver& operator=(const DirectSolver&) = delete;
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    [[nodiscard]] Vector solve(std::span<const double> b) const;
    [[nodiscard]] Vector solve_transposed(std::span<const double> b) const;
    [[nodiscard]] int n() const { return n_; }

private:
    [[nodiscard]] Vector solve_impl(std::span<const double> b, bool transposed) const;

    int n_{0};
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> values_;
    void* numeric_{nullptr};
};

[[nodiscard]] Vector solve_direct(const SparseMatrix& a, std::span<const double> b);

/// l-infinity norm; with constraints, constrained entries are skipped.
[[nodiscard]] double max_norm(std::span<const double> v);
[[nodiscard]] double max_norm(std::span<const double> v, const ConstraintSet& constraints);

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);

}  // namespace mgdwr
