#include "mgdwr/linalg.hpp"

#include "mgdwr/errors.hpp"

#include <suitesparse/umfpack.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mgdwr {

SparseMatrix::SparseMatrix(int n, std::vector<int> row_ptr, std::vector<int> cols)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(cols_.size(), 0.0)
{
    if (row_ptr_.size() != static_cast<std::size_t>(n + 1) || row_ptr_.back() != static_cast<int>(cols_.size()))
        throw std::invalid_argument("inconsistent CSR pattern");
}

SparseMatrix SparseMatrix::from_triplets(int n, const std::vector<int>& rows, const std::vector<int>& cols,
                                         const std::vector<double>& values)
{
    std::vector<std::vector<std::pair<int, double>>> by_row(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < rows.size(); ++k) by_row[rows[k]].emplace_back(cols[k], values[k]);
    std::vector<int> rp{0};
    std::vector<int> cs;
    std::vector<double> vs;
    for (auto& row : by_row) {
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [c, v] : row) {
            if (static_cast<int>(cs.size()) > rp.back() && cs.back() == c)
                vs.back() += v;
            else {
                cs.push_back(c);
                vs.push_back(v);
            }
        }
        rp.push_back(static_cast<int>(cs.size()));
    }
    SparseMatrix m(n, std::move(rp), std::move(cs));
    m.values_ = std::move(vs);
    return m;
}

SparseMatrix SparseMatrix::identity(int n)
{
    std::vector<int> rp(static_cast<std::size_t>(n + 1));
    std::iota(rp.begin(), rp.end(), 0);
    std::vector<int> cs(static_cast<std::size_t>(n));
    std::iota(cs.begin(), cs.end(), 0);
    SparseMatrix m(n, std::move(rp), std::move(cs));
    std::fill(m.values_.begin(), m.values_.end(), 1.0);
    return m;
}

int SparseMatrix::find(int i, int j) const
{
    const auto begin = cols_.begin() + row_ptr_[i];
    const auto end = cols_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return static_cast<int>(it - cols_.begin());
}

void SparseMatrix::add(int i, int j, double v)
{
    const int k = find(i, j);
    if (k < 0) throw std::out_of_range("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") not in pattern");
    values_[k] += v;
}

double SparseMatrix::at(int i, int j) const
{
    const int k = find(i, j);
    return k < 0 ? 0.0 : values_[k];
}

void SparseMatrix::set_zero()
{
    std::fill(values_.begin(), values_.end(), 0.0);
}

Vector SparseMatrix::multiply(std::span<const double> x) const
{
    Vector y(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
        y[i] = s;
    }
    return y;
}

Vector SparseMatrix::multiply_transposed(std::span<const double> x) const
{
    Vector y(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[cols_[k]] += values_[k] * x[i];
    return y;
}

double SparseMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

// UMFPACK works on compressed columns. The CSR arrays of A are the CSC
// arrays of A^T, so UMFPACK_At solves A x = b and UMFPACK_A solves A^T x = b.
DirectSolver::DirectSolver(const SparseMatrix& a)
    : n_(a.n()), row_ptr_(a.row_ptr()), cols_(a.cols()), values_(a.values())
{
    if (n_ == 0) return;
    for (double v : values_)
        if (!std::isfinite(v)) throw SingularMatrix("matrix has non-finite entries");

    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    void* symbolic = nullptr;
    int status = umfpack_di_symbolic(n_, n_, row_ptr_.data(), cols_.data(), values_.data(), &symbolic, control, info);
    if (status != UMFPACK_OK) {
        umfpack_di_free_symbolic(&symbolic);
        throw SingularMatrix("symbolic factorization failed (status " + std::to_string(status) + ")");
    }
    status = umfpack_di_numeric(row_ptr_.data(), cols_.data(), values_.data(), symbolic, &numeric_, control, info);
    umfpack_di_free_symbolic(&symbolic);
    if (status != UMFPACK_OK || info[UMFPACK_RCOND] < 1e-14 || !std::isfinite(info[UMFPACK_RCOND])) {
        umfpack_di_free_numeric(&numeric_);
        numeric_ = nullptr;
        throw SingularMatrix("matrix is singular to working precision (status " + std::to_string(status) +
                             ", rcond " + std::to_string(info[UMFPACK_RCOND]) + ")");
    }
}

DirectSolver::~DirectSolver()
{
    if (numeric_) umfpack_di_free_numeric(&numeric_);
}

DirectSolver::DirectSolver(DirectSolver&& o) noexcept
    : n_(o.n_),
      row_ptr_(std::move(o.row_ptr_)),
      cols_(std::move(o.cols_)),
      values_(std::move(o.values_)),
      numeric_(o.numeric_)
{
    o.numeric_ = nullptr;
}

DirectSolver& DirectSolver::operator=(DirectSolver&& o) noexcept
{
    if (this != &o) {
        if (numeric_) umfpack_di_free_numeric(&numeric_);
        n_ = o.n_;
        row_ptr_ = std::move(o.row_ptr_);
        cols_ = std::move(o.cols_);
        values_ = std::move(o.values_);
        numeric_ = o.numeric_;
        o.numeric_ = nullptr;
    }
    return *this;
}

Vector DirectSolver::solve_impl(std::span<const double> b, bool transposed) const
{
    if (b.size() != static_cast<std::size_t>(n_)) throw std::invalid_argument("right-hand side length mismatch");
    Vector x(static_cast<std::size_t>(n_), 0.0);
    if (n_ == 0) return x;
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    const int sys = transposed ? UMFPACK_A : UMFPACK_At;
    const int status = umfpack_di_solve(sys, row_ptr_.data(), cols_.data(), values_.data(), x.data(), b.data(),
                                        numeric_, control, info);
    if (status != UMFPACK_OK) throw SingularMatrix("solve failed (status " + std::to_string(status) + ")");
    return x;
}

Vector DirectSolver::solve(std::span<const double> b) const
{
    return solve_impl(b, false);
}

Vector DirectSolver::solve_transposed(std::span<const double> b) const
{
    return solve_impl(b, true);
}

Vector solve_direct(const SparseMatrix& a, std::span<const double> b)
{
    return DirectSolver(a).solve(b);
}

double max_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_norm(std::span<const double> v, const ConstraintSet& constraints)
{
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!constraints.is_constrained(static_cast<int>(i))) m = std::max(m, std::abs(v[i]));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace mgdwr
