#include "mgdwr/errors.hpp"
#include "mgdwr/linalg.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mgdwr;

namespace {

SparseMatrix random_spd(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<int> r, c;
    std::vector<double> v;
    // B^T B + n I with a banded random B
    std::vector<std::vector<double>> b(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 3); j < std::min(n, i + 4); ++j) b[i][j] = d(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = i == j ? n : 0.0;
            for (int k = 0; k < n; ++k) s += b[k][i] * b[k][j];
            if (s != 0.0) {
                r.push_back(i);
                c.push_back(j);
                v.push_back(s);
            }
        }
    return SparseMatrix::from_triplets(n, r, c, v);
}

}  // namespace

TEST(Linalg, IdentitySolve)
{
    const Vector b{1.0, -2.0, 3.5};
    const auto x = solve_direct(SparseMatrix::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
}

TEST(Linalg, DiagonalSolve)
{
    const auto a = SparseMatrix::from_triplets(2, {0, 1}, {0, 1}, {2.0, 4.0});
    const auto x = solve_direct(a, Vector{2.0, 8.0});
    EXPECT_DOUBLE_EQ(x[0], 1.0);
    EXPECT_DOUBLE_EQ(x[1], 2.0);
}

TEST(Linalg, RandomSpdResidual)
{
    const auto a = random_spd(50, 17);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-1, 1);
    Vector b(50);
    for (auto& v : b) v = d(rng);
    const auto x = solve_direct(a, b);
    const auto ax = a.multiply(x);
    double res = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) res = std::max(res, std::abs(ax[i] - b[i]));
    EXPECT_LE(res, 1e-10 * (1.0 + max_norm(b)));
}

TEST(Linalg, RoundTripAndTranspose)
{
    // nonsymmetric: spd plus a strictly upper perturbation
    auto a = random_spd(40, 5);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int i = 0; i + 1 < 40; ++i) a.add(i, i + 1, 3.0 * d(rng));
    Vector x0(40);
    for (auto& v : x0) v = d(rng);
    const DirectSolver lu(a);
    const auto x = lu.solve(a.multiply(x0));
    const auto y = lu.solve_transposed(a.multiply_transposed(x0));
    for (std::size_t i = 0; i < x0.size(); ++i) {
        EXPECT_NEAR(x[i], x0[i], 1e-8 * (1.0 + std::abs(x0[i])));
        EXPECT_NEAR(y[i], x0[i], 1e-8 * (1.0 + std::abs(x0[i])));
    }
}

TEST(Linalg, SingularThrows)
{
    const auto a = SparseMatrix::from_triplets(2, {0, 0, 1, 1}, {0, 1, 0, 1}, {1.0, 2.0, 2.0, 4.0});
    EXPECT_THROW(DirectSolver{a}, SingularMatrix);
    const auto z = SparseMatrix::from_triplets(2, {0, 1}, {0, 1}, {1.0, 0.0});
    EXPECT_THROW(DirectSolver{z}, SingularMatrix);
}

TEST(Linalg, MaxNorm)
{
    EXPECT_DOUBLE_EQ(max_norm(Vector{1.0, -3.0, 2.0}), 3.0);
    EXPECT_DOUBLE_EQ(max_norm(Vector{0.0, 0.0}), 0.0);
    ConstraintSet cs(3);
    cs.add_fixed(1, 0.0);
    cs.close();
    EXPECT_DOUBLE_EQ(max_norm(Vector{1.0, -3.0, 2.0}, cs), 2.0);
}

TEST(Linalg, TripletsSumDuplicates)
{
    const auto a = SparseMatrix::from_triplets(2, {0, 0, 1}, {1, 1, 0}, {1.0, 2.5, -1.0});
    EXPECT_DOUBLE_EQ(a.at(0, 1), 3.5);
    EXPECT_DOUBLE_EQ(a.at(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(a.at(0, 0), 0.0);
    EXPECT_EQ(a.find(1, 1), -1);
}

TEST(Linalg, FivePointLaplacian)
{
    // regression for BLAS kernels that corrupt the frontal factorization
    for (int m : {10, 20, 40}) {
        std::vector<int> r, c;
        std::vector<double> v;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const int k = i * m + j;
                auto put = [&](int col, double val) {
                    r.push_back(k);
                    c.push_back(col);
                    v.push_back(val);
                };
                put(k, 4.0);
                if (i > 0) put(k - m, -1.0);
                if (i + 1 < m) put(k + m, -1.0);
                if (j > 0) put(k - 1, -1.0);
                if (j + 1 < m) put(k + 1, -1.0);
            }
        const auto a = SparseMatrix::from_triplets(m * m, r, c, v);
        Vector x0(static_cast<std::size_t>(m * m));
        for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = std::sin(0.1 * static_cast<double>(i));
        const auto x = solve_direct(a, a.multiply(x0));
        for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(x[i], x0[i], 1e-10);
    }
}
