#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rnca/numeric_core.hpp"
#include "test_helpers.hpp"

using namespace rnca;
using rnca::testing::jacobi_eigenvalues;
using rnca::testing::random_matrix;
using rnca::testing::random_symmetric;

namespace {

void expect_orthonormal(const Matrix& v, double tol) {
    const Matrix g = v.transpose() * v;
    EXPECT_LE((g - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff(), tol);
}

double residual(const Matrix& a, const EigenResult& e, Index j) {
    return (a * e.vectors.col(j) - e.values(j) * e.vectors.col(j)).norm();
}

}  // namespace

TEST(SymEig, IdentityGivesUnitValues) {
    const EigenResult e = sym_eig(Matrix::Identity(3, 3), 2);
    ASSERT_EQ(e.values.size(), 2);
    EXPECT_NEAR(e.values(0), 1.0, 1e-14);
    EXPECT_NEAR(e.values(1), 1.0, 1e-14);
    expect_orthonormal(e.vectors, 1e-12);
}

TEST(SymEig, DiagonalTopPair) {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << 5.0, 2.0, 1.0;
    const EigenResult e = sym_eig(a, 1);
    EXPECT_NEAR(e.values(0), 5.0, 1e-14);
    EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-14);
    EXPECT_NEAR(e.vectors.col(0).tail(2).norm(), 0.0, 1e-14);
}

TEST(SymEig, MatchesJacobiOracle) {
    const Matrix a = random_symmetric(8, 11);
    const std::vector<double> oracle = jacobi_eigenvalues(a);
    const EigenResult e = sym_eig(a, 3);
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(e.values(j), oracle[static_cast<std::size_t>(j)], 1e-8);
}

TEST(SymEig, ResidualPropertyOnRandomMatrices) {
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 1 + (trial * 7) % 50;
        const Matrix a = random_symmetric(n, 1000 + static_cast<std::uint64_t>(trial));
        const Index r = 1 + trial % n;
        const EigenResult e = sym_eig(a, r);
        const double scale = std::max(a.norm(), 1e-300);
        for (Index j = 0; j < r; ++j) {
            EXPECT_LE(residual(a, e, j), 1e-8 * scale) << "n=" << n << " j=" << j;
            if (j > 0) EXPECT_GE(e.values(j - 1), e.values(j));
        }
        expect_orthonormal(e.vectors, 1e-8);
    }
}

TEST(SymEig, SubspaceIterationPathAgreesWithDense) {
    // Force the iterative path by lowering the dense limit.
    const Matrix m = random_matrix(60, 60, 5);
    Matrix a = m * m.transpose();
    a.diagonal().array() += 1.0;
    EigOptions opt;
    opt.dense_limit = 10;
    const EigenResult it = sym_eig(a, 3, opt);
    const EigenResult dense = sym_eig(a, 3);
    for (Index j = 0; j < 3; ++j) {
        EXPECT_NEAR(it.values(j), dense.values(j), 1e-8 * dense.values(0));
        EXPECT_LE(residual(a, it, j), 1e-8 * a.norm());
    }
    expect_orthonormal(it.vectors, 1e-8);
}

TEST(SymEig, SubspaceIterationHandlesIndefiniteSpectrum) {
    Matrix a = random_symmetric(80, 21);
    EigOptions opt;
    opt.dense_limit = 10;
    const EigenResult it = sym_eig(a, 2, opt);
    const std::vector<double> oracle = jacobi_eigenvalues(a);
    EXPECT_NEAR(it.values(0), oracle[0], 1e-7);
    EXPECT_NEAR(it.values(1), oracle[1], 1e-7);
}

TEST(SymEig, Errors) {
    EXPECT_THROW(sym_eig(Matrix::Zero(2, 3), 1), DimensionError);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.5;
    EXPECT_THROW(sym_eig(asym, 1), DimensionError);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = std::nan("");
    EXPECT_THROW(sym_eig(bad, 1), NumericError);
    EXPECT_THROW(sym_eig(Matrix::Identity(2, 2), 3), ArgumentError);
    EXPECT_THROW(sym_eig(Matrix::Identity(2, 2), 0), ArgumentError);
}

TEST(SpdInverseSqrt, IdentityAndDiagonal) {
    EXPECT_LE((spd_inverse_sqrt(Matrix::Identity(4, 4), 1e-12) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
    Matrix d = Matrix::Zero(2, 2);
    d.diagonal() << 4.0, 1.0;
    const Matrix w = spd_inverse_sqrt(d, 1e-12);
    EXPECT_NEAR(w(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(w(1, 1), 1.0, 1e-14);
    EXPECT_NEAR(w(0, 1), 0.0, 1e-14);
}

TEST(SpdInverseSqrt, MultiplyBackGivesIdentity) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix m = random_matrix(12, 12, 300 + seed);
        Matrix a = m * m.transpose();
        a.diagonal().array() += 0.1;
        const Matrix w = spd_inverse_sqrt(a, 1e-12);
        EXPECT_LE((w * w * a - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LE((w - w.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(SpdInverseSqrt, FloorsRankDeficientInput) {
    Matrix v = random_matrix(6, 2, 9);
    const Matrix a = v * v.transpose();  // rank 2
    const Matrix w = spd_inverse_sqrt(a, 1e-6);
    EXPECT_TRUE(w.allFinite());
    EXPECT_LE(w.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(1e-6) + 1.0);
    EXPECT_THROW(spd_inverse_sqrt(Matrix::Zero(2, 3), 1e-6), DimensionError);
    EXPECT_THROW(spd_inverse_sqrt(Matrix::Identity(2, 2), 0.0), ArgumentError);
}

TEST(OperatorNorm, IdentityDiagonalZero) {
    EXPECT_NEAR(operator_norm(Matrix::Identity(7, 7), 1e-12), 1.0, 1e-12);
    Matrix d = Matrix::Zero(2, 2);
    d.diagonal() << 3.0, 1.0;
    EXPECT_NEAR(operator_norm(d, 1e-12), 3.0, 1e-12);
    EXPECT_EQ(operator_norm(Matrix::Zero(4, 3), 1e-8), 0.0);
}

TEST(OperatorNorm, MatchesEigenvaluesForSymmetric) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix a = random_symmetric(10, 40 + seed);
        const std::vector<double> ev = jacobi_eigenvalues(a);
        const double oracle = std::max(std::abs(ev.front()), std::abs(ev.back()));
        EXPECT_NEAR(operator_norm(a, 1e-13), oracle, 1e-8 * oracle);
    }
}

TEST(OperatorNorm, TransposeInvariantAndColumnBound) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index rows = 3 + static_cast<Index>(seed % 9), cols = 2 + static_cast<Index>((seed * 5) % 11);
        const Matrix a = random_matrix(rows, cols, 70 + seed);
        const double tol = 1e-10;
        const double n1 = operator_norm(a, tol);
        const double n2 = operator_norm(a.transpose(), tol);
        EXPECT_NEAR(n1, n2, 10 * tol * n1);
        const double max_col = a.colwise().norm().maxCoeff();
        EXPECT_GE(n1 * (1 + 1e-12), max_col / std::sqrt(static_cast<double>(cols)));
        // Independent check through the singular values of A.
        Eigen::JacobiSVD<Matrix> svd(a);
        EXPECT_NEAR(n1, svd.singularValues()(0), 1e-7 * n1);
    }
}

TEST(KMeans, ForcedPartitionAndDegenerate) {
    Matrix two(2, 2);
    two << 0.0, 0.0, 5.0, 5.0;
    const auto l2 = kmeans(two, 2, 3, 10);
    EXPECT_NE(l2[0], l2[1]);

    const Matrix same = Matrix::Ones(6, 3);
    for (int l : kmeans(same, 1, 3, 10)) EXPECT_EQ(l, 0);
    EXPECT_THROW(kmeans(same, 7, 3, 10), ArgumentError);
    EXPECT_THROW(kmeans(same, 2, 3, 0), ArgumentError);
}

TEST(KMeans, SeparatedBlobsRecovered) {
    Matrix centers(2, 2);
    centers << 0.0, 0.0, 10.0, 0.0;
    std::vector<int> truth;
    const Matrix x = rnca::testing::blobs(centers, 50, 1.0, 17, truth);
    const auto labels = kmeans(x, 2, 5, 100);
    // Exact agreement up to relabelling.
    const bool flip = labels[0] != truth[0];
    for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(flip ? 1 - labels[i] : labels[i], truth[i]);
}

TEST(KMeans, ObjectiveNonIncreasingAndDeterministic) {
    const Matrix x = random_matrix(200, 3, 8);
    const KMeansResult a = kmeans_detailed(x, 5, 99, 100);
    for (std::size_t i = 1; i < a.objective.size(); ++i) EXPECT_LE(a.objective[i], a.objective[i - 1] * (1 + 1e-14));
    const KMeansResult b = kmeans_detailed(x, 5, 99, 100);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.objective, b.objective);
    std::set<int> used(a.labels.begin(), a.labels.end());
    for (int l : used) {
        EXPECT_GE(l, 0);
        EXPECT_LT(l, 5);
    }
}
