#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rnca/errors.hpp"
#include "rnca/random.hpp"

namespace rnca {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Top eigenpairs of a symmetric matrix: values descending, one
/// orthonormal column of `vectors` per value.
struct EigenResult {
    Vector values;
    Matrix vectors;
};

struct EigOptions {
    /// Dimensions up to this size use the dense symmetric solver.
    Index dense_limit = 2048;
    /// Subspace iteration stops once every residual is below
    /// `residual_tol * ||A||`.
    double residual_tol = 1e-10;
    int max_iters = 2000;
};

namespace detail {

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

inline void require_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

inline void require_symmetric(const Matrix& a, const char* what) {
    if (a.rows() != a.cols())
        throw DimensionError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", expected square");
    require_finite(a, what);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DimensionError(std::string(what) + ": matrix is not symmetric");
}

/// Dense solver; Eigen returns ascending values, we flip to descending.
inline EigenResult dense_top_eig(const Matrix& a, Index r) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NumericError("sym_eig: dense solver failed to converge");
    const Index n = a.rows();
    EigenResult out{Vector(r), Matrix(n, r)};
    for (Index j = 0; j < r; ++j) {
        out.values(j) = es.eigenvalues()(n - 1 - j);
        out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    return out;
}

inline Matrix orthonormalize(const Matrix& y) {
    Eigen::HouseholderQR<Matrix> qr(y);
    return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

inline Matrix gaussian_block(Index rows, Index cols, std::uint64_t seed) {
    Engine eng = make_engine(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix q(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) q(i, j) = nd(eng);
    return q;
}

/// Shifted subspace iteration with Rayleigh-Ritz for the top-r algebraic
/// eigenpairs of a large symmetric matrix. Returns false if it did not meet
/// the residual tolerance within the iteration budget.
inline bool subspace_top_eig(const Matrix& a, Index r, const EigOptions& opt, EigenResult& out) {
    const Index n = a.rows();
    // Gershgorin bound; shifting by it makes the operator PSD so that the
    // dominant subspace is the algebraically largest one.
    const double bound = a.cwiseAbs().rowwise().sum().maxCoeff();
    if (bound == 0.0) {
        out.values = Vector::Zero(r);
        out.vectors = Matrix::Identity(n, r);
        return true;
    }
    const Index block = std::min(n, r + std::max<Index>(10, r / 2));
    Matrix q = orthonormalize(gaussian_block(n, block, 0x51ed5eedULL));
    for (int it = 0; it < opt.max_iters; ++it) {
        Matrix aq = a * q;
        Matrix h = q.transpose() * aq;
        h = 0.5 * (h + h.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        Matrix ritz = q * es.eigenvectors();
        Matrix aritz = aq * es.eigenvectors();
        bool converged = true;
        for (Index j = 0; j < r; ++j) {
            const Index c = block - 1 - j;
            const double res = (aritz.col(c) - es.eigenvalues()(c) * ritz.col(c)).norm();
            if (res > opt.residual_tol * bound) {
                converged = false;
                break;
            }
        }
        if (converged) {
            out.values.resize(r);
            out.vectors.resize(n, r);
            for (Index j = 0; j < r; ++j) {
                out.values(j) = es.eigenvalues()(block - 1 - j);
                out.vectors.col(j) = ritz.col(block - 1 - j);
            }
            return true;
        }
        q = orthonormalize(aq + bound * q);
    }
    return false;
}

}  // namespace detail

/// Top-r eigenpairs (by algebraic value, descending) of a symmetric matrix.
///
/// Dimensions up to `opt.dense_limit`, or requests for more than a quarter of
/// the spectrum, go through a full dense decomposition. Larger problems use
/// shifted subspace iteration and fall back to the dense solver if it stalls.
/// Eigenvector sign, and rotation inside repeated eigenvalues, is unspecified.
inline EigenResult sym_eig(const Matrix& a, Index r, const EigOptions& opt = {}) {
    detail::require_symmetric(a, "sym_eig");
    if (r < 1 || r > a.rows())
        throw ArgumentError("sym_eig: r=" + std::to_string(r) + " outside [1, " +
                            std::to_string(a.rows()) + "]");
    if (a.rows() <= opt.dense_limit || 4 * r > a.rows()) return detail::dense_top_eig(a, r);
    EigenResult out;
    if (detail::subspace_top_eig(a, r, opt, out)) return out;
    return detail::dense_top_eig(a, r);
}

/// V diag(max(lambda_i, floor))^{-1/2} V^T. Eigenvalues below `floor` are
/// clamped rather than rejected, so rank-deficient input stays finite.
inline Matrix spd_inverse_sqrt(const Matrix& a, double floor) {
    detail::require_symmetric(a, "spd_inverse_sqrt");
    if (!(floor > 0.0)) throw ArgumentError("spd_inverse_sqrt: floor must be positive");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NumericError("spd_inverse_sqrt: eigensolver failed");
    Vector d = es.eigenvalues().unaryExpr([floor](double v) { return 1.0 / std::sqrt(std::max(v, floor)); });
    Matrix out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

/// Largest singular value by block power iteration on A^T A with
/// Rayleigh-Ritz extraction, stopped once the estimate changes by less than
/// `tol` relative between sweeps. The start block is fixed, so the result is
/// a deterministic function of A.
inline double operator_norm(const Matrix& a, double tol = 1e-10, int max_iters = 20000) {
    detail::require_finite(a, "operator_norm");
    if (!(tol > 0.0)) throw ArgumentError("operator_norm: tol must be positive");
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    // Iterate on whichever Gram side is smaller.
    const bool tall = a.rows() >= a.cols();
    const Index dim = tall ? a.cols() : a.rows();
    const Index block = std::min<Index>(dim, 8);
    Matrix q = detail::orthonormalize(detail::gaussian_block(dim, block, 0x0b5e55edULL));
    double prev = -1.0;
    double sigma = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Matrix w = tall ? Matrix(a * q) : Matrix(a.transpose() * q);
        Matrix h = w.transpose() * w;
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        sigma = std::sqrt(std::max(es.eigenvalues()(block - 1), 0.0));
        if (prev >= 0.0 && std::abs(sigma - prev) <= tol * sigma) break;
        prev = sigma;
        q = detail::orthonormalize(tall ? Matrix(a.transpose() * w) : Matrix(a * w));
    }
    return sigma;
}

struct KMeansResult {
    std::vector<int> labels;
    Matrix centers;
    /// Objective (sum of squared distances to assigned center) after each
    /// assignment step.
    std::vector<double> objective;
};

/// Lloyd iterations from k-means++ seeding. Ties in assignment go to the
/// lowest center index; an emptied cluster keeps its previous center.
inline KMeansResult kmeans_detailed(const Matrix& points, Index k, std::uint64_t seed, int max_iters) {
    const Index n = points.rows();
    if (k < 1 || k > n)
        throw ArgumentError("kmeans: k=" + std::to_string(k) + " must lie in [1, rows=" + std::to_string(n) + "]");
    if (max_iters < 1) throw ArgumentError("kmeans: max_iters must be >= 1");
    detail::require_finite(points, "kmeans");

    Engine eng = make_engine(seed);
    Matrix centers(k, points.cols());
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<Index> pick(0, n - 1);
        centers.row(0) = points.row(pick(eng));
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index c = 1; c < k; ++c) {
        double total = 0.0;
        for (Index i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (points.row(i) - centers.row(c - 1)).squaredNorm());
            total += d2[i];
        }
        Index chosen = n - 1;
        if (total > 0.0) {
            const double target = unif(eng) * total;
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = std::uniform_int_distribution<Index>(0, n - 1)(eng);
        }
        centers.row(c) = points.row(chosen);
    }

    KMeansResult res{std::vector<int>(static_cast<std::size_t>(n), -1), centers, {}};
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        double obj = 0.0;
        for (Index i = 0; i < n; ++i) {
            Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Index c = 0; c < k; ++c) {
                const double d = (points.row(i) - res.centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            obj += best_d;
            if (res.labels[i] != static_cast<int>(best)) {
                res.labels[i] = static_cast<int>(best);
                changed = true;
            }
        }
        res.objective.push_back(obj);
        if (!changed && it > 0) break;
        Matrix sums = Matrix::Zero(k, points.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(res.labels[i]) += points.row(i);
            ++counts[res.labels[i]];
        }
        for (Index c = 0; c < k; ++c)
            if (counts[c] > 0) res.centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
    return res;
}

inline std::vector<int> kmeans(const Matrix& points, Index k, std::uint64_t seed, int max_iters) {
    return kmeans_detailed(points, k, seed, max_iters).labels;
}

/// Column means as a row vector.
inline RowVector column_means(const Matrix& x) { return x.colwise().mean(); }

inline Matrix center_columns(const Matrix& x, const RowVector& means) { return x.rowwise() - means; }

/// Pearson correlation of two equal-length vectors; 0 if either is constant.
inline double pearson(const Vector& a, const Vector& b) {
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    const double den = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    return den > 0.0 ? ca.dot(cb) / den : 0.0;
}

}  // namespace rnca
