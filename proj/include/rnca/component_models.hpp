#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rnca/kernel_features.hpp"
#include "rnca/numeric_core.hpp"

namespace rnca {

/// Default RCCA regularizer; the randomness of the features already
/// regularizes, so only a tiny ridge is added.
inline constexpr double kDefaultCcaGamma = 1e-8;
/// Default RDC regularizer.
inline constexpr double kDefaultRdcGamma = 1e-3;

struct RpcaModel {
    FeatureMap map;
    RowVector feature_means;
    Matrix loadings;     // m x r, orthonormal columns
    Vector eigenvalues;  // r values, descending, >= 0
};

struct RccaModel {
    FeatureMap map_x;
    FeatureMap map_y;
    RowVector means_x;
    RowVector means_y;
    Matrix basis_x;  // F, m_x x r
    Matrix basis_y;  // G, m_y x r
    Vector correlations;
    double gamma_x = kDefaultCcaGamma;
    double gamma_y = kDefaultCcaGamma;

    Index components() const { return correlations.size(); }
};

struct RdcResult {
    double value = 0.0;
    Index m_used = 0;
    double gamma_used = 0.0;
};

namespace detail {

inline void require_paired(const Matrix& x, const Matrix& y, const char* what) {
    if (x.rows() != y.rows())
        throw PairingError(std::string(what) + ": row counts differ (" + std::to_string(x.rows()) + " vs " +
                           std::to_string(y.rows()) + ")");
}

/// Eigenbasis of the empirical covariance of a centered feature matrix Z:
/// `basis` holds eigenvectors of Z^T Z / (n-1) with eigenvalue `variance`,
/// and `scores` = Z * basis. When Z is wide (m > n) the decomposition runs on
/// the n x n side and directions with negligible variance are dropped.
struct CovarianceBasis {
    Matrix basis;
    Vector variance;
    Matrix scores;
};

inline CovarianceBasis covariance_basis(const Matrix& zc) {
    const Index n = zc.rows();
    const Index m = zc.cols();
    const double dof = static_cast<double>(n - 1);
    CovarianceBasis out;
    if (m <= n) {
        Matrix c = zc.transpose() * zc / dof;
        c = 0.5 * (c + c.transpose()).eval();
        EigenResult e = sym_eig(c, m);
        out.variance = e.values.cwiseMax(0.0);
        out.basis = std::move(e.vectors);
        out.scores = zc * out.basis;
        return out;
    }
    Matrix g = zc * zc.transpose() / dof;
    g = 0.5 * (g + g.transpose()).eval();
    EigenResult e = sym_eig(g, n);
    const double top = std::max(e.values(0), 0.0);
    Index keep = 0;
    while (keep < n && e.values(keep) > 1e-12 * top && e.values(keep) > 0.0) ++keep;
    out.variance = e.values.head(keep);
    const Vector root = (dof * out.variance.array()).sqrt();
    out.scores = e.vectors.leftCols(keep) * root.asDiagonal();
    out.basis = zc.transpose() * e.vectors.leftCols(keep) * root.cwiseInverse().asDiagonal();
    return out;
}

/// `count` orthonormal columns orthogonal to the columns of `v`.
inline Matrix orthogonal_complement(const Matrix& v, Index count) {
    Eigen::HouseholderQR<Matrix> qr(v);
    Matrix q = qr.householderQ();
    return q.middleCols(v.cols(), count);
}

}  // namespace detail

/// PCA of the featurized data: top-r eigenpairs of the (n-1)-normalized
/// covariance of the centered features.
inline RpcaModel rpca_fit(const Matrix& x, const FeatureMap& map, Index r) {
    if (x.rows() < 2) throw ArgumentError("rpca_fit: need at least 2 rows");
    if (r < 1 || r > map.output_dim)
        throw ArgumentError("rpca_fit: r=" + std::to_string(r) + " must lie in [1, " +
                            std::to_string(map.output_dim) + "]");
    const Matrix z = featurize(map, x);
    RpcaModel model;
    model.map = map;
    model.feature_means = column_means(z);
    const Matrix zc = center_columns(z, model.feature_means);
    const Index n = zc.rows();
    const Index m = zc.cols();
    const double dof = static_cast<double>(n - 1);

    if (m > n && r < n) {
        // Dual route: same nonzero spectrum from the n x n side.
        Matrix g = zc * zc.transpose() / dof;
        g = 0.5 * (g + g.transpose()).eval();
        EigenResult e = sym_eig(g, r);
        if (e.values(r - 1) > 1e-10 * std::max(e.values(0), 0.0)) {
            const Vector root = (dof * e.values.array()).sqrt();
            model.eigenvalues = e.values;
            model.loadings = zc.transpose() * e.vectors * root.cwiseInverse().asDiagonal();
            return model;
        }
    }
    Matrix c = zc.transpose() * zc / dof;
    c = 0.5 * (c + c.transpose()).eval();
    EigenResult e = sym_eig(c, r);
    model.eigenvalues = e.values.cwiseMax(0.0);
    model.loadings = std::move(e.vectors);
    return model;
}

/// Principal scores (z(X) - means) F.
inline Matrix rpca_transform(const RpcaModel& model, const Matrix& x) {
    return center_columns(featurize(model.map, x), model.feature_means) * model.loadings;
}

/// Regularized CCA between z_x(X) and z_y(Y) through the whitened
/// cross-covariance (C_xx + gx I)^{-1/2} C_xy (C_yy + gy I)^{-1/2}. Canonical
/// bases are normalized so that F^T (C_xx + gx I) F = I (same for G).
inline RccaModel rcca_fit(const Matrix& x, const Matrix& y, const FeatureMap& map_x, const FeatureMap& map_y,
                          double gamma_x, double gamma_y, Index r) {
    detail::require_paired(x, y, "rcca_fit");
    if (x.rows() < 2) throw ArgumentError("rcca_fit: need at least 2 rows");
    if (!(gamma_x > 0.0) || !(gamma_y > 0.0)) throw ArgumentError("rcca_fit: regularizers must be positive");
    const Index max_r = std::min(map_x.output_dim, map_y.output_dim);
    if (r < 1 || r > max_r)
        throw ArgumentError("rcca_fit: r=" + std::to_string(r) + " must lie in [1, " + std::to_string(max_r) + "]");

    RccaModel model;
    model.map_x = map_x;
    model.map_y = map_y;
    model.gamma_x = gamma_x;
    model.gamma_y = gamma_y;
    const Matrix zx = featurize(map_x, x);
    const Matrix zy = featurize(map_y, y);
    model.means_x = column_means(zx);
    model.means_y = column_means(zy);
    const detail::CovarianceBasis bx = detail::covariance_basis(center_columns(zx, model.means_x));
    const detail::CovarianceBasis by = detail::covariance_basis(center_columns(zy, model.means_y));
    const double dof = static_cast<double>(x.rows() - 1);

    const Vector dx = (bx.variance.array() + gamma_x).rsqrt();
    const Vector dy = (by.variance.array() + gamma_y).rsqrt();
    // Whitened cross-covariance expressed in the two eigenbases.
    const Matrix t = dx.asDiagonal() * (bx.scores.transpose() * by.scores / dof) * dy.asDiagonal();

    const bool full = r > std::min(t.rows(), t.cols());
    Eigen::BDCSVD<Matrix> svd(t, full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                                      : (Eigen::ComputeThinU | Eigen::ComputeThinV));
    const Index got = std::min(r, svd.singularValues().size());
    model.correlations = Vector::Zero(r);
    for (Index j = 0; j < got; ++j) model.correlations(j) = std::clamp(svd.singularValues()(j), 0.0, 1.0);

    // Directions past the last singular value carry no cross-covariance.
    // They come from the unused singular vectors first, then from the null
    // space of the kept eigenbasis, where the metric reduces to gamma * I.
    auto side_basis = [r](const detail::CovarianceBasis& b, const Vector& d, const Matrix& sv, Index dim,
                          double gamma) {
        Matrix out(dim, r);
        const Index inside = std::min(r, sv.cols());
        out.leftCols(inside) = b.basis * d.asDiagonal() * sv.leftCols(inside);
        if (inside < r) {
            if (dim - b.basis.cols() < r - inside)
                throw NumericError("rcca_fit: not enough feature directions for the requested r");
            out.rightCols(r - inside) = detail::orthogonal_complement(b.basis, r - inside) / std::sqrt(gamma);
        }
        return out;
    };
    model.basis_x = side_basis(bx, dx, svd.matrixU(), map_x.output_dim, gamma_x);
    model.basis_y = side_basis(by, dy, svd.matrixV(), map_y.output_dim, gamma_y);
    return model;
}

inline Matrix rcca_transform_x(const RccaModel& model, const Matrix& x) {
    return center_columns(featurize(model.map_x, x), model.means_x) * model.basis_x;
}

inline Matrix rcca_transform_y(const RccaModel& model, const Matrix& y) {
    return center_columns(featurize(model.map_y, y), model.means_y) * model.basis_y;
}

/// Canonical variables (U, V) for both views.
inline std::pair<Matrix, Matrix> rcca_transform(const RccaModel& model, const Matrix& x, const Matrix& y) {
    return {rcca_transform_x(model, x), rcca_transform_y(model, y)};
}

/// Sum over the first `top` component pairs of the Pearson correlation
/// between held-out canonical variables. Terms are signed.
inline double test_correlation_sum(const RccaModel& model, const Matrix& x_test, const Matrix& y_test, Index top) {
    detail::require_paired(x_test, y_test, "test_correlation_sum");
    if (x_test.rows() < 3) throw StatisticalError("test_correlation_sum: need at least 3 test rows");
    if (top < 1 || top > model.components())
        throw ArgumentError("test_correlation_sum: top=" + std::to_string(top) + " must lie in [1, " +
                            std::to_string(model.components()) + "]");
    const auto [u, v] = rcca_transform(model, x_test, y_test);
    double sum = 0.0;
    for (Index j = 0; j < top; ++j) sum += pearson(u.col(j), v.col(j));
    return sum;
}

/// n x c one-hot indicator matrix for labels in {0..c-1}.
inline Matrix class_indicators(const std::vector<int>& labels, Index& classes) {
    if (labels.empty()) throw ArgumentError("class_indicators: no labels");
    int hi = -1;
    for (int l : labels) {
        if (l < 0) throw ArgumentError("class_indicators: labels must be non-negative");
        hi = std::max(hi, l);
    }
    classes = hi + 1;
    std::vector<bool> present(static_cast<std::size_t>(classes), false);
    Matrix t = Matrix::Zero(static_cast<Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        t(static_cast<Index>(i), labels[i]) = 1.0;
        present[static_cast<std::size_t>(labels[i])] = true;
    }
    for (Index c = 0; c < classes; ++c)
        if (!present[static_cast<std::size_t>(c)])
            throw ArgumentError("class_indicators: class " + std::to_string(c) + " has no samples");
    return t;
}

/// Randomized LDA as RCCA between z(X) and the class-indicator matrix. The
/// discriminant projection is `rcca_transform_x` of the returned model.
inline RccaModel rlda_fit(const Matrix& x, const std::vector<int>& labels, const FeatureMap& map, double gamma,
                          Index r) {
    if (static_cast<Index>(labels.size()) != x.rows())
        throw PairingError("rlda_fit: " + std::to_string(labels.size()) + " labels for " + std::to_string(x.rows()) +
                           " rows");
    Index classes = 0;
    const Matrix t = class_indicators(labels, classes);
    if (classes < 2) throw DegenerateError("rlda_fit: need at least two classes");
    if (r < 1 || r > std::min(map.output_dim, classes))
        throw ArgumentError("rlda_fit: r must lie in [1, min(m, classes)]");
    return rcca_fit(x, t, map, identity_map(classes), gamma, gamma, r);
}

/// Normalized spectral clustering on the approximate affinity K_hat = Z Z^T.
/// The top-k eigenvectors of D^{-1/2} K_hat D^{-1/2} are obtained from the
/// smaller of the m x m and n x n Gram problems, row-normalized, then
/// clustered with k-means.
inline std::vector<int> spectral_cluster(const Matrix& x, Index k, const FeatureMap& map, std::uint64_t seed,
                                         int max_iters = 300) {
    const Index n = x.rows();
    if (k < 2 || k > n) throw ArgumentError("spectral_cluster: k must lie in [2, rows]");
    Matrix z = featurize(map, x);
    const Vector degree = z * (z.transpose() * Vector::Ones(n));
    for (Index i = 0; i < n; ++i)
        if (!(degree(i) > 0.0))
            throw NumericError("spectral_cluster: row " + std::to_string(i) + " has non-positive degree");
    z = degree.array().rsqrt().matrix().asDiagonal() * z;

    Matrix embed;
    if (z.cols() < n) {
        Matrix c = z.transpose() * z;
        c = 0.5 * (c + c.transpose()).eval();
        EigenResult e = sym_eig(c, std::min(k, c.rows()));
        embed = Matrix::Zero(n, k);
        for (Index j = 0; j < e.values.size(); ++j)
            if (e.values(j) > 1e-14 * std::max(e.values(0), 0.0))
                embed.col(j) = z * e.vectors.col(j) / std::sqrt(e.values(j));
    } else {
        Matrix a = z * z.transpose();
        a = 0.5 * (a + a.transpose()).eval();
        embed = sym_eig(a, k).vectors;
    }
    for (Index i = 0; i < n; ++i) {
        const double nrm = embed.row(i).norm();
        if (nrm > 0.0) embed.row(i) /= nrm;
    }
    return kmeans(embed, k, seed, max_iters);
}

/// Adjusted Rand index between two labelings of the same points.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw PairingError("adjusted_rand_index: labelings differ in length");
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto c2 = [](double v) { return v * (v - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, v] : joint) sum_ij += c2(v);
    for (const auto& [key, v] : ra) sum_a += c2(v);
    for (const auto& [key, v] : rb) sum_b += c2(v);
    const double total = c2(static_cast<double>(a.size()));
    const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_ij - expected) / (max_index - expected);
}

/// Column-wise normalized ranks rank / (n + 1), ties averaged.
inline Matrix copula_transform(const Matrix& x) {
    const Index n = x.rows();
    if (n < 1) throw ArgumentError("copula_transform: need at least one row");
    Matrix out(n, x.cols());
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index c = 0; c < x.cols(); ++c) {
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return x(i, c) < x(j, c); });
        Index i = 0;
        while (i < n) {
            Index j = i;
            while (j + 1 < n && x(order[j + 1], c) == x(order[i], c)) ++j;
            // 1-based ranks i+1 .. j+1 share their average.
            const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
            for (Index t = i; t <= j; ++t) out(order[t], c) = rank / static_cast<double>(n + 1);
            i = j + 1;
        }
    }
    return out;
}

/// Randomized Dependence Coefficient: largest canonical correlation of RCCA
/// between Fourier features of the copula-transformed views.
inline RdcResult rdc(const Matrix& x, const Matrix& y, Index m, double gamma = kDefaultRdcGamma,
                     std::uint64_t seed = 0) {
    detail::require_paired(x, y, "rdc");
    if (x.rows() < 5) throw StatisticalError("rdc: need at least 5 paired rows");
    if (m < 1) throw ArgumentError("rdc: m must be >= 1");
    if (!(gamma > 0.0)) throw ArgumentError("rdc: gamma must be positive");
    const Matrix cx = copula_transform(x);
    const Matrix cy = copula_transform(y);
    const KernelSpec sx = median_bandwidth(cx, 100000, derive_seed(seed, 11)).spec;
    const KernelSpec sy = median_bandwidth(cy, 100000, derive_seed(seed, 12)).spec;
    const FeatureMap mx = sample_fourier(cx.cols(), m, sx, derive_seed(seed, 1));
    const FeatureMap my = sample_fourier(cy.cols(), m, sy, derive_seed(seed, 2));
    const RccaModel model = rcca_fit(cx, cy, mx, my, gamma, gamma, 1);
    return RdcResult{std::clamp(model.correlations(0), 0.0, 1.0), m, gamma};
}

}  // namespace rnca
