#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_set>
#include <vector>

#include "rnca/numeric_core.hpp"

namespace rnca {

/// Gaussian kernel k(x, y) = exp(-s ||x - y||^2).
struct KernelSpec {
    double s = 1.0;

    void validate() const {
        if (!(std::isfinite(s) && s > 0.0)) throw ArgumentError("kernel width s must be finite and positive");
    }
    double operator()(double squared_distance) const { return std::exp(-s * squared_distance); }
};

enum class MapKind { fourier, nystrom, identity };

/// How random Fourier features are scaled. `unbiased` uses sqrt(2/m) so that
/// E[z(x)^T z(y)] = k(x, y); `paper_literal` uses sqrt(1/m), which converges
/// to roughly k(x, y) / 2.
enum class ScaleConvention { unbiased, paper_literal };

inline const char* to_string(MapKind k) {
    switch (k) {
        case MapKind::fourier: return "fourier";
        case MapKind::nystrom: return "nystrom";
        case MapKind::identity: return "identity";
    }
    return "?";
}

inline const char* to_string(ScaleConvention c) {
    return c == ScaleConvention::unbiased ? "unbiased" : "paper_literal";
}

inline MapKind parse_map_kind(const std::string& s) {
    if (s == "fourier") return MapKind::fourier;
    if (s == "nystrom") return MapKind::nystrom;
    if (s == "identity") return MapKind::identity;
    throw ArgumentError("unknown feature map kind '" + s + "'");
}

inline ScaleConvention parse_convention(const std::string& s) {
    if (s == "unbiased") return ScaleConvention::unbiased;
    if (s == "paper_literal") return ScaleConvention::paper_literal;
    throw ArgumentError("unknown scale convention '" + s + "'");
}

/// A frozen nonlinear feature map. Only the fields relevant to `kind` are
/// populated; maps are never mutated after sampling.
struct FeatureMap {
    MapKind kind = MapKind::identity;
    Index input_dim = 0;
    Index output_dim = 0;
    KernelSpec spec{};
    ScaleConvention convention = ScaleConvention::unbiased;
    Matrix weights;    // fourier: m x d, row i is w_i
    Vector offsets;    // fourier: m values in [0, 2 pi)
    Matrix landmarks;  // nystrom: m x d
    Matrix whitener;   // nystrom: K_mm^{-1/2}, m x m
};

struct BandwidthEstimate {
    KernelSpec spec;
    double median_distance = 0.0;
    /// Set when every sampled pair coincides; `spec.s` then defaults to 1.
    bool degenerate = false;
};

/// Median heuristic: s = 1 / (2 median^2) over pairwise Euclidean distances.
/// Uses every pair when n(n-1)/2 <= max_pairs, otherwise `max_pairs`
/// distinct pairs drawn uniformly under `seed`.
inline BandwidthEstimate median_bandwidth(const Matrix& x, std::uint64_t max_pairs = 100000, std::uint64_t seed = 0) {
    const Index n = x.rows();
    if (n < 2) throw ArgumentError("median_bandwidth: need at least 2 rows");
    if (max_pairs < 1) throw ArgumentError("median_bandwidth: max_pairs must be >= 1");
    detail::require_finite(x, "median_bandwidth");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t total = un * (un - 1) / 2;

    std::vector<double> dist;
    if (total <= max_pairs) {
        dist.reserve(total);
        for (Index i = 0; i < n; ++i)
            for (Index j = i + 1; j < n; ++j) dist.push_back((x.row(i) - x.row(j)).norm());
    } else {
        Engine eng = make_engine(seed);
        std::uniform_int_distribution<Index> pick(0, n - 1);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(max_pairs * 2);
        dist.reserve(max_pairs);
        while (dist.size() < max_pairs) {
            Index i = pick(eng), j = pick(eng);
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            if (!seen.insert(static_cast<std::uint64_t>(i) * un + static_cast<std::uint64_t>(j)).second) continue;
            dist.push_back((x.row(i) - x.row(j)).norm());
        }
    }
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double med = dist[mid];
    if (dist.size() % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    BandwidthEstimate out;
    out.median_distance = med;
    if (med > 0.0) {
        out.spec.s = 1.0 / (2.0 * med * med);
    } else {
        out.spec.s = 1.0;
        out.degenerate = true;
    }
    return out;
}

/// Fourier map for the Gaussian kernel: w_i ~ N(0, 2s I), b_i ~ U[0, 2 pi).
inline FeatureMap sample_fourier(Index d, Index m, KernelSpec spec, std::uint64_t seed,
                                 ScaleConvention convention = ScaleConvention::unbiased) {
    if (d < 1 || m < 1) throw ArgumentError("sample_fourier: d and m must be >= 1");
    spec.validate();
    FeatureMap map;
    map.kind = MapKind::fourier;
    map.input_dim = d;
    map.output_dim = m;
    map.spec = spec;
    map.convention = convention;
    map.weights.resize(m, d);
    map.offsets.resize(m);
    Engine eng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * spec.s));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < d; ++j) map.weights(i, j) = normal(eng);
        map.offsets(i) = phase(eng);
    }
    return map;
}

inline FeatureMap identity_map(Index d) {
    if (d < 1) throw ArgumentError("identity_map: d must be >= 1");
    FeatureMap map;
    map.kind = MapKind::identity;
    map.input_dim = d;
    map.output_dim = d;
    return map;
}

/// Kernel matrix between the rows of `a` and the rows of `b`.
inline Matrix gram_cross(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
    if (a.cols() != b.cols())
        throw DimensionError("gram_cross: column counts differ (" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.cols()) + ")");
    const Vector na = a.rowwise().squaredNorm();
    const Vector nb = b.rowwise().squaredNorm();
    Matrix k = -2.0 * (a * b.transpose());
    k.colwise() += na;
    k.rowwise() += nb.transpose();
    return k.unaryExpr([&spec](double d2) { return spec(std::max(d2, 0.0)); });
}

/// Exact n x n Gaussian Gram matrix (symmetric, unit diagonal).
inline Matrix gram_exact(const Matrix& x, const KernelSpec& spec) {
    if (x.rows() < 1) throw ArgumentError("gram_exact: need at least one row");
    spec.validate();
    detail::require_finite(x, "gram_exact");
    Matrix k = gram_cross(x, x, spec);
    k = 0.5 * (k + k.transpose()).eval();
    k.diagonal().setOnes();
    return k;
}

/// Nystrom map: m landmarks drawn without replacement from the rows of X,
/// whitened by the floored inverse square root of their Gram matrix.
inline FeatureMap sample_nystrom(const Matrix& x, Index m, KernelSpec spec, std::uint64_t seed, double floor = 1e-10) {
    const Index n = x.rows();
    if (m < 1 || m > n)
        throw ArgumentError("sample_nystrom: m=" + std::to_string(m) + " must lie in [1, rows=" + std::to_string(n) + "]");
    spec.validate();
    detail::require_finite(x, "sample_nystrom");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    Engine eng = make_engine(seed);
    for (Index i = 0; i < m; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(idx[i], idx[pick(eng)]);
    }
    FeatureMap map;
    map.kind = MapKind::nystrom;
    map.input_dim = x.cols();
    map.output_dim = m;
    map.spec = spec;
    map.landmarks.resize(m, x.cols());
    for (Index i = 0; i < m; ++i) map.landmarks.row(i) = x.row(idx[i]);
    map.whitener = spd_inverse_sqrt(gram_exact(map.landmarks, spec), floor);
    return map;
}

/// z(X): one row of features per input row.
inline Matrix featurize(const FeatureMap& map, const Matrix& x) {
    if (x.cols() != map.input_dim)
        throw DimensionError("featurize: input has " + std::to_string(x.cols()) + " columns, map expects " +
                             std::to_string(map.input_dim));
    detail::require_finite(x, "featurize");
    switch (map.kind) {
        case MapKind::identity:
            return x;
        case MapKind::fourier: {
            const double m = static_cast<double>(map.output_dim);
            const double scale = std::sqrt((map.convention == ScaleConvention::unbiased ? 2.0 : 1.0) / m);
            Matrix z = x * map.weights.transpose();
            z.rowwise() += map.offsets.transpose();
            return z.unaryExpr([scale](double v) { return scale * std::cos(v); });
        }
        case MapKind::nystrom:
            return gram_cross(x, map.landmarks, map.spec) * map.whitener;
    }
    throw ArgumentError("featurize: unknown map kind");
}

/// K_hat = z(X) z(X)^T.
inline Matrix gram_approx(const FeatureMap& map, const Matrix& x) {
    const Matrix z = featurize(map, x);
    return z * z.transpose();
}

}  // namespace rnca
