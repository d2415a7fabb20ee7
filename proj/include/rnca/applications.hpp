#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnca/component_models.hpp"
#include "rnca/kernel_features.hpp"
#include "rnca/numeric_core.hpp"

namespace rnca {

/// Ridge regression on random features, one output column per target.
/// Predictions are (z(X) - feature_means) * weights + intercepts.
struct RidgeModel {
    FeatureMap map;
    RowVector feature_means;
    Matrix weights;  // m x D
    RowVector intercepts;
    double lambda = 1e-6;
};

struct AutoencoderModel {
    RpcaModel encoder;
    RidgeModel decoder;
};

/// One privileged attribute of a LUPI feature construction.
struct LupiAttribute {
    Index column = 0;
    /// Constant privileged columns are skipped; `model` is then empty.
    bool skipped = false;
    std::string note;
    RccaModel model;
};

struct LupiResult {
    Index per_attr = 5;
    std::vector<LupiAttribute> attributes;
    /// n x (per_attr * kept attributes) training features.
    Matrix features;
};

/// alpha = (Zc^T Zc + lambda I)^{-1} Zc^T (T - mean(T)) on centered features.
/// Wide feature matrices (m > n) are solved in the equivalent n x n form.
inline RidgeModel ridge_fit(const Matrix& inputs, const Matrix& targets, const FeatureMap& map, double lambda) {
    detail::require_paired(inputs, targets, "ridge_fit");
    if (!(lambda > 0.0)) throw ArgumentError("ridge_fit: lambda must be positive");
    if (inputs.rows() < 1) throw ArgumentError("ridge_fit: need at least one row");
    detail::require_finite(targets, "ridge_fit");
    RidgeModel model;
    model.map = map;
    model.lambda = lambda;
    const Matrix z = featurize(map, inputs);
    model.feature_means = column_means(z);
    model.intercepts = column_means(targets);
    const Matrix zc = center_columns(z, model.feature_means);
    const Matrix tc = center_columns(targets, model.intercepts);
    if (zc.cols() <= zc.rows()) {
        Matrix normal = zc.transpose() * zc;
        normal.diagonal().array() += lambda;
        model.weights = normal.llt().solve(zc.transpose() * tc);
    } else {
        Matrix gram = zc * zc.transpose();
        gram.diagonal().array() += lambda;
        model.weights = zc.transpose() * gram.llt().solve(tc);
    }
    if (!model.weights.allFinite()) throw NumericError("ridge_fit: solution is not finite");
    return model;
}

inline Matrix ridge_predict(const RidgeModel& model, const Matrix& inputs) {
    Matrix out = center_columns(featurize(model.map, inputs), model.feature_means) * model.weights;
    out.rowwise() += model.intercepts;
    return out;
}

/// Randomized autoencoder: encode with the top-d RPCA components of an
/// m-feature Fourier map, decode with ridge regression from a fresh Fourier
/// map on the latent codes back to every observed column.
inline AutoencoderModel autoencoder_fit(const Matrix& x, Index m, Index d, double lambda, std::uint64_t seed) {
    if (x.rows() < 2) throw ArgumentError("autoencoder_fit: need at least 2 rows");
    if (m < 1 || d < 1 || d > m) throw ArgumentError("autoencoder_fit: need 1 <= d <= m");
    AutoencoderModel model;
    const KernelSpec enc_spec = median_bandwidth(x, 100000, derive_seed(seed, 1)).spec;
    model.encoder = rpca_fit(x, sample_fourier(x.cols(), m, enc_spec, derive_seed(seed, 2)), d);
    const Matrix codes = rpca_transform(model.encoder, x);
    const KernelSpec dec_spec = median_bandwidth(codes, 100000, derive_seed(seed, 3)).spec;
    model.decoder = ridge_fit(codes, x, sample_fourier(d, m, dec_spec, derive_seed(seed, 4)), lambda);
    return model;
}

inline Matrix autoencoder_encode(const AutoencoderModel& model, const Matrix& x) {
    return rpca_transform(model.encoder, x);
}

inline Matrix autoencoder_reconstruct(const AutoencoderModel& model, const Matrix& x) {
    return ridge_predict(model.decoder, rpca_transform(model.encoder, x));
}

/// Test-time LUPI features: needs only the regular inputs X.
inline Matrix lupi_transform(const LupiResult& result, const Matrix& x) {
    Index kept = 0;
    for (const auto& a : result.attributes) kept += a.skipped ? 0 : 1;
    Matrix out(x.rows(), kept * result.per_attr);
    Index at = 0;
    for (const auto& a : result.attributes) {
        if (a.skipped) continue;
        out.middleCols(at, result.per_attr) = rcca_transform_x(a.model, x).leftCols(result.per_attr);
        at += result.per_attr;
    }
    return out;
}

/// Distils privileged columns into features computable from X alone: for
/// each privileged column i, RCCA between z_x(X) and random features of
/// [x_star_i, y], keeping the top `per_attr` X-side canonical variables.
/// The X-side map is shared across attributes.
inline LupiResult lupi_features(const Matrix& x, const Matrix& x_star, const Vector& y, Index m, double gamma,
                                Index per_attr, std::uint64_t seed) {
    detail::require_paired(x, x_star, "lupi_features");
    if (y.size() != x.rows()) throw PairingError("lupi_features: label count differs from row count");
    if (per_attr < 1 || per_attr > m) throw ArgumentError("lupi_features: need 1 <= per_attr <= m");
    if (x.rows() < 2) throw ArgumentError("lupi_features: need at least 2 rows");
    LupiResult out;
    out.per_attr = per_attr;
    const FeatureMap map_x =
        sample_fourier(x.cols(), m, median_bandwidth(x, 100000, derive_seed(seed, 1)).spec, derive_seed(seed, 2));
    for (Index i = 0; i < x_star.cols(); ++i) {
        LupiAttribute attr;
        attr.column = i;
        if (x_star.col(i).maxCoeff() == x_star.col(i).minCoeff()) {
            attr.skipped = true;
            attr.note = "privileged column " + std::to_string(i) + " is constant";
            out.attributes.push_back(std::move(attr));
            continue;
        }
        Matrix side(x.rows(), 2);
        side.col(0) = x_star.col(i);
        side.col(1) = y;
        const std::uint64_t s = derive_seed(seed, 100 + static_cast<std::uint64_t>(i));
        const KernelSpec spec = median_bandwidth(side, 100000, derive_seed(s, 1)).spec;
        attr.model = rcca_fit(x, side, map_x, sample_fourier(2, m, spec, derive_seed(s, 2)), gamma, gamma, per_attr);
        out.attributes.push_back(std::move(attr));
    }
    out.features = lupi_transform(out, x);
    return out;
}

/// One-vs-all regularized least-squares classifier on raw features; labels
/// are argmax of the fitted indicator scores.
struct LeastSquaresClassifier {
    RidgeModel ridge;
    Index classes = 0;
};

inline LeastSquaresClassifier fit_ls_classifier(const Matrix& x, const std::vector<int>& labels, double lambda) {
    LeastSquaresClassifier clf;
    const Matrix t = class_indicators(labels, clf.classes);
    clf.ridge = ridge_fit(x, t, identity_map(x.cols()), lambda);
    return clf;
}

inline std::vector<int> predict_ls_classifier(const LeastSquaresClassifier& clf, const Matrix& x) {
    const Matrix scores = ridge_predict(clf.ridge, x);
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
        Index best = 0;
        scores.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

}  // namespace rnca
