#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rnca/kernel_features.hpp"
#include "rnca/numeric_core.hpp"

namespace rnca {

inline constexpr Index kDefaultOracleCap = 2000;

/// Size cap for the exact O(n^3) oracles; RNCA_ORACLE_CAP overrides it.
inline Index oracle_cap() {
    if (const char* env = std::getenv("RNCA_ORACLE_CAP")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<Index>(v);
    }
    return kDefaultOracleCap;
}

enum class BoundKind { pca, cca };
enum class BoundVariant { paper, corrected };

inline BoundKind parse_bound_kind(const std::string& s) {
    if (s == "pca") return BoundKind::pca;
    if (s == "cca") return BoundKind::cca;
    throw ArgumentError("unknown bound kind '" + s + "'");
}

inline BoundVariant parse_bound_variant(const std::string& s) {
    if (s == "paper") return BoundVariant::paper;
    if (s == "corrected") return BoundVariant::corrected;
    throw ArgumentError("unknown bound variant '" + s + "'");
}

namespace detail {

inline void require_cap(Index n, Index cap, const char* what) {
    if (n > cap)
        throw CapacityError(std::string(what) + ": n=" + std::to_string(n) + " exceeds the exact-oracle cap of " +
                            std::to_string(cap) + " (RNCA_ORACLE_CAP)");
}

/// H K H with H = I - 11^T / n.
inline Matrix double_center(const Matrix& k) {
    const RowVector col = k.colwise().mean();
    const Vector row = k.rowwise().mean();
    const double all = k.mean();
    Matrix out = k;
    out.rowwise() -= col;
    out.colwise() -= row;
    out.array() += all;
    return 0.5 * (out + out.transpose());
}

}  // namespace detail

/// Exact kernel PCA: top-r eigenpairs of the centered Gram matrix H K H.
inline EigenResult kpca_exact(const Matrix& x, const KernelSpec& spec, Index r, Index cap = oracle_cap()) {
    detail::require_cap(x.rows(), cap, "kpca_exact");
    return sym_eig(detail::double_center(gram_exact(x, spec)), r);
}

/// Exact regularized kernel CCA correlations, top r, descending.
///
/// Computed as the singular values of S_x^{1/2} S_y^{1/2} with
/// S = Kc (Kc + (n-1) gamma I)^{-1} and Kc the centered Gram matrix: the
/// symmetric form of the (K + gamma I)^{-1} K block system, on the same
/// centering and regularizer scale that rcca_fit uses, so it is the limit of
/// RCCA as the number of features grows.
inline Vector kcca_exact(const Matrix& x, const Matrix& y, const KernelSpec& spec_x, const KernelSpec& spec_y,
                         double gamma_x, double gamma_y, Index r, Index cap = oracle_cap()) {
    if (x.rows() != y.rows()) throw PairingError("kcca_exact: row counts differ");
    if (!(gamma_x > 0.0) || !(gamma_y > 0.0)) throw ArgumentError("kcca_exact: regularizers must be positive");
    const Index n = x.rows();
    if (n < 2) throw ArgumentError("kcca_exact: need at least 2 rows");
    if (r < 1 || r > n) throw ArgumentError("kcca_exact: r must lie in [1, n]");
    detail::require_cap(n, cap, "kcca_exact");
    const double dof = static_cast<double>(n - 1);

    auto half_smoother = [&](const Matrix& data, const KernelSpec& spec, double gamma) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(detail::double_center(gram_exact(data, spec)));
        if (es.info() != Eigen::Success) throw NumericError("kcca_exact: eigensolver failed");
        const Vector lam = es.eigenvalues().cwiseMax(0.0);
        const Vector w = (lam.array() / (lam.array() + dof * gamma)).sqrt();
        return Matrix(es.eigenvectors() * w.asDiagonal());
    };
    const Matrix ax = half_smoother(x, spec_x, gamma_x);
    const Matrix ay = half_smoother(y, spec_y, gamma_y);
    Eigen::BDCSVD<Matrix> svd(ax.transpose() * ay);
    Vector out = svd.singularValues().head(r);
    return out.cwiseMin(1.0).cwiseMax(0.0);
}

/// Closed-form expected-error bounds for RPCA (kind pca) and RCCA (kind
/// cca), natural logarithms. The corrected variant doubles the constants that
/// come from the feature-norm bound B, which is 2n rather than n under the
/// unbiased feature scaling.
inline double bound_value(BoundKind kind, double n, double m, double gamma = 1.0,
                          BoundVariant variant = BoundVariant::paper) {
    if (!(n >= 2.0)) throw ArgumentError("bound_value: n must be >= 2");
    if (!(m >= 1.0)) throw ArgumentError("bound_value: m must be >= 1");
    if (kind == BoundKind::cca && !(gamma > 0.0)) throw ArgumentError("bound_value: gamma must be positive");
    const double c = variant == BoundVariant::paper ? 1.0 : 2.0;
    const double lg = kind == BoundKind::pca ? std::log(n) : std::log(2.0 * n);
    const double core = std::sqrt(3.0 * c * n * n * lg / m) + 2.0 * c * n * lg / m;
    return kind == BoundKind::pca ? core : core / gamma;
}

struct ErrorConfig {
    Index m = 1000;
    double gamma = 1e-3;
    Index trials = 25;
    std::uint64_t seed = 0;
    MapKind map_kind = MapKind::fourier;
    ScaleConvention convention = ScaleConvention::unbiased;
    unsigned threads = 1;
    Index cap = oracle_cap();
    double norm_tol = 1e-10;
};

struct ErrorStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_trial;
};

namespace detail {

inline FeatureMap sample_map(const Matrix& x, const KernelSpec& spec, const ErrorConfig& cfg, std::uint64_t seed) {
    if (cfg.map_kind == MapKind::nystrom) return sample_nystrom(x, cfg.m, spec, seed);
    if (cfg.map_kind == MapKind::fourier) return sample_fourier(x.cols(), cfg.m, spec, seed, cfg.convention);
    throw ArgumentError("empirical_error: map kind must be fourier or nystrom");
}

/// Runs body(t) for t in [0, trials) on up to `threads` workers. Each trial
/// writes only its own slot, so results do not depend on the schedule.
template <class Body>
void for_each_trial(Index trials, unsigned threads, Body&& body) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
    if (workers == 1) {
        for (Index t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (Index t = w; t < trials; t += workers) body(t);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline ErrorStats summarize(std::vector<double> errs) {
    ErrorStats s;
    const double k = static_cast<double>(errs.size());
    for (double e : errs) s.mean += e;
    s.mean /= k;
    if (errs.size() > 1) {
        double ss = 0.0;
        for (double e : errs) ss += (e - s.mean) * (e - s.mean);
        s.stddev = std::sqrt(ss / (k - 1.0));
    }
    s.per_trial = std::move(errs);
    return s;
}

/// (K + gamma I)^{-1} K_other.
inline Matrix regularized_solve(const Matrix& k, double gamma, const Matrix& k_other) {
    Matrix reg = k;
    reg.diagonal().array() += gamma;
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() != Eigen::Success) throw NumericError("empirical_error: regularized Gram is not positive definite");
    return llt.solve(k_other);
}

/// R^{-1} L = [[0, (K_x + gx I)^{-1} K_y], [(K_y + gy I)^{-1} K_x, 0]].
inline Matrix cca_block_operator(const Matrix& kx, const Matrix& ky, double gamma) {
    const Index n = kx.rows();
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    out.topRightCorner(n, n) = regularized_solve(kx, gamma, ky);
    out.bottomLeftCorner(n, n) = regularized_solve(ky, gamma, kx);
    return out;
}

}  // namespace detail

/// Mean (over independent feature draws) operator-norm error of the
/// randomized kernel approximation. Kind pca measures ||K_hat - K||; kind
/// cca measures ||R_hat^{-1} L_hat - R^{-1} L|| on the 2n x 2n block
/// operators. Trial t draws its maps from seed + t.
inline ErrorStats empirical_error(BoundKind kind, const Matrix& x, const Matrix* y, const KernelSpec& spec_x,
                                  const KernelSpec& spec_y, const ErrorConfig& cfg) {
    const Index n = x.rows();
    if (cfg.trials < 1) throw ArgumentError("empirical_error: trials must be >= 1");
    if (cfg.m < 1) throw ArgumentError("empirical_error: m must be >= 1");
    detail::require_cap(kind == BoundKind::cca ? 2 * n : n, cfg.cap, "empirical_error");
    std::vector<double> errs(static_cast<std::size_t>(cfg.trials));

    if (kind == BoundKind::pca) {
        const Matrix k = gram_exact(x, spec_x);
        detail::for_each_trial(cfg.trials, cfg.threads, [&](Index t) {
            const FeatureMap map = detail::sample_map(x, spec_x, cfg, cfg.seed + static_cast<std::uint64_t>(t));
            const Matrix z = featurize(map, x);
            errs[t] = operator_norm(z * z.transpose() - k, cfg.norm_tol);
        });
        return detail::summarize(std::move(errs));
    }

    if (y == nullptr) throw ArgumentError("empirical_error: kind cca requires Y");
    if (y->rows() != n) throw PairingError("empirical_error: X and Y row counts differ");
    if (!(cfg.gamma > 0.0)) throw ArgumentError("empirical_error: gamma must be positive");
    const Matrix exact = detail::cca_block_operator(gram_exact(x, spec_x), gram_exact(*y, spec_y), cfg.gamma);
    detail::for_each_trial(cfg.trials, cfg.threads, [&](Index t) {
        const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(t);
        const Matrix zx = featurize(detail::sample_map(x, spec_x, cfg, derive_seed(s, 0)), x);
        const Matrix zy = featurize(detail::sample_map(*y, spec_y, cfg, derive_seed(s, 1)), *y);
        const Matrix approx = detail::cca_block_operator(zx * zx.transpose(), zy * zy.transpose(), cfg.gamma);
        errs[t] = operator_norm(approx - exact, cfg.norm_tol);
    });
    return detail::summarize(std::move(errs));
}

enum class SweepParam { n, m, gamma };

inline SweepParam parse_sweep_param(const std::string& s) {
    if (s == "n") return SweepParam::n;
    if (s == "m") return SweepParam::m;
    if (s == "gamma") return SweepParam::gamma;
    throw ArgumentError("unknown sweep parameter '" + s + "'");
}

struct SweepConfig {
    BoundKind kind = BoundKind::pca;
    SweepParam varying = SweepParam::m;
    std::vector<double> grid;
    Index base_n = 1000;
    Index base_m = 1000;
    double base_gamma = 1e-3;
    Index dims = 10;
    Index trials = 25;
    std::uint64_t seed = 0;
    ScaleConvention convention = ScaleConvention::unbiased;
    BoundVariant bound_variant = BoundVariant::paper;
    unsigned threads = 1;
    Index cap = oracle_cap();

    void validate() const {
        if (grid.empty()) throw ArgumentError("sweep: grid is empty");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw ArgumentError("sweep: grid values must be positive");
            if (i > 0 && !(grid[i] > grid[i - 1])) throw ArgumentError("sweep: grid must be strictly increasing");
            if (varying != SweepParam::gamma && grid[i] != std::floor(grid[i]))
                throw ArgumentError("sweep: n and m grids must hold whole numbers");
        }
        if (trials < 1) throw ArgumentError("sweep: trials must be >= 1");
        if (dims < 1 || base_n < 2 || base_m < 1 || !(base_gamma > 0.0))
            throw ArgumentError("sweep: base parameters out of range");
    }
};

struct SweepRecord {
    double param_value = 0.0;
    double empirical_mean_error = 0.0;
    double empirical_stddev = 0.0;
    double bound_value = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    /// Least-squares slope of log(mean error) against log(param); empty when
    /// fewer than two records have a positive error.
    std::optional<double> log_log_slope;
};

inline double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    const double k = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx;
        sxy += dx * (std::log(ys[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

inline Matrix standard_normal(Index rows, Index cols, std::uint64_t seed) {
    Engine eng = make_engine(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) x(i, j) = nd(eng);
    return x;
}

/// One record per grid value. Each grid point gets fresh standard-normal
/// data and median-heuristic bandwidths from sub-seeds of `cfg.seed`.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult out;
    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        const double v = cfg.grid[g];
        const Index n = cfg.varying == SweepParam::n ? static_cast<Index>(v) : cfg.base_n;
        const Index m = cfg.varying == SweepParam::m ? static_cast<Index>(v) : cfg.base_m;
        const double gamma = cfg.varying == SweepParam::gamma ? v : cfg.base_gamma;
        const std::uint64_t gs = derive_seed(cfg.seed, g);
        const Matrix x = standard_normal(n, cfg.dims, derive_seed(gs, 1));
        const Matrix y = standard_normal(n, cfg.dims, derive_seed(gs, 2));
        const KernelSpec sx = median_bandwidth(x, 100000, derive_seed(gs, 3)).spec;
        const KernelSpec sy = median_bandwidth(y, 100000, derive_seed(gs, 4)).spec;

        ErrorConfig ec;
        ec.m = m;
        ec.gamma = gamma;
        ec.trials = cfg.trials;
        ec.seed = derive_seed(gs, 5);
        ec.convention = cfg.convention;
        ec.threads = cfg.threads;
        ec.cap = cfg.cap;
        const ErrorStats st = empirical_error(cfg.kind, x, cfg.kind == BoundKind::cca ? &y : nullptr, sx, sy, ec);

        SweepRecord rec;
        rec.param_value = v;
        rec.empirical_mean_error = st.mean;
        rec.empirical_stddev = st.stddev;
        rec.bound_value = bound_value(cfg.kind, static_cast<double>(n), static_cast<double>(m), gamma, cfg.bound_variant);
        out.records.push_back(rec);
        if (st.mean > 0.0) {
            xs.push_back(v);
            ys.push_back(st.mean);
        }
    }
    if (xs.size() >= 2) out.log_log_slope = log_log_slope(xs, ys);
    return out;
}

}  // namespace rnca
