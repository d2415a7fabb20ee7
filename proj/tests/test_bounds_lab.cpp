#include <gtest/gtest.h>

#include <cmath>

#include "rnca/bounds_lab.hpp"
#include "rnca/component_models.hpp"
#include "test_helpers.hpp"

using namespace rnca;
using rnca::testing::random_matrix;

TEST(BoundValue, HandEvaluatedSpotValues) {
    // sqrt(3e6 * 6.907755 / 1000) + 2 * 6.907755 = 143.9557 + 13.8155
    EXPECT_NEAR(bound_value(BoundKind::pca, 1000, 1000), 157.77, 0.01);
    // 1000 * (sqrt(3e6 * 7.600902 / 1000) + 2 * 7.600902)
    EXPECT_NEAR(bound_value(BoundKind::cca, 1000, 1000, 1e-3), 1.662e5, 0.001e5);
}

TEST(BoundValue, CorrectedVariantDoublesConstants) {
    const double n = 500, m = 300, ln = std::log(n);
    EXPECT_NEAR(bound_value(BoundKind::pca, n, m, 1.0, BoundVariant::corrected),
                std::sqrt(6 * n * n * ln / m) + 4 * n * ln / m, 1e-9);
    const double l2 = std::log(2 * n);
    EXPECT_NEAR(bound_value(BoundKind::cca, n, m, 0.1, BoundVariant::corrected),
                (std::sqrt(6 * n * n * l2 / m) + 4 * n * l2 / m) / 0.1, 1e-7);
}

TEST(BoundValue, MonotoneInEachArgument) {
    for (auto variant : {BoundVariant::paper, BoundVariant::corrected}) {
        for (double m = 1; m < 1e5; m *= 2)
            EXPECT_GT(bound_value(BoundKind::pca, 100, m, 1, variant), bound_value(BoundKind::pca, 100, 2 * m, 1, variant));
        for (double n = 2; n < 1e5; n *= 2)
            EXPECT_LT(bound_value(BoundKind::cca, n, 50, 0.1, variant), bound_value(BoundKind::cca, 2 * n, 50, 0.1, variant));
        for (double g = 1e-6; g < 10; g *= 3)
            EXPECT_GT(bound_value(BoundKind::cca, 100, 50, g, variant), bound_value(BoundKind::cca, 100, 50, 3 * g, variant));
    }
}

TEST(BoundValue, RootTermHalvesWhenMQuadruples) {
    const double n = 1000, m = 1e6;
    const double root = std::sqrt(3 * n * n * std::log(n) / m);
    const double at4m = bound_value(BoundKind::pca, n, 4 * m);
    EXPECT_NEAR(at4m, root / 2, 0.01 * root);
}

TEST(BoundValue, Errors) {
    EXPECT_THROW(bound_value(BoundKind::pca, 1, 10), ArgumentError);
    EXPECT_THROW(bound_value(BoundKind::pca, 10, 0.5), ArgumentError);
    EXPECT_THROW(bound_value(BoundKind::cca, 10, 10, 0.0), ArgumentError);
}

TEST(KpcaExact, IdenticalPointsHaveZeroSpectrum) {
    const EigenResult e = kpca_exact(Matrix::Constant(6, 2, 1.5), KernelSpec{1.0}, 6);
    EXPECT_LE(e.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KpcaExact, TwoPointsHaveRankOne) {
    Matrix x(2, 1);
    x << 0.0, 1.0;
    const EigenResult e = kpca_exact(x, KernelSpec{0.5}, 2);
    // H K H = (1 - k) / 2 * [[1, -1], [-1, 1]] has eigenvalues 1 - k and 0.
    EXPECT_NEAR(e.values(0), 1.0 - std::exp(-0.5), 1e-12);
    EXPECT_NEAR(e.values(1), 0.0, 1e-12);
}

TEST(KpcaExact, TraceIdentity) {
    const Matrix x = random_matrix(40, 3, 1);
    const KernelSpec spec{0.3};
    const EigenResult e = kpca_exact(x, spec, 40);
    const Matrix h = Matrix::Identity(40, 40) - Matrix::Constant(40, 40, 1.0 / 40);
    const double trace = (h * gram_exact(x, spec) * h).trace();
    EXPECT_NEAR(e.values.sum(), trace, 1e-8);
}

TEST(KpcaExact, CapacityRefusal) {
    EXPECT_THROW(kpca_exact(random_matrix(11, 2, 1), KernelSpec{1.0}, 1, 10), CapacityError);
    try {
        kpca_exact(random_matrix(11, 2, 1), KernelSpec{1.0}, 1, 10);
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("cap of 10"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 4);
    }
}

TEST(KccaExact, SelfCorrelationNearOne) {
    const Matrix x = random_matrix(50, 2, 2);
    const KernelSpec spec = median_bandwidth(x).spec;
    const double g = 1e-4;
    const Vector rho = kcca_exact(x, x, spec, spec, g, g, 3);
    EXPECT_GE(rho(0), 1.0 - 10 * g);
}

TEST(KccaExact, InfiniteRegularizationKillsCorrelation) {
    const Matrix x = random_matrix(30, 2, 3);
    const Matrix y = x + 0.1 * random_matrix(30, 2, 4);
    const Vector rho = kcca_exact(x, y, KernelSpec{0.5}, KernelSpec{0.5}, 1e12, 1e12, 3);
    EXPECT_LE(rho.maxCoeff(), 1e-9);
}

TEST(KccaExact, SwapInvariance) {
    const Matrix x = random_matrix(40, 2, 5);
    const Matrix y = x.array().sin().matrix() + 0.2 * random_matrix(40, 1, 6).replicate(1, 2);
    const Vector a = kcca_exact(x, y, KernelSpec{0.4}, KernelSpec{0.9}, 1e-2, 3e-3, 4);
    const Vector b = kcca_exact(y, x, KernelSpec{0.9}, KernelSpec{0.4}, 3e-3, 1e-2, 4);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
    for (Index j = 1; j < 4; ++j) EXPECT_GE(a(j - 1), a(j));
}

TEST(KccaExact, MatchesRccaWithManyFeatures) {
    const Matrix x = random_matrix(100, 1, 7);
    const Matrix y = x;
    const KernelSpec spec = median_bandwidth(x).spec;
    const double g = 1e-3;
    const double exact = kcca_exact(x, y, spec, spec, g, g, 1)(0);
    const RccaModel m = rcca_fit(x, y, sample_fourier(1, 4000, spec, 1), sample_fourier(1, 4000, spec, 2), g, g, 1);
    EXPECT_NEAR(m.correlations(0), exact, 0.05);
}

TEST(KccaExact, Errors) {
    const Matrix x = random_matrix(12, 1, 1);
    EXPECT_THROW(kcca_exact(x, x.topRows(11), KernelSpec{}, KernelSpec{}, 1, 1, 1), PairingError);
    EXPECT_THROW(kcca_exact(x, x, KernelSpec{}, KernelSpec{}, 0, 1, 1), ArgumentError);
    EXPECT_THROW(kcca_exact(x, x, KernelSpec{}, KernelSpec{}, 1, 1, 1, 10), CapacityError);
}

TEST(EmpiricalError, FullNystromIsExact) {
    const Matrix x = random_matrix(60, 3, 8);
    ErrorConfig cfg;
    cfg.m = 60;
    cfg.trials = 3;
    cfg.map_kind = MapKind::nystrom;
    const KernelSpec spec = median_bandwidth(x).spec;
    const ErrorStats st = empirical_error(BoundKind::pca, x, nullptr, spec, spec, cfg);
    EXPECT_LE(st.mean, 1e-6);
    EXPECT_EQ(st.per_trial.size(), 3u);
}

TEST(EmpiricalError, PcaErrorDecreasesInM) {
    const Matrix x = random_matrix(256, 10, 9);
    const KernelSpec spec = median_bandwidth(x).spec;
    double prev = 1e300;
    for (Index m : {32, 128, 512, 2048}) {
        ErrorConfig cfg;
        cfg.m = m;
        cfg.trials = 25;
        cfg.seed = 11;
        const ErrorStats st = empirical_error(BoundKind::pca, x, nullptr, spec, spec, cfg);
        EXPECT_GE(st.mean, 0.0);
        EXPECT_LT(st.mean, prev) << "m=" << m;
        prev = st.mean;
    }
}

TEST(EmpiricalError, CcaErrorShrinksWithGamma) {
    const Matrix x = random_matrix(100, 3, 10);
    const Matrix y = random_matrix(100, 3, 11);
    const KernelSpec sx = median_bandwidth(x).spec, sy = median_bandwidth(y).spec;
    ErrorConfig cfg;
    cfg.m = 100;
    cfg.trials = 10;
    cfg.seed = 3;
    cfg.gamma = 1e-1;
    const double big = empirical_error(BoundKind::cca, x, &y, sx, sy, cfg).mean;
    cfg.gamma = 1e-3;
    const double small = empirical_error(BoundKind::cca, x, &y, sx, sy, cfg).mean;
    EXPECT_LE(big, small);
}

TEST(EmpiricalError, ThreadCountDoesNotChangeResults) {
    const Matrix x = random_matrix(80, 4, 12);
    const Matrix y = random_matrix(80, 4, 13);
    const KernelSpec sx = median_bandwidth(x).spec, sy = median_bandwidth(y).spec;
    for (BoundKind kind : {BoundKind::pca, BoundKind::cca}) {
        ErrorConfig cfg;
        cfg.m = 50;
        cfg.trials = 7;
        cfg.seed = 99;
        cfg.threads = 1;
        const ErrorStats one = empirical_error(kind, x, &y, sx, sy, cfg);
        cfg.threads = 3;
        const ErrorStats three = empirical_error(kind, x, &y, sx, sy, cfg);
        EXPECT_EQ(one.per_trial, three.per_trial);
        EXPECT_EQ(one.mean, three.mean);
        EXPECT_EQ(one.stddev, three.stddev);
    }
}

TEST(EmpiricalError, AveragingTrialsReducesError) {
    const Index n = 128, m = 64, trials = 100;
    const Matrix x = random_matrix(n, 5, 14);
    const KernelSpec spec = median_bandwidth(x).spec;
    ErrorConfig cfg;
    cfg.m = m;
    cfg.trials = trials;
    cfg.seed = 21;
    const ErrorStats st = empirical_error(BoundKind::pca, x, nullptr, spec, spec, cfg);
    // Same maps as the trials above: trial t uses seed + t.
    Matrix avg = Matrix::Zero(n, n);
    for (Index t = 0; t < trials; ++t) avg += gram_approx(sample_fourier(5, m, spec, cfg.seed + t), x) / double(trials);
    const double avg_err = operator_norm(avg - gram_exact(x, spec));
    EXPECT_LT(avg_err, st.mean);
}

TEST(EmpiricalError, Refusals) {
    const Matrix x = random_matrix(20, 2, 1);
    ErrorConfig cfg;
    cfg.m = 10;
    cfg.trials = 1;
    cfg.cap = 30;
    EXPECT_NO_THROW(empirical_error(BoundKind::pca, x, nullptr, KernelSpec{}, KernelSpec{}, cfg));
    EXPECT_THROW(empirical_error(BoundKind::cca, x, &x, KernelSpec{}, KernelSpec{}, cfg), CapacityError);
    cfg.cap = 100;
    EXPECT_THROW(empirical_error(BoundKind::cca, x, nullptr, KernelSpec{}, KernelSpec{}, cfg), ArgumentError);
}

TEST(Sweep, GammaSlopeIsMinusOne) {
    SweepConfig cfg;
    cfg.kind = BoundKind::cca;
    cfg.varying = SweepParam::gamma;
    cfg.grid = {1e-3, 1e-2, 1e-1};
    cfg.base_n = 256;
    cfg.base_m = 256;
    cfg.trials = 10;
    cfg.seed = 4;
    const SweepResult res = run_sweep(cfg);
    ASSERT_EQ(res.records.size(), 3u);
    ASSERT_TRUE(res.log_log_slope.has_value());
    EXPECT_GE(*res.log_log_slope, -1.1);
    EXPECT_LE(*res.log_log_slope, -0.9);
    for (const auto& r : res.records) EXPECT_LE(r.empirical_mean_error, r.bound_value);
}

TEST(Sweep, RecordsInGridOrderAndReproducible) {
    SweepConfig cfg;
    cfg.grid = {16, 32, 64};
    cfg.base_n = 64;
    cfg.dims = 3;
    cfg.trials = 4;
    cfg.seed = 8;
    const SweepResult a = run_sweep(cfg);
    cfg.threads = 4;
    const SweepResult b = run_sweep(cfg);
    ASSERT_EQ(a.records.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.records[i].param_value, cfg.grid[i]);
        EXPECT_EQ(a.records[i].empirical_mean_error, b.records[i].empirical_mean_error);
        EXPECT_EQ(a.records[i].bound_value, bound_value(BoundKind::pca, 64, cfg.grid[i]));
    }
}

TEST(Sweep, ConfigValidation) {
    SweepConfig cfg;
    EXPECT_THROW(run_sweep(cfg), ArgumentError);
    cfg.grid = {64, 32};
    EXPECT_THROW(run_sweep(cfg), ArgumentError);
    cfg.grid = {32.5};
    EXPECT_THROW(run_sweep(cfg), ArgumentError);
    cfg.grid = {32};
    cfg.trials = 0;
    EXPECT_THROW(run_sweep(cfg), ArgumentError);
    cfg.trials = 1;
    cfg.varying = SweepParam::n;
    cfg.grid = {3000};
    EXPECT_THROW(run_sweep(cfg), CapacityError);
}

TEST(LogLogSlope, ExactPowerLaw) {
    EXPECT_NEAR(log_log_slope({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125}), -1.0, 1e-12);
    EXPECT_NEAR(log_log_slope({1, 4, 16}, {3, 6, 12}), 0.5, 1e-12);
}
