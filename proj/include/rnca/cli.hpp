#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rnca/applications.hpp"
#include "rnca/bounds_lab.hpp"
#include "rnca/component_models.hpp"
#include "rnca/csv.hpp"
#include "rnca/kernel_features.hpp"
#include "rnca/model_io.hpp"

namespace rnca::cli {

/// Flags shared by every command. Commands ignore the ones they do not use.
struct RunConfig {
    std::string command;
    std::string x_path, y_path, labels_path, xstar_path, model_path, save_path, in_path;
    std::string out_path;  // empty: standard output
    std::uint64_t seed = 0;
    Index m = 1000;
    Index r = 2;
    Index d = 10;
    Index k = 2;
    Index per_attr = 5;
    Index limit = -1;
    double gamma = 0.0;  // 0: command default
    double lambda = 1e-6;
    double floor = 1e-10;
    std::string bandwidth = "median";
    std::string map = "fourier";
    std::string convention = "unbiased";
    Index trials = 25;
    unsigned threads = 1;
    // bounds
    std::string bound_kind = "pca";
    std::string vary = "m";
    std::vector<double> grid;
    Index n = 1000;
    Index dims = 10;
    std::string variant = "paper";
    bool scale = false;
};

namespace detail {

inline Matrix load_matrix(const std::string& path, const char* flag) {
    if (path.empty()) throw ArgumentError(std::string("missing required flag ") + flag);
    return io::read_csv(path).data;
}

inline KernelSpec pick_bandwidth(const RunConfig& cfg, const Matrix& x, std::uint64_t stream) {
    if (cfg.bandwidth == "median") return median_bandwidth(x, 100000, derive_seed(cfg.seed, stream)).spec;
    double s = 0.0;
    if (!io::parse_real(cfg.bandwidth, s) || !(s > 0.0))
        throw ArgumentError("--bandwidth must be 'median' or a positive real");
    return KernelSpec{s};
}

inline FeatureMap make_map(const RunConfig& cfg, const Matrix& x, std::uint64_t stream) {
    const MapKind kind = parse_map_kind(cfg.map);
    const ScaleConvention conv = parse_convention(cfg.convention);
    if (kind == MapKind::identity) return identity_map(x.cols());
    const KernelSpec spec = pick_bandwidth(cfg, x, 100 + stream);
    if (kind == MapKind::nystrom) return sample_nystrom(x, cfg.m, spec, derive_seed(cfg.seed, stream), cfg.floor);
    return sample_fourier(x.cols(), cfg.m, spec, derive_seed(cfg.seed, stream), conv);
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw FormatError("cannot open '" + path + "' for writing");
            stream_ = file_.get();
        }
    }
    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

inline std::vector<std::string> numbered(const std::string& prefix, Index count) {
    std::vector<std::string> h;
    for (Index i = 1; i <= count; ++i) h.push_back(prefix + std::to_string(i));
    return h;
}

inline Matrix labels_column(const std::vector<int>& labels) {
    Matrix m(static_cast<Index>(labels.size()), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Index>(i), 0) = labels[i];
    return m;
}

inline void maybe_save(const RunConfig& cfg, const io::Container& c) {
    if (!cfg.save_path.empty()) io::save_container(c, cfg.save_path);
}

// -- commands ---------------------------------------------------------------

inline void cmd_pca(const RunConfig& cfg, std::ostream& out) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    const RpcaModel model = rpca_fit(x, make_map(cfg, x, 1), cfg.r);
    maybe_save(cfg, io::to_container(model));
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), rpca_transform(model, x), numbered("pc", cfg.r));
}

inline void cmd_cca(const RunConfig& cfg, std::ostream& out) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    const Matrix y = load_matrix(cfg.y_path, "--y");
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : kDefaultCcaGamma;
    const RccaModel model = rcca_fit(x, y, make_map(cfg, x, 1), make_map(cfg, y, 2), gamma, gamma, cfg.r);
    maybe_save(cfg, io::to_container(model));
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), model.correlations, {"correlation"});
}

inline void cmd_lda(const RunConfig& cfg, std::ostream& out) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    if (cfg.labels_path.empty()) throw ArgumentError("missing required flag --labels");
    const std::vector<int> labels = io::to_labels(io::read_csv(cfg.labels_path).data, cfg.labels_path);
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : kDefaultCcaGamma;
    const RccaModel model = rlda_fit(x, labels, make_map(cfg, x, 1), gamma, cfg.r);
    maybe_save(cfg, io::to_container(model, "rlda"));
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), rcca_transform_x(model, x), numbered("ld", cfg.r));
}

inline void cmd_rdc(const RunConfig& cfg, std::ostream& out) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    const Matrix y = load_matrix(cfg.y_path, "--y");
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : kDefaultRdcGamma;
    const RdcResult res = rdc(x, y, cfg.m, gamma, cfg.seed);
    Output o(cfg.out_path, out);
    o.stream() << io::format_real(res.value) << '\n';
}

inline void cmd_cluster(const RunConfig& cfg, std::ostream& out) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    const std::vector<int> labels = spectral_cluster(x, cfg.k, make_map(cfg, x, 1), derive_seed(cfg.seed, 9));
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), labels_column(labels), {"cluster"});
}

inline void cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SweepConfig sc;
    sc.kind = parse_bound_kind(cfg.bound_kind);
    sc.varying = parse_sweep_param(cfg.vary);
    sc.grid = cfg.grid;
    sc.base_n = cfg.n;
    sc.base_m = cfg.m;
    sc.base_gamma = cfg.gamma > 0.0 ? cfg.gamma : 1e-3;
    sc.dims = cfg.dims;
    sc.trials = cfg.trials;
    sc.seed = cfg.seed;
    sc.convention = parse_convention(cfg.convention);
    sc.bound_variant = parse_bound_variant(cfg.variant);
    sc.threads = cfg.threads;
    const SweepResult res = run_sweep(sc);
    Matrix table(static_cast<Index>(res.records.size()), 4);
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& rec = res.records[i];
        table.row(static_cast<Index>(i)) << rec.param_value, rec.empirical_mean_error, rec.empirical_stddev,
            rec.bound_value;
    }
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), table, {"param", "mean_error", "stddev", "bound"});
    if (res.log_log_slope) err << "log-log slope: " << io::format_real(*res.log_log_slope) << '\n';
}

inline void cmd_autoencode(const RunConfig& cfg, std::ostream& out) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    const AutoencoderModel model = autoencoder_fit(x, cfg.m, cfg.d, cfg.lambda, cfg.seed);
    maybe_save(cfg, io::to_container(model));
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), autoencoder_reconstruct(model, x));
}

inline void cmd_lupi(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Matrix x = load_matrix(cfg.x_path, "--x");
    const Matrix xs = load_matrix(cfg.xstar_path, "--xstar");
    const Matrix y = load_matrix(cfg.labels_path, "--labels");
    if (y.cols() != 1) throw FormatError(cfg.labels_path + ": labels must be a single column");
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : kDefaultCcaGamma;
    const LupiResult res = lupi_features(x, xs, y.col(0), cfg.m, gamma, cfg.per_attr, cfg.seed);
    for (const auto& a : res.attributes)
        if (a.skipped) err << "warning: " << a.note << ", skipped\n";
    maybe_save(cfg, io::to_container(res));
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), res.features);
}

inline void cmd_transform(const RunConfig& cfg, std::ostream& out) {
    if (cfg.model_path.empty()) throw ArgumentError("missing required flag --model");
    const io::Container c = io::load_container(cfg.model_path);
    Output o(cfg.out_path, out);
    if (c.kind == "rpca") {
        const RpcaModel m = io::rpca_from(c);
        io::write_csv_stream(o.stream(), rpca_transform(m, load_matrix(cfg.x_path, "--x")),
                             numbered("pc", m.eigenvalues.size()));
    } else if (c.kind == "rcca" || c.kind == "rlda") {
        const RccaModel m = io::rcca_from(c);
        const Index r = m.components();
        if (cfg.x_path.empty() && cfg.y_path.empty()) throw ArgumentError("transform: need --x and/or --y");
        std::optional<Matrix> u, v;
        if (!cfg.x_path.empty()) u = rcca_transform_x(m, load_matrix(cfg.x_path, "--x"));
        if (!cfg.y_path.empty()) v = rcca_transform_y(m, load_matrix(cfg.y_path, "--y"));
        if (u && v) {
            if (u->rows() != v->rows()) throw PairingError("transform: --x and --y row counts differ");
            Matrix both(u->rows(), 2 * r);
            both << *u, *v;
            auto h = numbered("u", r);
            const auto hv = numbered("v", r);
            h.insert(h.end(), hv.begin(), hv.end());
            io::write_csv_stream(o.stream(), both, h);
        } else if (u) {
            io::write_csv_stream(o.stream(), *u, numbered("u", r));
        } else {
            io::write_csv_stream(o.stream(), *v, numbered("v", r));
        }
    } else if (c.kind == "autoencoder") {
        io::write_csv_stream(o.stream(), autoencoder_reconstruct(io::autoencoder_from(c), load_matrix(cfg.x_path, "--x")));
    } else if (c.kind == "lupi") {
        io::write_csv_stream(o.stream(), lupi_transform(io::lupi_from(c), load_matrix(cfg.x_path, "--x")));
    } else {
        throw FormatError("transform: unsupported model_kind '" + c.kind + "'");
    }
}

inline void cmd_convert_idx(const RunConfig& cfg, std::ostream& out) {
    if (cfg.in_path.empty()) throw ArgumentError("missing required flag --in");
    Matrix m = io::read_idx(cfg.in_path, cfg.limit);
    if (cfg.scale) m /= 255.0;
    Output o(cfg.out_path, out);
    io::write_csv_stream(o.stream(), m);
}

}  // namespace detail

/// Parses argv and runs one command. Exit codes: 0 success, 2 argument
/// error, 3 data/format error, 4 numeric or capacity error.
inline int run(const std::vector<std::string>& argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"Randomized nonlinear component analysis", "rnca"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "Random seed")->default_val(0);
        sub->add_option("--out", cfg.out_path, "Output path (default: stdout)");
        sub->add_option("--threads", cfg.threads, "Worker threads; never changes results")
            ->check(CLI::PositiveNumber);
    };
    auto map_opts = [&](CLI::App* sub) {
        sub->add_option("--m", cfg.m, "Number of random features")->check(CLI::PositiveNumber);
        sub->add_option("--map", cfg.map, "Feature map: fourier, nystrom or identity")
            ->check(CLI::IsMember({"fourier", "nystrom", "identity"}));
        sub->add_option("--bandwidth", cfg.bandwidth, "Gaussian width s, or 'median'");
        sub->add_option("--convention", cfg.convention, "Fourier scaling: unbiased or paper_literal")
            ->check(CLI::IsMember({"unbiased", "paper_literal"}));
        sub->add_option("--floor", cfg.floor, "Eigenvalue floor for Nystrom whitening")->check(CLI::PositiveNumber);
    };
    auto gamma_opt = [&](CLI::App* sub) {
        sub->add_option("--gamma", cfg.gamma, "Regularizer")->check(CLI::PositiveNumber);
    };

    auto* pca = app.add_subcommand("pca", "Randomized PCA; writes principal scores");
    common(pca);
    map_opts(pca);
    pca->add_option("--x", cfg.x_path, "Input CSV")->required();
    pca->add_option("--r", cfg.r, "Components")->check(CLI::PositiveNumber);
    pca->add_option("--model", cfg.save_path, "Save fitted model here");

    auto* cca = app.add_subcommand("cca", "Randomized CCA; writes canonical correlations");
    common(cca);
    map_opts(cca);
    gamma_opt(cca);
    cca->add_option("--x", cfg.x_path)->required();
    cca->add_option("--y", cfg.y_path)->required();
    cca->add_option("--r", cfg.r)->check(CLI::PositiveNumber);
    cca->add_option("--model", cfg.save_path, "Save fitted model here");

    auto* lda = app.add_subcommand("lda", "Randomized LDA; writes discriminant projections");
    common(lda);
    map_opts(lda);
    gamma_opt(lda);
    lda->add_option("--x", cfg.x_path)->required();
    lda->add_option("--labels", cfg.labels_path)->required();
    lda->add_option("--r", cfg.r)->check(CLI::PositiveNumber);
    lda->add_option("--model", cfg.save_path, "Save fitted model here");

    auto* rdc_cmd = app.add_subcommand("rdc", "Randomized Dependence Coefficient");
    common(rdc_cmd);
    gamma_opt(rdc_cmd);
    rdc_cmd->add_option("--x", cfg.x_path)->required();
    rdc_cmd->add_option("--y", cfg.y_path)->required();
    rdc_cmd->add_option("--m", cfg.m)->check(CLI::PositiveNumber);

    auto* cluster = app.add_subcommand("cluster", "Spectral clustering on random features");
    common(cluster);
    map_opts(cluster);
    cluster->add_option("--x", cfg.x_path)->required();
    cluster->add_option("--k", cfg.k, "Number of clusters")->check(CLI::PositiveNumber);

    auto* bounds = app.add_subcommand("bounds", "Error-bound validation sweep");
    common(bounds);
    gamma_opt(bounds);
    bounds->add_option("--kind", cfg.bound_kind)->check(CLI::IsMember({"pca", "cca"}));
    bounds->add_option("--vary", cfg.vary)->check(CLI::IsMember({"n", "m", "gamma"}))->required();
    bounds->add_option("--grid", cfg.grid)->delimiter(',')->required()->check(CLI::PositiveNumber);
    bounds->add_option("--n", cfg.n, "Base sample size")->check(CLI::PositiveNumber);
    bounds->add_option("--m", cfg.m, "Base feature count")->check(CLI::PositiveNumber);
    bounds->add_option("--dims", cfg.dims)->check(CLI::PositiveNumber);
    bounds->add_option("--trials", cfg.trials)->check(CLI::PositiveNumber);
    bounds->add_option("--variant", cfg.variant)->check(CLI::IsMember({"paper", "corrected"}));
    bounds->add_option("--convention", cfg.convention)->check(CLI::IsMember({"unbiased", "paper_literal"}));

    auto* ae = app.add_subcommand("autoencode", "Randomized autoencoder; writes reconstructions");
    common(ae);
    ae->add_option("--x", cfg.x_path)->required();
    ae->add_option("--m", cfg.m)->check(CLI::PositiveNumber);
    ae->add_option("--d", cfg.d, "Latent dimension")->check(CLI::PositiveNumber);
    ae->add_option("--lambda", cfg.lambda, "Ridge penalty")->check(CLI::PositiveNumber);
    ae->add_option("--model", cfg.save_path, "Save fitted model here");

    auto* lupi = app.add_subcommand("lupi", "Privileged-information features");
    common(lupi);
    gamma_opt(lupi);
    lupi->add_option("--x", cfg.x_path)->required();
    lupi->add_option("--xstar", cfg.xstar_path)->required();
    lupi->add_option("--labels", cfg.labels_path)->required();
    lupi->add_option("--m", cfg.m)->check(CLI::PositiveNumber);
    lupi->add_option("--per-attr", cfg.per_attr)->check(CLI::PositiveNumber);
    lupi->add_option("--model", cfg.save_path, "Save fitted model here");

    auto* transform = app.add_subcommand("transform", "Apply a saved model to new data");
    common(transform);
    transform->add_option("--model", cfg.model_path)->required();
    transform->add_option("--x", cfg.x_path);
    transform->add_option("--y", cfg.y_path);

    auto* convert = app.add_subcommand("convert-idx", "Convert an IDX (MNIST) file to CSV");
    common(convert);
    convert->add_option("--in", cfg.in_path)->required();
    convert->add_option("--limit", cfg.limit, "Keep only the first rows")->check(CLI::PositiveNumber);
    convert->add_flag("--scale", cfg.scale, "Divide values by 255");

    std::vector<std::string> args(argv.rbegin(), argv.rend());
    if (!args.empty()) args.pop_back();  // program name
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "rnca: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*pca) detail::cmd_pca(cfg, out);
        else if (*cca) detail::cmd_cca(cfg, out);
        else if (*lda) detail::cmd_lda(cfg, out);
        else if (*rdc_cmd) detail::cmd_rdc(cfg, out);
        else if (*cluster) detail::cmd_cluster(cfg, out);
        else if (*bounds) detail::cmd_bounds(cfg, out, err);
        else if (*ae) detail::cmd_autoencode(cfg, out);
        else if (*lupi) detail::cmd_lupi(cfg, out, err);
        else if (*transform) detail::cmd_transform(cfg, out);
        else if (*convert) detail::cmd_convert_idx(cfg, out);
    } catch (const Error& e) {
        err << "rnca: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "rnca: " << e.what() << '\n';
        return 4;
    }
    return 0;
}

inline int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace rnca::cli
