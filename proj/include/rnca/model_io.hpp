#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rnca/applications.hpp"
#include "rnca/component_models.hpp"
#include "rnca/csv.hpp"

namespace rnca::io {

inline constexpr int kFormatVersion = 1;

/// Text model container:
///
///     rnca-model
///     format_version = 1
///     model_kind = rpca
///     <key> = <value>          (scalar entries)
///     matrix <name> <rows> <cols>
///     <rows lines of comma-separated values>
///     end
///
/// Reals are written with 17 significant digits so every stored number
/// survives a round trip bit-exactly.
class Container {
public:
    std::string kind;

    void set(const std::string& key, const std::string& value) { scalars_.emplace_back(key, value); }
    void set(const std::string& key, double value) { set(key, format_real(value)); }
    void set(const std::string& key, Index value) { set(key, std::to_string(value)); }
    void set_matrix(const std::string& name, Matrix m) { matrices_.emplace_back(name, std::move(m)); }

    bool has(const std::string& key) const { return find_scalar(key) != nullptr; }

    const std::string& get(const std::string& key) const {
        if (const std::string* v = find_scalar(key)) return *v;
        throw FormatError("model container: missing entry '" + key + "'");
    }
    double get_real(const std::string& key) const {
        double v = 0.0;
        if (!parse_real(get(key), v)) throw FormatError("model container: entry '" + key + "' is not a number");
        return v;
    }
    Index get_count(const std::string& key) const {
        const double v = get_real(key);
        if (v < 0 || v != static_cast<double>(static_cast<Index>(v)))
            throw FormatError("model container: entry '" + key + "' is not a count");
        return static_cast<Index>(v);
    }
    const Matrix& matrix(const std::string& name) const {
        for (const auto& [k, m] : matrices_)
            if (k == name) return m;
        throw FormatError("model container: missing matrix '" + name + "'");
    }
    bool has_matrix(const std::string& name) const {
        for (const auto& [k, m] : matrices_)
            if (k == name) return true;
        return false;
    }

    void write(std::ostream& out) const {
        out << "rnca-model\n";
        out << "format_version = " << kFormatVersion << "\n";
        out << "model_kind = " << kind << "\n";
        for (const auto& [k, v] : scalars_) out << k << " = " << v << "\n";
        for (const auto& [name, m] : matrices_) {
            out << "matrix " << name << " " << m.rows() << " " << m.cols() << "\n";
            write_csv_stream(out, m);
        }
        out << "end\n";
    }

    static Container read(std::istream& in, const std::string& source) {
        Container c;
        std::string line;
        std::size_t lineno = 0;
        auto next = [&](const char* expect) -> std::string& {
            if (!std::getline(in, line)) throw FormatError(source + ": truncated model file, expected " + expect);
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        };
        auto fail = [&](const std::string& why) {
            throw FormatError(source + ":" + std::to_string(lineno) + ": " + why);
        };
        if (next("signature") != "rnca-model") fail("not an rnca model container");
        auto key_value = [&](const std::string& l, std::string& key, std::string& value) {
            const auto pos = l.find(" = ");
            if (pos == std::string::npos || pos == 0) return false;
            key = l.substr(0, pos);
            value = l.substr(pos + 3);
            return true;
        };
        std::string key, value;
        if (!key_value(next("format_version"), key, value) || key != "format_version") fail("malformed header line");
        if (value != std::to_string(kFormatVersion)) fail("unsupported format_version " + value);
        if (!key_value(next("model_kind"), key, value) || key != "model_kind") fail("malformed header line");
        c.kind = value;
        while (true) {
            const std::string& l = next("'end'");
            if (l == "end") break;
            if (l.rfind("matrix ", 0) == 0) {
                std::istringstream hs(l.substr(7));
                std::string name;
                long long rows = -1, cols = -1;
                if (!(hs >> name >> rows >> cols) || rows < 0 || cols < 0) fail("malformed matrix header");
                Matrix m(rows, cols);
                for (long long i = 0; i < rows; ++i) {
                    const auto fields = split(next("matrix row"));
                    if (cols == 0) continue;
                    if (static_cast<long long>(fields.size()) != cols) fail("matrix row has wrong field count");
                    for (long long j = 0; j < cols; ++j)
                        if (!parse_real(fields[static_cast<std::size_t>(j)], m(i, j))) fail("non-numeric matrix entry");
                }
                c.set_matrix(name, std::move(m));
                continue;
            }
            if (!key_value(l, key, value)) fail("malformed entry line");
            c.set(key, value);
        }
        return c;
    }

private:
    const std::string* find_scalar(const std::string& key) const {
        for (const auto& [k, v] : scalars_)
            if (k == key) return &v;
        return nullptr;
    }

    std::vector<std::pair<std::string, std::string>> scalars_;
    std::vector<std::pair<std::string, Matrix>> matrices_;
};

inline void save_container(const Container& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    c.write(out);
    if (!out) throw FormatError("write to '" + path + "' failed");
}

inline Container load_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    return Container::read(in, path);
}

// -- per-type encoders ------------------------------------------------------

inline Matrix as_column(const Vector& v) { return v; }
inline Matrix as_column(const RowVector& v) { return v.transpose(); }

inline void put(Container& c, const std::string& p, const FeatureMap& map) {
    c.set(p + ".kind", std::string(to_string(map.kind)));
    c.set(p + ".input_dim", map.input_dim);
    c.set(p + ".output_dim", map.output_dim);
    c.set(p + ".s", map.spec.s);
    c.set(p + ".convention", std::string(to_string(map.convention)));
    if (map.kind == MapKind::fourier) {
        c.set_matrix(p + ".weights", map.weights);
        c.set_matrix(p + ".offsets", as_column(map.offsets));
    } else if (map.kind == MapKind::nystrom) {
        c.set_matrix(p + ".landmarks", map.landmarks);
        c.set_matrix(p + ".whitener", map.whitener);
    }
}

inline FeatureMap get_map(const Container& c, const std::string& p) {
    FeatureMap map;
    map.kind = parse_map_kind(c.get(p + ".kind"));
    map.input_dim = c.get_count(p + ".input_dim");
    map.output_dim = c.get_count(p + ".output_dim");
    map.spec.s = c.get_real(p + ".s");
    map.convention = parse_convention(c.get(p + ".convention"));
    auto expect = [&](const Matrix& m, Index r, Index k, const std::string& name) {
        if (m.rows() != r || m.cols() != k) throw FormatError("model container: matrix '" + name + "' has wrong shape");
    };
    if (map.kind == MapKind::fourier) {
        map.weights = c.matrix(p + ".weights");
        expect(map.weights, map.output_dim, map.input_dim, p + ".weights");
        const Matrix& off = c.matrix(p + ".offsets");
        expect(off, map.output_dim, 1, p + ".offsets");
        map.offsets = off.col(0);
    } else if (map.kind == MapKind::nystrom) {
        map.landmarks = c.matrix(p + ".landmarks");
        expect(map.landmarks, map.output_dim, map.input_dim, p + ".landmarks");
        map.whitener = c.matrix(p + ".whitener");
        expect(map.whitener, map.output_dim, map.output_dim, p + ".whitener");
    } else if (map.input_dim != map.output_dim) {
        throw FormatError("model container: identity map with differing dimensions");
    }
    return map;
}

inline RowVector get_row(const Container& c, const std::string& name, Index len) {
    const Matrix& m = c.matrix(name);
    if (m.cols() != 1 || m.rows() != len) throw FormatError("model container: matrix '" + name + "' has wrong shape");
    return m.col(0).transpose();
}

inline void put(Container& c, const std::string& p, const RpcaModel& m) {
    put(c, p + ".map", m.map);
    c.set(p + ".r", static_cast<Index>(m.eigenvalues.size()));
    c.set_matrix(p + ".feature_means", as_column(m.feature_means));
    c.set_matrix(p + ".loadings", m.loadings);
    c.set_matrix(p + ".eigenvalues", as_column(m.eigenvalues));
}

inline RpcaModel get_rpca(const Container& c, const std::string& p) {
    RpcaModel m;
    m.map = get_map(c, p + ".map");
    const Index r = c.get_count(p + ".r");
    m.feature_means = get_row(c, p + ".feature_means", m.map.output_dim);
    m.loadings = c.matrix(p + ".loadings");
    if (m.loadings.rows() != m.map.output_dim || m.loadings.cols() != r)
        throw FormatError("model container: loadings have wrong shape");
    m.eigenvalues = get_row(c, p + ".eigenvalues", r).transpose();
    return m;
}

inline void put(Container& c, const std::string& p, const RccaModel& m) {
    put(c, p + ".map_x", m.map_x);
    put(c, p + ".map_y", m.map_y);
    c.set(p + ".r", m.components());
    c.set(p + ".gamma_x", m.gamma_x);
    c.set(p + ".gamma_y", m.gamma_y);
    c.set_matrix(p + ".means_x", as_column(m.means_x));
    c.set_matrix(p + ".means_y", as_column(m.means_y));
    c.set_matrix(p + ".basis_x", m.basis_x);
    c.set_matrix(p + ".basis_y", m.basis_y);
    c.set_matrix(p + ".correlations", as_column(m.correlations));
}

inline RccaModel get_rcca(const Container& c, const std::string& p) {
    RccaModel m;
    m.map_x = get_map(c, p + ".map_x");
    m.map_y = get_map(c, p + ".map_y");
    const Index r = c.get_count(p + ".r");
    m.gamma_x = c.get_real(p + ".gamma_x");
    m.gamma_y = c.get_real(p + ".gamma_y");
    m.means_x = get_row(c, p + ".means_x", m.map_x.output_dim);
    m.means_y = get_row(c, p + ".means_y", m.map_y.output_dim);
    m.basis_x = c.matrix(p + ".basis_x");
    m.basis_y = c.matrix(p + ".basis_y");
    if (m.basis_x.rows() != m.map_x.output_dim || m.basis_x.cols() != r || m.basis_y.rows() != m.map_y.output_dim ||
        m.basis_y.cols() != r)
        throw FormatError("model container: canonical bases have wrong shape");
    m.correlations = get_row(c, p + ".correlations", r).transpose();
    return m;
}

inline void put(Container& c, const std::string& p, const RidgeModel& m) {
    put(c, p + ".map", m.map);
    c.set(p + ".lambda", m.lambda);
    c.set_matrix(p + ".feature_means", as_column(m.feature_means));
    c.set_matrix(p + ".weights", m.weights);
    c.set_matrix(p + ".intercepts", as_column(m.intercepts));
}

inline RidgeModel get_ridge(const Container& c, const std::string& p) {
    RidgeModel m;
    m.map = get_map(c, p + ".map");
    m.lambda = c.get_real(p + ".lambda");
    m.feature_means = get_row(c, p + ".feature_means", m.map.output_dim);
    m.weights = c.matrix(p + ".weights");
    if (m.weights.rows() != m.map.output_dim) throw FormatError("model container: ridge weights have wrong shape");
    m.intercepts = get_row(c, p + ".intercepts", m.weights.cols());
    return m;
}

inline Container to_container(const RpcaModel& m) {
    Container c;
    c.kind = "rpca";
    put(c, "model", m);
    return c;
}

/// `kind` distinguishes plain RCCA fits from LDA fits, which share a layout.
inline Container to_container(const RccaModel& m, const std::string& kind = "rcca") {
    Container c;
    c.kind = kind;
    put(c, "model", m);
    return c;
}

inline Container to_container(const AutoencoderModel& m) {
    Container c;
    c.kind = "autoencoder";
    put(c, "encoder", m.encoder);
    put(c, "decoder", m.decoder);
    return c;
}

inline Container to_container(const LupiResult& r) {
    Container c;
    c.kind = "lupi";
    c.set("per_attr", r.per_attr);
    c.set("attributes", static_cast<Index>(r.attributes.size()));
    for (std::size_t i = 0; i < r.attributes.size(); ++i) {
        const auto& a = r.attributes[i];
        const std::string p = "attr" + std::to_string(i);
        c.set(p + ".column", a.column);
        c.set(p + ".skipped", std::string(a.skipped ? "1" : "0"));
        if (a.skipped)
            c.set(p + ".note", a.note);
        else
            put(c, p, a.model);
    }
    return c;
}

inline void require_kind(const Container& c, std::initializer_list<const char*> kinds) {
    for (const char* k : kinds)
        if (c.kind == k) return;
    throw FormatError("model container: unexpected model_kind '" + c.kind + "'");
}

inline RpcaModel rpca_from(const Container& c) {
    require_kind(c, {"rpca"});
    return get_rpca(c, "model");
}

inline RccaModel rcca_from(const Container& c) {
    require_kind(c, {"rcca", "rlda"});
    return get_rcca(c, "model");
}

inline AutoencoderModel autoencoder_from(const Container& c) {
    require_kind(c, {"autoencoder"});
    return AutoencoderModel{get_rpca(c, "encoder"), get_ridge(c, "decoder")};
}

inline LupiResult lupi_from(const Container& c) {
    require_kind(c, {"lupi"});
    LupiResult r;
    r.per_attr = c.get_count("per_attr");
    const Index count = c.get_count("attributes");
    for (Index i = 0; i < count; ++i) {
        const std::string p = "attr" + std::to_string(i);
        LupiAttribute a;
        a.column = c.get_count(p + ".column");
        a.skipped = c.get(p + ".skipped") == "1";
        if (a.skipped)
            a.note = c.has(p + ".note") ? c.get(p + ".note") : "";
        else
            a.model = get_rcca(c, p);
        r.attributes.push_back(std::move(a));
    }
    return r;
}

}  // namespace rnca::io
