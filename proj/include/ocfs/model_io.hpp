#pragma once

// Text model format, one key per line, in this order:
//
//   ocfs-ocsvm-model 1
//   kernel <linear|rbf>
//   gamma <real>
//   nu <real>
//   rho <real>
//   n_train <count>
//   n_features <count>
//   feature <id>                       (n_features lines, rest of line is the id)
//   center <real> ...                  (n_features values)
//   scale <real> ...                   (n_features values)
//   alphas <real> ...                  (n_train values)
//   n_support <count>
//   support <train index> <real> ...   (n_support lines, n_features coordinates each)
//   end
//
// Reals use the shortest round-trip representation, so save/load is exact.

#include "ocfs/csv.hpp"
#include "ocfs/error.hpp"
#include "ocfs/ocsvm.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ocfs {

inline constexpr const char* kModelFormatTag = "ocfs-ocsvm-model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline void write_reals(std::ostream& out, const char* key, std::span<const double> xs) {
    out << key;
    for (double x : xs) out << ' ' << csv::format_real(x);
    out << '\n';
}

class ModelReader {
  public:
    explicit ModelReader(std::istream& in) : in_{in} {}

    // Returns the text after `key ` on the next line.
    std::string expect(const std::string& key) {
        std::string line;
        do {
            if (!std::getline(in_, line)) fail(Errc::MalformedModel, "unexpected end of file, wanted '" + key + "'");
            if (!line.empty() && line.back() == '\r') line.pop_back();
        } while (line.empty() || line.front() == '#');
        if (line == key) return {};
        if (line.rfind(key + ' ', 0) != 0) fail(Errc::MalformedModel, "expected '" + key + "', got '" + line + "'");
        return line.substr(key.size() + 1);
    }

    static std::vector<double> reals(const std::string& text, std::size_t count, const std::string& what) {
        std::vector<double> out;
        std::istringstream ss(text);
        std::string tok;
        while (ss >> tok) {
            auto v = csv::parse_real(tok);
            if (!v) fail(Errc::MalformedModel, "empty value in '" + what + "'");
            out.push_back(*v);
        }
        if (out.size() != count)
            fail(Errc::MalformedModel, "'" + what + "' has " + std::to_string(out.size()) + " values, expected " +
                                           std::to_string(count));
        return out;
    }

    static std::size_t count(const std::string& text, const std::string& what) {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(text, &pos);
            if (pos != text.size()) throw std::invalid_argument(what);
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            fail(Errc::MalformedModel, "bad count for '" + what + "': '" + text + "'");
        }
    }

    double real(const std::string& key) { return reals(expect(key), 1, key).front(); }

  private:
    std::istream& in_;
};

}  // namespace detail

inline void write_model(std::ostream& out, const OcSvmModel& m) {
    out << kModelFormatTag << ' ' << kModelFormatVersion << '\n';
    out << "kernel " << kernel_name(m.kernel.kind) << '\n';
    out << "gamma " << csv::format_real(m.kernel.gamma) << '\n';
    out << "nu " << csv::format_real(m.nu) << '\n';
    out << "rho " << csv::format_real(m.rho) << '\n';
    out << "n_train " << m.alphas.size() << '\n';
    out << "n_features " << m.n_features() << '\n';
    for (const auto& id : m.feature_ids) out << "feature " << id << '\n';
    detail::write_reals(out, "center", m.standardization.center);
    detail::write_reals(out, "scale", m.standardization.scale);
    detail::write_reals(out, "alphas", m.alphas);
    out << "n_support " << m.n_support() << '\n';
    for (std::size_t s = 0; s < m.n_support(); ++s) {
        out << "support " << m.support_indices[s];
        for (double v : m.train_refs.row(s)) out << ' ' << csv::format_real(v);
        out << '\n';
    }
    out << "end\n";
}

inline OcSvmModel read_model(std::istream& in) {
    detail::ModelReader r(in);
    const std::string version = r.expect(kModelFormatTag);
    require(version == std::to_string(kModelFormatVersion), Errc::MalformedModel,
            "unsupported model format version '" + version + "'");
    OcSvmModel m;
    m.kernel.kind = parse_kernel_kind(r.expect("kernel"));
    m.kernel.gamma = r.real("gamma");
    m.nu = r.real("nu");
    m.rho = r.real("rho");
    const std::size_t n_train = detail::ModelReader::count(r.expect("n_train"), "n_train");
    const std::size_t p = detail::ModelReader::count(r.expect("n_features"), "n_features");
    require(p >= 1, Errc::MalformedModel, "model has no features");
    for (std::size_t j = 0; j < p; ++j) m.feature_ids.push_back(r.expect("feature"));
    m.standardization.center = detail::ModelReader::reals(r.expect("center"), p, "center");
    m.standardization.scale = detail::ModelReader::reals(r.expect("scale"), p, "scale");
    m.alphas = detail::ModelReader::reals(r.expect("alphas"), n_train, "alphas");
    const std::size_t s = detail::ModelReader::count(r.expect("n_support"), "n_support");
    m.train_refs = Matrix(s, p);
    for (std::size_t k = 0; k < s; ++k) {
        std::istringstream line(r.expect("support"));
        std::string idx;
        line >> idx;
        const std::size_t i = detail::ModelReader::count(idx, "support index");
        require(i < n_train, Errc::MalformedModel, "support index out of range");
        m.support_indices.push_back(i);
        std::string rest;
        std::getline(line, rest);
        auto coords = detail::ModelReader::reals(rest, p, "support");
        std::copy(coords.begin(), coords.end(), m.train_refs.row(k).begin());
    }
    r.expect("end");
    require(m.kernel.kind == KernelKind::Linear || m.kernel.gamma > 0.0, Errc::MalformedModel,
            "RBF model without a resolved gamma");
    return m;
}

inline void save_model(const std::string& path, const OcSvmModel& m) {
    auto out = csv::open_out(path);
    write_model(out, m);
}

inline OcSvmModel load_model(const std::string& path) {
    auto in = csv::open_in(path);
    return read_model(in);
}

}  // namespace ocfs
