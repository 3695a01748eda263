#pragma once

#include "ocfs/error.hpp"

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ocfs {

enum class KernelKind { Linear, Rbf };

constexpr std::string_view kernel_name(KernelKind k) noexcept { return k == KernelKind::Linear ? "linear" : "rbf"; }

inline KernelKind parse_kernel_kind(std::string_view s) {
    if (s == "linear" || s == "LINEAR") return KernelKind::Linear;
    if (s == "rbf" || s == "RBF") return KernelKind::Rbf;
    fail(Errc::InvalidArgument, "unknown kernel '" + std::string(s) + "' (expected linear or rbf)");
}

/// Kernel choice. For RBF, gamma == 0 asks train() to pick gamma with the
/// median heuristic on the standardized training data; a trained model always
/// carries a resolved gamma > 0.
struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 0.0;

    static KernelSpec linear() { return {KernelKind::Linear, 0.0}; }
    static KernelSpec rbf(double gamma) {
        require(gamma > 0.0 && std::isfinite(gamma), Errc::InvalidArgument, "RBF gamma must be > 0");
        return {KernelKind::Rbf, gamma};
    }
    static KernelSpec rbf_auto() { return {KernelKind::Rbf, 0.0}; }

    bool needs_gamma() const noexcept { return kind == KernelKind::Rbf && gamma == 0.0; }

    void validate() const {
        require(std::isfinite(gamma) && gamma >= 0.0, Errc::InvalidArgument, "kernel gamma must be >= 0");
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline void check_dims(std::span<const double> a, std::span<const double> b) {
    require(!a.empty() && a.size() == b.size(), Errc::DimMismatch,
            "kernel arguments have dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
}

inline void check_resolved(const KernelSpec& k) {
    require(k.kind == KernelKind::Linear || k.gamma > 0.0, Errc::InvalidArgument,
            "RBF kernel evaluated with unresolved gamma");
}

inline double kernel_eval(const KernelSpec& k, std::span<const double> a, std::span<const double> b) {
    check_dims(a, b);
    check_resolved(k);
    if (k.kind == KernelKind::Linear) return dot(a, b);
    return std::exp(-k.gamma * squared_distance(a, b));
}

// Gradient of kernel_eval(k, x, xi) with respect to xi.
inline std::vector<double> kernel_grad(const KernelSpec& k, std::span<const double> x, std::span<const double> xi) {
    check_dims(x, xi);
    check_resolved(k);
    if (k.kind == KernelKind::Linear) return {x.begin(), x.end()};
    const double kv = std::exp(-k.gamma * squared_distance(x, xi));
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * k.gamma * (x[i] - xi[i]) * kv;
    return g;
}

}  // namespace ocfs
