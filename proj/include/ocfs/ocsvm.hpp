#pragma once

#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/kernel.hpp"
#include "ocfs/matrix.hpp"
#include "ocfs/parallel.hpp"
#include "ocfs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ocfs {

inline constexpr double kSupportThreshold = 1e-10;
inline constexpr double kEqualityTolerance = 1e-8;

/// Per-feature affine map applied before the kernel: z = (x - center) / scale.
struct Standardization {
    std::vector<double> center;
    std::vector<double> scale;

    std::size_t size() const noexcept { return scale.size(); }

    // Columns with zero spread keep scale 1. Centering is skipped when
    // `centered` is false (used for the linear kernel, where the origin is
    // part of the model).
    static Standardization fit(const Matrix& rows, bool centered) {
        Standardization s;
        s.center.assign(rows.cols(), 0.0);
        s.scale.assign(rows.cols(), 1.0);
        std::vector<double> col(rows.rows());
        for (std::size_t c = 0; c < rows.cols(); ++c) {
            for (std::size_t r = 0; r < rows.rows(); ++r) col[r] = rows(r, c);
            if (centered) s.center[c] = stats::mean(col);
            const double sd = stats::stddev(col);
            s.scale[c] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> x) const {
        require(x.size() == size(), Errc::DimMismatch,
                "input has " + std::to_string(x.size()) + " features, model has " + std::to_string(size()));
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - center[i]) / scale[i];
        return z;
    }

    Matrix apply(const Matrix& rows) const {
        Matrix out(rows.rows(), rows.cols());
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            auto z = apply(rows.row(r));
            std::copy(z.begin(), z.end(), out.row(r).begin());
        }
        return out;
    }

    Standardization subset(std::span<const std::size_t> keep) const {
        Standardization s;
        for (auto k : keep) {
            s.center.push_back(center.at(k));
            s.scale.push_back(scale.at(k));
        }
        return s;
    }

    friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct OcSvmModel {
    KernelSpec kernel;
    double nu = 0.0;
    double rho = 0.0;
    std::vector<double> alphas;                // one per training lot
    std::vector<std::size_t> support_indices;  // lots with alpha > kSupportThreshold
    std::vector<std::string> feature_ids;
    Matrix train_refs;                         // support vectors, standardized coordinates
    Standardization standardization;

    std::size_t n_features() const noexcept { return feature_ids.size(); }
    std::size_t n_support() const noexcept { return support_indices.size(); }

    std::vector<double> support_alphas() const {
        std::vector<double> a;
        a.reserve(support_indices.size());
        for (auto i : support_indices) a.push_back(alphas[i]);
        return a;
    }

    friend bool operator==(const OcSvmModel&, const OcSvmModel&) = default;
};

struct SolverReport {
    std::size_t iterations = 0;
    double max_kkt_violation = 0.0;
    bool converged = false;
    double objective = 0.0;
};

struct TrainOptions {
    double nu = 0.1;
    KernelSpec kernel = KernelSpec::rbf_auto();
    double tol = 1e-6;
    std::size_t max_iter = 10'000'000;

    void validate() const {
        require(nu > 0.0 && nu <= 1.0, Errc::InvalidArgument, "nu must lie in (0, 1]");
        require(tol > 0.0, Errc::InvalidArgument, "solver tolerance must be > 0");
        require(max_iter >= 1, Errc::InvalidArgument, "max_iter must be >= 1");
        kernel.validate();
    }
};

struct TrainResult {
    OcSvmModel model;
    SolverReport report;
};

struct DualSolution {
    std::vector<double> alpha;
    std::vector<double> gradient;  // Q * alpha
    double rho = 0.0;
    SolverReport report;
};

inline double dual_objective(const Matrix& q, std::span<const double> alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        s += alpha[i] * dot(q.row(i), alpha);
    }
    return 0.5 * s;
}

/// Solves  min ½ αᵀQα  s.t.  0 ≤ α_i ≤ 1/(νn),  Σα_i = 1  by SMO with the
/// maximal-violating-pair rule. Deterministic: ties go to the lowest index.
inline DualSolution solve_dual(const Matrix& q, double nu, double tol, std::size_t max_iter) {
    const std::size_t n = q.rows();
    require(n >= 2, Errc::DegenerateData, "one-class SVM needs at least 2 training lots");
    require(q.cols() == n, Errc::DimMismatch, "kernel matrix must be square");
    require(nu > 0.0 && nu <= 1.0, Errc::InvalidArgument, "nu must lie in (0, 1]");
    require(tol > 0.0, Errc::InvalidArgument, "solver tolerance must be > 0");

    const double cap = 1.0 / (nu * static_cast<double>(n));
    DualSolution sol;
    auto& alpha = sol.alpha;
    alpha.assign(n, 0.0);
    // Uniform start: feasible for every nu and symmetric in the lots.
    alpha.assign(n, 1.0 / static_cast<double>(n));
    auto& grad = sol.gradient;
    grad.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) grad[i] = dot(q.row(i), alpha);

    auto select = [&](std::size_t& up, std::size_t& low) {
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        up = low = n;
        for (std::size_t k = 0; k < n; ++k) {
            if (alpha[k] < cap && grad[k] < g_min) {
                g_min = grad[k];
                up = k;
            }
            if (alpha[k] > 0.0 && grad[k] > g_max) {
                g_max = grad[k];
                low = k;
            }
        }
        if (up == n || low == n) return 0.0;
        return g_max - g_min;
    };

    std::size_t iter = 0;
    std::size_t up = 0, low = 0;
    double violation = select(up, low);
    while (violation > tol && iter < max_iter) {
        const double eta = std::max(q(up, up) + q(low, low) - 2.0 * q(up, low), 1e-12);
        const double room_up = cap - alpha[up];
        const double room_low = alpha[low];
        double step = violation / eta;
        if (step < room_up && step < room_low) {
            alpha[up] += step;
            alpha[low] -= step;
        } else if (room_up <= room_low) {
            step = room_up;
            alpha[up] = cap;
            alpha[low] = room_up == room_low ? 0.0 : alpha[low] - step;
        } else {
            step = room_low;
            alpha[up] += step;
            alpha[low] = 0.0;
        }
        auto row_up = q.row(up);
        auto row_low = q.row(low);
        for (std::size_t k = 0; k < n; ++k) grad[k] += step * (row_up[k] - row_low[k]);
        ++iter;
        violation = select(up, low);
    }

    // Refresh the gradient to shed accumulated rounding before reporting.
    for (std::size_t i = 0; i < n; ++i) grad[i] = dot(q.row(i), alpha);
    violation = select(up, low);

    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();  // max G over alpha == cap
    double upper = std::numeric_limits<double>::infinity();   // min G over alpha == 0
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0.0 && alpha[i] < cap) {
            free_sum += grad[i];
            ++free_count;
        } else if (alpha[i] >= cap) {
            lower = std::max(lower, grad[i]);
        } else {
            upper = std::min(upper, grad[i]);
        }
    }
    if (free_count > 0) sol.rho = free_sum / static_cast<double>(free_count);
    else if (std::isfinite(lower) && std::isfinite(upper)) sol.rho = 0.5 * (lower + upper);
    else sol.rho = std::isfinite(lower) ? lower : upper;

    sol.report.iterations = iter;
    sol.report.max_kkt_violation = violation;
    sol.report.converged = violation <= tol;
    sol.report.objective = 0.5 * dot(alpha, grad);
    return sol;
}

/// Pairwise squared Euclidean distances between rows, summed feature by
/// feature in column order.
inline Matrix pairwise_sq_distances(const Matrix& z) {
    const std::size_t n = z.rows();
    Matrix d(n, n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double v = squared_distance(z.row(a), z.row(b));
            d(a, b) = v;
            d(b, a) = v;
        }
    return d;
}

/// gamma = 1 / (n_features * median pairwise squared distance).
inline double median_heuristic_gamma(const Matrix& sq_dist, std::size_t n_features) {
    std::vector<double> upper;
    const std::size_t n = sq_dist.rows();
    upper.reserve(n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) upper.push_back(sq_dist(a, b));
    double med = stats::median(upper);
    if (!(med > 0.0)) {
        // Mostly duplicated rows: fall back to the mean of the non-zero distances.
        double s = 0.0;
        std::size_t c = 0;
        for (double v : upper)
            if (v > 0.0) { s += v; ++c; }
        med = c > 0 ? s / static_cast<double>(c) : 1.0;
    }
    return 1.0 / (static_cast<double>(std::max<std::size_t>(n_features, 1)) * med);
}

inline Matrix rbf_gram_from_distances(const Matrix& sq_dist, double gamma) {
    Matrix q(sq_dist.rows(), sq_dist.cols());
    for (std::size_t a = 0; a < q.rows(); ++a)
        for (std::size_t b = 0; b < q.cols(); ++b) q(a, b) = std::exp(-gamma * sq_dist(a, b));
    return q;
}

inline Matrix linear_gram(const Matrix& z) {
    const std::size_t n = z.rows();
    Matrix q(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            const double v = dot(z.row(a), z.row(b));
            q(a, b) = v;
            q(b, a) = v;
        }
    return q;
}

/// Packs a solved dual into a model. `z` holds the standardized training rows.
inline OcSvmModel assemble_model(const DualSolution& sol, const Matrix& z, KernelSpec kernel, double nu,
                                 std::vector<std::string> feature_ids, Standardization standardization) {
    OcSvmModel m;
    m.kernel = kernel;
    m.nu = nu;
    m.rho = sol.rho;
    m.alphas = sol.alpha;
    for (std::size_t i = 0; i < sol.alpha.size(); ++i)
        if (sol.alpha[i] > kSupportThreshold) m.support_indices.push_back(i);
    m.train_refs = Matrix(m.support_indices.size(), z.cols());
    for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
        auto src = z.row(m.support_indices[s]);
        std::copy(src.begin(), src.end(), m.train_refs.row(s).begin());
    }
    m.feature_ids = std::move(feature_ids);
    m.standardization = std::move(standardization);
    return m;
}

/// Trains on already-standardized rows. Resolves an automatic RBF gamma.
inline TrainResult train_standardized(const Matrix& z, const TrainOptions& opts, std::vector<std::string> feature_ids,
                                      Standardization standardization) {
    opts.validate();
    require(z.rows() >= 2, Errc::DegenerateData, "one-class SVM needs at least 2 training lots");
    KernelSpec kernel = opts.kernel;
    Matrix q;
    if (kernel.kind == KernelKind::Rbf) {
        const Matrix d = pairwise_sq_distances(z);
        if (kernel.needs_gamma()) kernel.gamma = median_heuristic_gamma(d, z.cols());
        q = rbf_gram_from_distances(d, kernel.gamma);
    } else {
        q = linear_gram(z);
    }
    DualSolution sol = solve_dual(q, opts.nu, opts.tol, opts.max_iter);
    TrainResult res;
    res.report = sol.report;
    res.model = assemble_model(sol, z, kernel, opts.nu, std::move(feature_ids), std::move(standardization));
    return res;
}

/// ν-one-class SVM on every lot of `m`. Features are standardized per column
/// (scale only for the linear kernel) and the same map is stored in the model.
/// A run that hits max_iter returns the last iterate with converged = false.
inline TrainResult train(const DataMatrix& m, const TrainOptions& opts = {}) {
    opts.validate();
    require(m.n_lots() >= 2, Errc::DegenerateData, "one-class SVM needs at least 2 training lots");
    std::vector<std::size_t> all(m.n_params());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Matrix raw = m.rows(all);
    Standardization st = Standardization::fit(raw, opts.kernel.kind == KernelKind::Rbf);
    const Matrix z = st.apply(raw);
    return train_standardized(z, opts, m.param_ids(), std::move(st));
}

inline double decision_standardized(const OcSvmModel& model, std::span<const double> z) {
    require(z.size() == model.n_features(), Errc::DimMismatch,
            "input has " + std::to_string(z.size()) + " features, model has " + std::to_string(model.n_features()));
    double f = 0.0;
    for (std::size_t s = 0; s < model.n_support(); ++s)
        f += model.alphas[model.support_indices[s]] * kernel_eval(model.kernel, z, model.train_refs.row(s));
    return f - model.rho;
}

/// f(x) = Σ α_i K(x, x_i) − ρ on a raw (unstandardized) input. Positive means
/// inside the learned support; negative is flagged.
inline double decision(const OcSvmModel& model, std::span<const double> x) {
    return decision_standardized(model, model.standardization.apply(x));
}

/// Scores every lot of a matrix that carries the model's features (by id, in
/// any column order).
inline std::vector<double> decision_all(const OcSvmModel& model, const DataMatrix& m) {
    std::vector<std::size_t> cols;
    cols.reserve(model.n_features());
    for (const auto& id : model.feature_ids) cols.push_back(m.param_index(id));
    const Matrix raw = m.rows(cols);
    std::vector<double> out(m.n_lots());
    for (std::size_t r = 0; r < m.n_lots(); ++r) out[r] = decision(model, raw.row(r));
    return out;
}

struct PrimalWeights {
    std::vector<double> w;
    std::vector<double> w_sq;
};

/// w = Σ α_i x_i over the support vectors, in standardized coordinates. Exact
/// primal normal for the linear kernel, a linear surrogate otherwise.
inline PrimalWeights primal_weights(const OcSvmModel& model) {
    PrimalWeights pw;
    pw.w.assign(model.n_features(), 0.0);
    for (std::size_t s = 0; s < model.n_support(); ++s) {
        const double a = model.alphas[model.support_indices[s]];
        auto ref = model.train_refs.row(s);
        for (std::size_t j = 0; j < pw.w.size(); ++j) pw.w[j] += a * ref[j];
    }
    pw.w_sq.resize(pw.w.size());
    for (std::size_t j = 0; j < pw.w.size(); ++j) pw.w_sq[j] = pw.w[j] * pw.w[j];
    return pw;
}

/// RFE ranking criterion for every feature; lower = less influential.
/// Linear: w_j². RBF: |ΔJ(j)| = ½αᵀQ^(−j)α − ½αᵀQα with α frozen, where
/// Q^(−j) drops feature j from every pairwise distance.
inline std::vector<double> rfe_criteria(const OcSvmModel& model, std::size_t threads = 1) {
    const std::size_t p = model.n_features();
    if (model.kernel.kind == KernelKind::Linear) return primal_weights(model).w_sq;

    const std::size_t s = model.n_support();
    const auto alpha = model.support_alphas();
    const double gamma = model.kernel.gamma;
    // Upper-triangle pair weights α_a α_b K_ab, then per-feature sums.
    std::vector<double> pair_weight;
    pair_weight.reserve(s * (s > 0 ? s - 1 : 0) / 2);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = a + 1; b < s; ++b)
            pair_weight.push_back(alpha[a] * alpha[b] *
                                  std::exp(-gamma * squared_distance(model.train_refs.row(a), model.train_refs.row(b))));
    Matrix by_feature(p, s);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t j = 0; j < p; ++j) by_feature(j, a) = model.train_refs(a, j);

    std::vector<double> crit(p, 0.0);
    parallel_for(p, threads, [&](std::size_t j) {
        auto col = by_feature.row(j);
        double acc = 0.0;
        std::size_t k = 0;
        for (std::size_t a = 0; a < s; ++a)
            for (std::size_t b = a + 1; b < s; ++b, ++k) {
                const double d = col[a] - col[b];
                if (d != 0.0) acc += pair_weight[k] * std::expm1(gamma * d * d);
            }
        // Factor ½ and the symmetric (a, b) / (b, a) pair cancel.
        crit[j] = acc;
    });
    return crit;
}

inline double rfe_criterion(const OcSvmModel& model, std::size_t j) {
    require(j < model.n_features(), Errc::DimMismatch, "feature index out of range");
    return rfe_criteria(model)[j];
}

}  // namespace ocfs
