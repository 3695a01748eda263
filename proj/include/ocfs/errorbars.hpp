#pragma once

#include "ocfs/csv.hpp"
#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/ocsvm.hpp"
#include "ocfs/parallel.hpp"
#include "ocfs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ocfs {

struct PerturbationResult {
    double delta_f = 0.0;
    std::vector<double> first_order_terms;  // one per support vector
};

/// First-order change of f(x) when support vector i moves by δ_i (rows of
/// `deltas`, standardized coordinates) with α frozen:
///   δf = Σ α_i ⟨δ_i, ∂K/∂x_i(x, x_i)⟩.
/// `x` is a raw input.
inline PerturbationResult perturb_decision(const OcSvmModel& model, std::span<const double> x, const Matrix& deltas) {
    require(deltas.rows() == model.n_support() && deltas.cols() == model.n_features(), Errc::DimMismatch,
            "need one delta of length " + std::to_string(model.n_features()) + " per support vector");
    const auto z = model.standardization.apply(x);
    PerturbationResult r;
    r.first_order_terms.resize(model.n_support());
    for (std::size_t s = 0; s < model.n_support(); ++s) {
        const auto g = kernel_grad(model.kernel, z, model.train_refs.row(s));
        r.first_order_terms[s] = model.alphas[model.support_indices[s]] * dot(deltas.row(s), g);
    }
    r.delta_f = std::accumulate(r.first_order_terms.begin(), r.first_order_terms.end(), 0.0);
    return r;
}

/// Same model with every support vector moved by its delta (α and ρ kept).
inline OcSvmModel displace_support(const OcSvmModel& model, const Matrix& deltas) {
    require(deltas.rows() == model.n_support() && deltas.cols() == model.n_features(), Errc::DimMismatch,
            "delta matrix does not match support vectors");
    OcSvmModel moved = model;
    for (std::size_t s = 0; s < model.n_support(); ++s)
        for (std::size_t j = 0; j < model.n_features(); ++j) moved.train_refs(s, j) += deltas(s, j);
    return moved;
}

struct ErrorBarCalibration {
    double removal_fraction = 0.0;
    double ratio = 0.0;
    double r_squared = 0.0;
    std::size_t n_models = 0;
    std::size_t n_removed = 0;
};

struct CalibrationPoint {
    std::size_t variable = 0;    // column whose spread was measured
    double scale = 1.0;          // replica scale in solver coordinates
    double sigma_variable = 0.0;
    double mean_sigma_scores = 0.0;
};

struct EnsembleConfig {
    std::size_t n_models = 100;
    std::size_t n_removed = 10;
    double nu = 0.1;
    KernelSpec kernel = KernelSpec::rbf_auto();
    double tol = 1e-6;
    std::size_t max_iter = 10'000'000;
    std::uint64_t seed = 1;
    std::size_t n_draws = 20;
    double scale_min = 0.5;
    double scale_max = 2.0;
    std::size_t threads = 1;

    void validate(const DataMatrix& m) const {
        require(n_models >= 2, Errc::InvalidArgument, "ensemble needs at least 2 models");
        require(n_removed < m.n_params(), Errc::InvalidArgument, "n_removed must be < n_params");
        require(n_draws >= 2, Errc::InvalidArgument, "calibration needs at least 2 variable draws");
        require(scale_min > 0.0 && scale_max >= scale_min, Errc::InvalidArgument, "bad replica scale range");
        require(m.n_lots() >= 4, Errc::InsufficientRows, "ensemble experiment needs at least 4 lots");
        TrainOptions{nu, kernel, tol, max_iter}.validate();
    }
};

struct EnsembleResult {
    ErrorBarCalibration calibration;
    std::vector<std::string> scored_lots;     // second half, in matrix order
    Matrix scores;                            // scored lots x models
    std::vector<double> sigma_scores;         // per scored lot
    std::vector<CalibrationPoint> points;
    std::vector<std::vector<std::size_t>> removed;  // per model
};

namespace detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

inline std::vector<std::size_t> random_subset(std::mt19937_64& rng, std::size_t n, std::size_t count) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline Matrix take_columns(const Matrix& z, const std::vector<std::size_t>& keep, double scale) {
    Matrix out(z.rows(), keep.size());
    for (std::size_t r = 0; r < z.rows(); ++r)
        for (std::size_t k = 0; k < keep.size(); ++k) out(r, k) = scale * z(r, keep[k]);
    return out;
}

}  // namespace detail

/// Random-feature-removal ensemble. The first half of the lots trains, the
/// second half is scored. Model i drops n_removed features drawn from its own
/// seeded stream, so results do not depend on the thread count.
///
/// Calibration regresses the mean per-lot score spread on the spread of a
/// single variable. Every variable has unit spread in solver coordinates, so
/// each of the n_draws draws rescales the standardized data by a log-uniform
/// factor c in [scale_min, scale_max] and measures a random variable's spread
/// (≈ c) on the rescaled training half. All draws reuse the same removal sets
/// and the kernel width resolved on the unscaled data.
inline EnsembleResult ensemble_experiment(const DataMatrix& m, const EnsembleConfig& cfg) {
    cfg.validate(m);
    const std::size_t n = m.n_lots();
    const std::size_t half = n / 2;
    const std::size_t p = m.n_params();
    const bool rbf = cfg.kernel.kind == KernelKind::Rbf;

    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), 0);
    const Matrix raw = m.rows(all);
    Matrix raw_train(half, p), raw_test(n - half, p);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c) (r < half ? raw_train(r, c) : raw_test(r - half, c)) = raw(r, c);
    const Standardization st = Standardization::fit(raw_train, rbf);
    const Matrix z_train = st.apply(raw_train);
    const Matrix z_test = st.apply(raw_test);

    KernelSpec kernel = cfg.kernel;
    if (kernel.needs_gamma()) kernel.gamma = median_heuristic_gamma(pairwise_sq_distances(z_train), p);
    const TrainOptions opts{cfg.nu, kernel, cfg.tol, cfg.max_iter};

    EnsembleResult res;
    res.removed.resize(cfg.n_models);
    std::vector<std::vector<std::size_t>> keep(cfg.n_models);
    for (std::size_t i = 0; i < cfg.n_models; ++i) {
        auto rng = detail::stream(cfg.seed, 1, i);
        res.removed[i] = detail::random_subset(rng, p, cfg.n_removed);
        std::vector<bool> drop(p, false);
        for (auto c : res.removed[i]) drop[c] = true;
        for (std::size_t c = 0; c < p; ++c)
            if (!drop[c]) keep[i].push_back(c);
    }

    const std::size_t n_test = n - half;
    // Scores of every (scale, model) pair; scale index 0 is the unscaled ensemble.
    std::vector<double> scales{1.0};
    for (std::size_t v = 0; v < cfg.n_draws; ++v) {
        auto rng = detail::stream(cfg.seed, 2, v);
        std::uniform_real_distribution<double> u(std::log(cfg.scale_min), std::log(cfg.scale_max));
        const double c = std::exp(u(rng));
        std::uniform_int_distribution<std::size_t> pick(0, p - 1);
        const std::size_t var = pick(rng);
        res.points.push_back({var, c, 0.0, 0.0});
        scales.push_back(c);
    }

    std::vector<Matrix> score_sets(scales.size(), Matrix(n_test, cfg.n_models));
    parallel_for(scales.size() * cfg.n_models, cfg.threads, [&](std::size_t job) {
        const std::size_t s = job / cfg.n_models;
        const std::size_t i = job % cfg.n_models;
        const Matrix ztr = detail::take_columns(z_train, keep[i], scales[s]);
        const Matrix zte = detail::take_columns(z_test, keep[i], scales[s]);
        Standardization identity;
        identity.center.assign(keep[i].size(), 0.0);
        identity.scale.assign(keep[i].size(), 1.0);
        std::vector<std::string> ids;
        for (auto c : keep[i]) ids.push_back(m.param_ids()[c]);
        const auto model = train_standardized(ztr, opts, std::move(ids), identity).model;
        for (std::size_t t = 0; t < n_test; ++t) score_sets[s](t, i) = decision_standardized(model, zte.row(t));
    });

    auto spread = [&](const Matrix& sc) {
        std::vector<double> sig(n_test);
        for (std::size_t t = 0; t < n_test; ++t) sig[t] = stats::stddev(sc.row(t));
        return sig;
    };

    res.scores = score_sets.front();
    res.sigma_scores = spread(res.scores);
    for (std::size_t t = 0; t < n_test; ++t) res.scored_lots.push_back(m.lot_ids()[half + t]);

    std::vector<double> col(half);
    for (std::size_t v = 0; v < cfg.n_draws; ++v) {
        auto& pt = res.points[v];
        for (std::size_t r = 0; r < half; ++r) col[r] = pt.scale * z_train(r, pt.variable);
        pt.sigma_variable = stats::stddev(col);
        pt.mean_sigma_scores = stats::mean(spread(score_sets[v + 1]));
    }

    // Ratio: least-squares slope through the origin. r²: squared correlation,
    // i.e. the coefficient of determination of the ordinary least-squares line.
    double sxy = 0.0, sxx = 0.0, xbar = 0.0, ybar = 0.0;
    for (const auto& pt : res.points) {
        sxy += pt.sigma_variable * pt.mean_sigma_scores;
        sxx += pt.sigma_variable * pt.sigma_variable;
        xbar += pt.sigma_variable;
        ybar += pt.mean_sigma_scores;
    }
    const double count = static_cast<double>(res.points.size());
    xbar /= count;
    ybar /= count;
    const double ratio = sxx > 0.0 ? sxy / sxx : 0.0;
    double cxy = 0.0, cxx = 0.0, cyy = 0.0;
    for (const auto& pt : res.points) {
        const double dx = pt.sigma_variable - xbar;
        const double dy = pt.mean_sigma_scores - ybar;
        cxy += dx * dy;
        cxx += dx * dx;
        cyy += dy * dy;
    }
    double r2 = 0.0;
    if (cyy == 0.0) r2 = ybar == 0.0 ? 1.0 : 0.0;  // flat response: exact only when it is identically zero
    else if (cxx > 0.0) r2 = cxy * cxy / (cxx * cyy);

    res.calibration.removal_fraction = static_cast<double>(cfg.n_removed) / static_cast<double>(p);
    res.calibration.ratio = ratio;
    res.calibration.r_squared = std::clamp(r2, 0.0, 1.0);
    res.calibration.n_models = cfg.n_models;
    res.calibration.n_removed = cfg.n_removed;
    return res;
}

struct GreyZoneReport {
    double sigma_pred = 0.0;
    std::set<std::string> grey_lot_ids;
    double grey_fraction = 0.0;
};

/// Lots whose signed decision value lies strictly within ±ratio·σ_variable of
/// the frontier.
inline GreyZoneReport grey_zone(const std::vector<std::pair<std::string, double>>& scores,
                                const ErrorBarCalibration& calibration, double sigma_variable) {
    require(sigma_variable >= 0.0, Errc::InvalidArgument, "sigma_variable must be >= 0");
    GreyZoneReport g;
    g.sigma_pred = calibration.ratio * sigma_variable;
    for (const auto& [lot, s] : scores)
        if (std::abs(s) < g.sigma_pred) g.grey_lot_ids.insert(lot);
    g.grey_fraction = scores.empty() ? 0.0
                                     : static_cast<double>(g.grey_lot_ids.size()) / static_cast<double>(scores.size());
    return g;
}

// removal_fraction,ratio,r_squared,n_models,n_removed
inline void write_calibration_csv(std::ostream& out, const ErrorBarCalibration& c) {
    out << "removal_fraction,ratio,r_squared,n_models,n_removed\n"
        << csv::format_real(c.removal_fraction) << ',' << csv::format_real(c.ratio) << ','
        << csv::format_real(c.r_squared) << ',' << c.n_models << ',' << c.n_removed << '\n';
}

inline ErrorBarCalibration parse_calibration_csv(std::istream& in) {
    const auto lines = csv::read_lines(in);
    require(lines.size() >= 2, Errc::MalformedCsv, "calibration file needs a header and one row");
    const auto f = csv::split_record(lines[1]);
    require(f.size() == 5, Errc::MalformedCsv, "calibration row must have 5 fields");
    auto real = [](const std::string& s) {
        auto v = csv::parse_real(s);
        require(v.has_value(), Errc::MalformedCsv, "empty calibration field");
        return *v;
    };
    ErrorBarCalibration c;
    c.removal_fraction = real(f[0]);
    c.ratio = real(f[1]);
    c.r_squared = real(f[2]);
    c.n_models = static_cast<std::size_t>(real(f[3]));
    c.n_removed = static_cast<std::size_t>(real(f[4]));
    return c;
}

// lot,m0,m1,...
inline void write_score_matrix_csv(std::ostream& out, const EnsembleResult& r) {
    out << "lot";
    for (std::size_t i = 0; i < r.scores.cols(); ++i) out << ",m" << i;
    out << '\n';
    for (std::size_t t = 0; t < r.scores.rows(); ++t) {
        out << csv::quote_if_needed(r.scored_lots[t]);
        for (double v : r.scores.row(t)) out << ',' << csv::format_real(v);
        out << '\n';
    }
}

}  // namespace ocfs
