#pragma once

#include "ocfs/csv.hpp"
#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/kmedoids.hpp"
#include "ocfs/ocsvm.hpp"
#include "ocfs/stats.hpp"
#include "ocfs/univariate.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace ocfs {

struct RfeConfig {
    std::size_t target_size = 10;
    std::size_t batch_remove = 1;
    double nu = 0.1;
    KernelSpec kernel = KernelSpec::rbf_auto();
    double tol = 1e-6;
    std::size_t max_iter = 10'000'000;
    std::size_t threads = 1;

    void validate(std::size_t n_params) const {
        require(target_size >= 1 && target_size < n_params, Errc::InvalidArgument,
                "target size must lie in [1, " + std::to_string(n_params) + ")");
        require(batch_remove >= 1, Errc::InvalidArgument, "batch_remove must be >= 1");
        train_options().validate();
    }

    TrainOptions train_options() const { return {nu, kernel, tol, max_iter}; }
};

struct RfeIteration {
    std::vector<std::string> survivors;  // original column order
    std::vector<double> criteria;        // parallel to survivors
    std::vector<std::string> eliminated;
    bool converged = true;
};

struct RfeTrace {
    std::vector<RfeIteration> iterations;
};

struct RfeResult {
    std::set<std::string> selected;
    RfeTrace trace;
};

namespace detail {

// Survivor positions sorted by (criterion ascending, id ascending).
inline std::vector<std::size_t> criterion_order(const std::vector<std::string>& ids, const std::vector<double>& crit) {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (crit[a] != crit[b]) return crit[a] < crit[b];
        return ids[a] < ids[b];
    });
    return order;
}

inline std::vector<std::string> ordered_ids(const RfeIteration& it) {
    std::vector<std::string> out;
    for (auto i : criterion_order(it.survivors, it.criteria)) out.push_back(it.survivors[i]);
    return out;
}

struct RfeStop {
    std::size_t floor;                 // never eliminate below this many features
    std::optional<std::size_t> steps;  // number of eliminating iterations, or run to floor
    bool until_stable = false;         // stop once the criterion order repeats
};

// Shared RFE loop. The pairwise distance matrix (RBF) or Gram matrix (linear)
// of the standardized data is built once and downdated as features leave;
// iteration 0 reproduces train() exactly.
inline RfeResult run_rfe(const DataMatrix& m, const RfeConfig& cfg, const RfeStop& stop) {
    const TrainOptions opts = cfg.train_options();
    opts.validate();
    require(m.n_lots() >= 2, Errc::DegenerateData, "one-class SVM needs at least 2 training lots");
    const bool rbf = cfg.kernel.kind == KernelKind::Rbf;
    const std::size_t n = m.n_lots();
    const std::size_t p = m.n_params();

    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), 0);
    const Matrix raw = m.rows(all);
    const Standardization st = Standardization::fit(raw, rbf);
    const Matrix z = st.apply(raw);

    Matrix pair = rbf ? pairwise_sq_distances(z) : linear_gram(z);
    auto downdate = [&](std::size_t feature) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (rbf) {
                    const double d = z(a, feature) - z(b, feature);
                    pair(a, b) = a == b ? 0.0 : std::max(0.0, pair(a, b) - d * d);
                } else {
                    pair(a, b) -= z(a, feature) * z(b, feature);
                }
            }
    };

    std::vector<std::size_t> alive = all;
    RfeResult res;
    std::optional<std::vector<std::string>> previous_order;
    std::size_t steps_done = 0;
    while (alive.size() > stop.floor && (!stop.steps || steps_done < *stop.steps)) {
        Matrix zs(n, alive.size());
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < alive.size(); ++k) zs(r, k) = z(r, alive[k]);
        KernelSpec kernel = cfg.kernel;
        Matrix q;
        if (rbf) {
            if (kernel.needs_gamma()) kernel.gamma = median_heuristic_gamma(pair, alive.size());
            q = rbf_gram_from_distances(pair, kernel.gamma);
        } else {
            q = pair;
        }
        const DualSolution sol = solve_dual(q, opts.nu, opts.tol, opts.max_iter);
        std::vector<std::string> ids;
        for (auto c : alive) ids.push_back(m.param_ids()[c]);
        const OcSvmModel model = assemble_model(sol, zs, kernel, opts.nu, ids, st.subset(alive));

        RfeIteration it;
        it.survivors = ids;
        it.criteria = rfe_criteria(model, cfg.threads);
        it.converged = sol.report.converged;

        if (stop.until_stable) {
            auto order = ordered_ids(it);
            if (previous_order) {
                std::vector<std::string> prev;
                std::set<std::string> now(ids.begin(), ids.end());
                for (const auto& id : *previous_order)
                    if (now.contains(id)) prev.push_back(id);
                if (prev == order) {
                    res.trace.iterations.push_back(std::move(it));
                    break;
                }
            }
            previous_order = std::move(order);
        }

        const std::size_t drop = std::min(cfg.batch_remove, alive.size() - stop.floor);
        const auto order = criterion_order(it.survivors, it.criteria);
        std::vector<bool> gone(alive.size(), false);
        for (std::size_t d = 0; d < drop; ++d) {
            gone[order[d]] = true;
            it.eliminated.push_back(it.survivors[order[d]]);
        }
        std::vector<std::size_t> next;
        for (std::size_t k = 0; k < alive.size(); ++k) {
            if (gone[k]) downdate(alive[k]);
            else next.push_back(alive[k]);
        }
        alive = std::move(next);
        res.trace.iterations.push_back(std::move(it));
        ++steps_done;
    }
    for (auto c : alive) res.selected.insert(m.param_ids()[c]);
    return res;
}

}  // namespace detail

/// Recursive feature elimination: train, rank features by rfe_criteria, drop
/// the batch_remove weakest (ties by id), repeat until target_size remain.
inline RfeResult rfe(const DataMatrix& m, const RfeConfig& cfg) {
    cfg.validate(m.n_params());
    return detail::run_rfe(m, cfg, {cfg.target_size, std::nullopt, false});
}

/// Criterion-sorted listing of one trace iteration, most influential first.
inline std::vector<RankEntry> rank_cluster_diagnostic(const RfeTrace& trace, std::size_t iteration) {
    require(iteration < trace.iterations.size(), Errc::IterationOutOfRange,
            "iteration " + std::to_string(iteration) + " not in trace of " +
                std::to_string(trace.iterations.size()));
    const auto& it = trace.iterations[iteration];
    std::vector<RankEntry> out;
    for (std::size_t i = 0; i < it.survivors.size(); ++i) out.push_back({it.survivors[i], it.criteria[i]});
    sort_descending(out);
    return out;
}

// iteration,param_id,criterion,eliminated
inline void write_trace_csv(std::ostream& out, const RfeTrace& trace) {
    out << "iteration,param_id,criterion,eliminated\n";
    for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
        const auto& it = trace.iterations[t];
        std::set<std::string> gone(it.eliminated.begin(), it.eliminated.end());
        for (std::size_t i = 0; i < it.survivors.size(); ++i)
            out << t << ',' << csv::quote_if_needed(it.survivors[i]) << ',' << csv::format_real(it.criteria[i]) << ','
                << (gone.contains(it.survivors[i]) ? 1 : 0) << '\n';
    }
}

/// Columns as z-scored vectors over lots, for clustering variables.
inline PointSet standardized_columns(const DataMatrix& m, const std::set<std::string>& ids) {
    PointSet pts;
    for (const auto& id : ids) {
        auto col = m.column(m.param_index(id));
        const double mu = stats::mean(col);
        const double sd = stats::stddev(col);
        std::vector<double> v(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) v[i] = (col[i] - mu) / (sd > 0.0 ? sd : 1.0);
        pts.emplace(id, std::move(v));
    }
    return pts;
}

struct RfeKmedoidResult {
    std::set<std::string> selected;
    RfeTrace trace;
    MedoidClustering clustering;
};

/// A few RFE iterations, then one representative per cluster of surviving
/// variables. `rfe_steps` = nullopt runs RFE until the criterion order of the
/// survivors repeats between two consecutive iterations. RFE never drops below
/// k features.
inline RfeKmedoidResult rfe_kmedoid(const DataMatrix& m, std::optional<std::size_t> rfe_steps, std::size_t k,
                                    const RfeConfig& cfg, std::size_t kmedoid_max_iter = 100) {
    require(!rfe_steps || *rfe_steps >= 1, Errc::InvalidArgument, "RFE step count must be >= 1");
    require(k >= 1 && k <= m.n_params(), Errc::KTooLarge, "k must lie in [1, n_params]");
    RfeConfig c = cfg;
    c.target_size = k;
    c.train_options().validate();
    require(c.batch_remove >= 1, Errc::InvalidArgument, "batch_remove must be >= 1");
    RfeKmedoidResult out;
    auto res = detail::run_rfe(m, c, {k, rfe_steps, !rfe_steps.has_value()});
    out.trace = std::move(res.trace);
    require(k <= res.selected.size(), Errc::KTooLarge, "k exceeds the surviving variable count");
    out.clustering = kmedoids(standardized_columns(m, res.selected), k, kmedoid_max_iter);
    out.selected = out.clustering.medoid_ids;
    return out;
}

}  // namespace ocfs
