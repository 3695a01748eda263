#pragma once

#include "ocfs/csv.hpp"
#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/fusion.hpp"
#include "ocfs/ocsvm.hpp"
#include "ocfs/rfe.hpp"
#include "ocfs/univariate.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ocfs {

enum class Method { Made, Entropy, Both, Rfe, RfeKmed };

constexpr std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::Made: return "MADE";
        case Method::Entropy: return "ENTROPY";
        case Method::Both: return "BOTH";
        case Method::Rfe: return "RFE";
        case Method::RfeKmed: return "RFE_KMED";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    std::string up(s);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "MADE") return Method::Made;
    if (up == "ENTROPY") return Method::Entropy;
    if (up == "BOTH") return Method::Both;
    if (up == "RFE") return Method::Rfe;
    if (up == "RFE_KMED" || up == "RFE-KMED" || up == "RFEKMED") return Method::RfeKmed;
    fail(Errc::InvalidArgument, "unknown method '" + std::string(s) + "'");
}

struct PipelineConfig {
    std::size_t k = 10;  // features kept (target size for RFE, medoids for RFE_KMED)
    double nu = 0.1;
    KernelSpec kernel = KernelSpec::rbf_auto();
    double tol = 1e-6;
    std::size_t max_iter = 10'000'000;
    double threshold = 0.0;
    double n_factor = kDefaultNFactor;
    std::size_t bins = kDefaultInteriorBins;
    std::size_t batch_remove = 1;
    std::optional<std::size_t> rfe_steps = 5;  // RFE_KMED; nullopt = until stable
    std::size_t threads = 1;

    RfeConfig rfe_config() const { return {k, batch_remove, nu, kernel, tol, max_iter, threads}; }
    TrainOptions train_options() const { return {nu, kernel, tol, max_iter}; }
};

inline std::set<std::string> select_features(const DataMatrix& m, Method method, const PipelineConfig& cfg) {
    switch (method) {
        case Method::Made: return select_top(rank_by_made(m, cfg.n_factor), cfg.k);
        case Method::Entropy: return select_top(rank_by_entropy(m, cfg.bins), cfg.k);
        case Method::Both:
            return fuse_feature_sets_both(select_top(rank_by_made(m, cfg.n_factor), cfg.k),
                                          select_top(rank_by_entropy(m, cfg.bins), cfg.k));
        case Method::Rfe:
            if (cfg.k == m.n_params()) {
                const auto& ids = m.param_ids();
                return {ids.begin(), ids.end()};
            }
            return rfe(m, cfg.rfe_config()).selected;
        case Method::RfeKmed: return rfe_kmedoid(m, cfg.rfe_steps, cfg.k, cfg.rfe_config()).selected;
    }
    fail(Errc::InvalidArgument, "unknown method");
}

struct PipelineOutcome {
    std::set<std::string> selected;
    OcSvmModel model;
    SolverReport report;
    std::vector<double> decisions;  // matrix lot order
    std::set<std::string> flagged;
};

/// Select features, restrict, train on every lot, flag decision < threshold.
inline PipelineOutcome run_pipeline(const DataMatrix& m, Method method, const PipelineConfig& cfg) {
    PipelineOutcome out;
    out.selected = select_features(m, method, cfg);
    require(!out.selected.empty(), Errc::EmptySelection,
            std::string(method_name(method)) + " selected no features");
    const DataMatrix sub = restrict(m, out.selected);
    auto trained = train(sub, cfg.train_options());
    out.model = std::move(trained.model);
    out.report = trained.report;
    out.decisions = decision_all(out.model, sub);
    for (std::size_t i = 0; i < sub.n_lots(); ++i)
        if (out.decisions[i] < cfg.threshold) out.flagged.insert(sub.lot_ids()[i]);
    return out;
}

struct EvalRow {
    std::string method;
    std::size_t total_flagged = 0;
    std::size_t total_lots = 0;
    std::size_t bad_caught = 0;
    std::size_t bad_total = 0;

    friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalTable {
    std::vector<EvalRow> rows;
};

using NamedFlags = std::vector<std::pair<std::string, std::set<std::string>>>;

/// One row per method plus COMBINED (intersection of flagged lots) when at
/// least two methods are given. Lot totals come from the label set.
inline EvalTable evaluate(const NamedFlags& flags, const LabelSet& labels) {
    const auto bad = labels.bad_lots();
    auto row = [&](const std::string& name, const std::set<std::string>& f) {
        EvalRow r{name, f.size(), labels.size(), 0, bad.size()};
        for (const auto& lot : f) {
            auto l = labels.get(lot);
            require(l.has_value(), Errc::MissingLabels, "flagged lot '" + lot + "' has no label");
            if (*l == Label::Bad) ++r.bad_caught;
        }
        return r;
    };
    EvalTable t;
    for (const auto& [name, f] : flags) t.rows.push_back(row(name, f));
    if (flags.size() >= 2) {
        std::vector<std::set<std::string>> sets;
        for (const auto& [name, f] : flags) sets.push_back(f);
        t.rows.push_back(row("COMBINED", fuse_detections_combined(sets)));
    }
    return t;
}

// Two-row layout: "Total" flagged/lots and "ECC" bad caught/bad total.
inline void write_eval_text(std::ostream& out, const EvalTable& t) {
    std::vector<std::string> total, ecc;
    std::size_t width = 8;
    for (const auto& r : t.rows) {
        total.push_back(std::to_string(r.total_flagged) + "/" + std::to_string(r.total_lots));
        ecc.push_back(std::to_string(r.bad_caught) + "/" + std::to_string(r.bad_total));
        width = std::max({width, r.method.size() + 2, total.back().size() + 2, ecc.back().size() + 2});
    }
    auto line = [&](const std::string& head, const std::vector<std::string>& cells) {
        std::string text = head;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            text.resize(width * (j + 1), ' ');
            text += cells[j];
        }
        out << text << '\n';
    };
    std::vector<std::string> names;
    for (const auto& r : t.rows) names.push_back(r.method);
    line("", names);
    line("Total", total);
    line("ECC", ecc);
}

// method,total_flagged,total_lots,bad_caught,bad_total
inline void write_eval_csv(std::ostream& out, const EvalTable& t) {
    out << "method,total_flagged,total_lots,bad_caught,bad_total\n";
    for (const auto& r : t.rows)
        out << r.method << ',' << r.total_flagged << ',' << r.total_lots << ',' << r.bad_caught << ',' << r.bad_total
            << '\n';
}

}  // namespace ocfs
