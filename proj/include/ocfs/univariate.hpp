#pragma once

#include "ocfs/csv.hpp"
#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ocfs {

// Consistency factor turning the median absolute deviation into a standard
// deviation estimate for normal data.
inline constexpr double kMadeFactor = 1.483;

inline constexpr double kDefaultNFactor = 3.0;
inline constexpr std::size_t kDefaultInteriorBins = 32;

struct MadeStats {
    double median = 0.0;
    double made = 0.0;
    double n_factor = kDefaultNFactor;
    double ood_fraction = 0.0;
};

/// Median, MAD and the share of samples with |x − median| ≥ n·1.483·MAD.
/// With MAD = 0 the band is empty, so the share of samples that differ from
/// the median is reported instead.
inline MadeStats made_stats(std::span<const double> samples, double n_factor = kDefaultNFactor) {
    require(!samples.empty(), Errc::EmptyColumn, "MADe statistics of an empty column");
    require(n_factor > 0.0, Errc::InvalidArgument, "MADe width factor must be > 0");
    MadeStats s;
    s.n_factor = n_factor;
    s.median = stats::median(samples);
    std::vector<double> dev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) dev[i] = std::abs(samples[i] - s.median);
    s.made = stats::median(dev);
    std::size_t out = 0;
    if (s.made > 0.0) {
        const double band = n_factor * kMadeFactor * s.made;
        for (double d : dev)
            if (d >= band) ++out;
    } else {
        for (double d : dev)
            if (d != 0.0) ++out;
    }
    s.ood_fraction = static_cast<double>(out) / static_cast<double>(samples.size());
    return s;
}

inline MadeStats made_stats(const ColumnView& col, double n_factor = kDefaultNFactor) {
    return made_stats(col.samples, n_factor);
}

enum class RankMethod { Made, Entropy, Rfe, RfeKmed };

constexpr std::string_view rank_method_name(RankMethod m) noexcept {
    switch (m) {
        case RankMethod::Made: return "MADE";
        case RankMethod::Entropy: return "ENTROPY";
        case RankMethod::Rfe: return "RFE";
        case RankMethod::RfeKmed: return "RFE_KMED";
    }
    return "?";
}

struct RankEntry {
    std::string param_id;
    double score = 0.0;

    friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

// Best first.
struct FeatureRanking {
    RankMethod method = RankMethod::Made;
    std::vector<RankEntry> entries;

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.param_id);
        return out;
    }

    std::size_t position(std::string_view id) const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].param_id == id) return i;
        fail(Errc::UnknownParam, "parameter '" + std::string(id) + "' not in ranking");
    }
};

// Descending score, ties by id.
inline void sort_descending(std::vector<RankEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.param_id < b.param_id;
    });
}

inline FeatureRanking rank_by_made(const DataMatrix& m, double n_factor = kDefaultNFactor) {
    FeatureRanking r{RankMethod::Made, {}};
    r.entries.reserve(m.n_params());
    for (std::size_t c = 0; c < m.n_params(); ++c)
        r.entries.push_back({m.param_ids()[c], made_stats(m.column(c), n_factor).ood_fraction});
    sort_descending(r.entries);
    return r;
}

/// Histogram with unbounded outer bins: (−∞, e₀], (e₀, e₁], …, (e_last, +∞).
/// Every real value falls in exactly one bin, so a binning built on one
/// sample can be reused on any other.
class Binning {
  public:
    explicit Binning(std::vector<double> edges) : edges_{std::move(edges)} {
        require(!edges_.empty(), Errc::InvalidArgument, "binning needs at least one edge");
        for (std::size_t i = 1; i < edges_.size(); ++i)
            require(edges_[i] > edges_[i - 1], Errc::InvalidArgument, "bin edges must be strictly increasing");
    }

    const std::vector<double>& edges() const noexcept { return edges_; }
    std::size_t n_bins() const noexcept { return edges_.size() + 1; }

    std::size_t bin_of(double x) const noexcept {
        return static_cast<std::size_t>(std::lower_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
    }

    friend bool operator==(const Binning&, const Binning&) = default;

  private:
    std::vector<double> edges_;
};

/// n_interior equal-width intervals over [min, max] of the reference sample.
inline Binning make_binning(std::span<const double> samples, std::size_t n_interior = kDefaultInteriorBins) {
    require(!samples.empty(), Errc::EmptyColumn, "binning of an empty column");
    require(n_interior >= 1, Errc::InvalidArgument, "need at least one interior bin");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return Binning({lo});
    std::vector<double> edges;
    edges.reserve(n_interior + 1);
    const double width = (hi - lo) / static_cast<double>(n_interior);
    for (std::size_t i = 0; i < n_interior; ++i) edges.push_back(lo + width * static_cast<double>(i));
    edges.push_back(hi);
    // A span too narrow for the requested resolution produces coincident edges.
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::sort(edges.begin(), edges.end());
    return Binning(std::move(edges));
}

inline Binning make_binning(const ColumnView& col, std::size_t n_interior = kDefaultInteriorBins) {
    return make_binning(col.samples, n_interior);
}

/// Plug-in Shannon entropy (natural log) of the per-bin frequencies.
inline double entropy(std::span<const double> samples, const Binning& bins) {
    require(!samples.empty(), Errc::EmptyColumn, "entropy of an empty column");
    std::vector<std::size_t> counts(bins.n_bins(), 0);
    for (double x : samples) ++counts[bins.bin_of(x)];
    const double n = static_cast<double>(samples.size());
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

inline double entropy(const ColumnView& col, const Binning& bins) { return entropy(col.samples, bins); }

using BinningSet = std::map<std::string, Binning, std::less<>>;

/// One binning per column, built on a reference matrix (typically the
/// training set) so later data can be scored on the same bins.
inline BinningSet make_binnings(const DataMatrix& reference, std::size_t n_interior = kDefaultInteriorBins) {
    BinningSet out;
    for (std::size_t c = 0; c < reference.n_params(); ++c)
        out.emplace(reference.param_ids()[c], make_binning(reference.column(c), n_interior));
    return out;
}

inline FeatureRanking rank_by_entropy(const DataMatrix& m, const BinningSet& binnings) {
    FeatureRanking r{RankMethod::Entropy, {}};
    r.entries.reserve(m.n_params());
    for (std::size_t c = 0; c < m.n_params(); ++c) {
        const auto& id = m.param_ids()[c];
        auto it = binnings.find(id);
        require(it != binnings.end(), Errc::UnknownParam, "no binning for parameter '" + id + "'");
        r.entries.push_back({id, entropy(m.column(c), it->second)});
    }
    sort_descending(r.entries);
    return r;
}

// Each column binned on its own samples.
inline FeatureRanking rank_by_entropy(const DataMatrix& m, std::size_t n_interior = kDefaultInteriorBins) {
    return rank_by_entropy(m, make_binnings(m, n_interior));
}

inline std::set<std::string> select_top(const FeatureRanking& r, std::size_t k) {
    require(k >= 1 && k <= r.entries.size(), Errc::KOutOfRange,
            "k = " + std::to_string(k) + " outside [1, " + std::to_string(r.entries.size()) + "]");
    std::set<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.insert(r.entries[i].param_id);
    return out;
}

// rank,param_id,method,score
inline void write_ranking_csv(std::ostream& out, const FeatureRanking& r) {
    out << "rank,param_id,method,score\n";
    for (std::size_t i = 0; i < r.entries.size(); ++i)
        out << (i + 1) << ',' << csv::quote_if_needed(r.entries[i].param_id) << ',' << rank_method_name(r.method)
            << ',' << csv::format_real(r.entries[i].score) << '\n';
}

}  // namespace ocfs
