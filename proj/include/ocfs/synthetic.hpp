#pragma once

#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace ocfs {

/// Synthetic stand-in for wafer test data: continuous parametric columns and
/// sparse count-valued yield columns; BAD lots are shifted on a random subset
/// of informative columns.
struct SyntheticSpec {
    std::size_t n_lots = 400;
    std::size_t n_parametric = 120;
    std::size_t n_yield = 380;
    std::size_t n_bad_lots = 12;
    std::size_t n_informative = 10;
    double defect_shift = 4.0;  // in column standard deviations
    double yield_sparsity = 0.9;
    double yield_rate = 1.5;    // mean of the non-zero count draw, minus one
    std::uint64_t seed = 1;

    void validate() const {
        require(n_lots >= 1, Errc::SpecInvalid, "need at least one lot");
        require(n_parametric + n_yield >= 1, Errc::SpecInvalid, "need at least one column");
        require(n_bad_lots < n_lots, Errc::SpecInvalid, "n_bad_lots must be < n_lots");
        require(n_informative <= n_parametric + n_yield, Errc::SpecInvalid, "more informative columns than columns");
        require(yield_sparsity >= 0.0 && yield_sparsity < 1.0, Errc::SpecInvalid, "yield_sparsity must be in [0, 1)");
        require(std::isfinite(defect_shift), Errc::SpecInvalid, "defect_shift must be finite");
        require(yield_rate >= 0.0 && std::isfinite(yield_rate), Errc::SpecInvalid, "yield_rate must be >= 0");
    }
};

struct SyntheticData {
    DataMatrix data;
    LabelSet labels;
    std::vector<std::string> informative_ids;
    std::vector<std::string> bad_lot_ids;
};

namespace detail {

inline std::string numbered(char prefix, std::size_t i, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(4, std::to_string(total).size());
    std::string digits = std::to_string(i + 1);
    return prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
}

inline std::vector<std::size_t> pick_distinct(std::mt19937_64& rng, std::size_t n, std::size_t count) {
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

}  // namespace detail

/// Deterministic given spec.seed. Parametric columns are ids P0001..., yield
/// columns Y0001..., lots L0001.... Informative columns come from the
/// parametric block when it is large enough.
inline SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const std::size_t n = spec.n_lots;
    const std::size_t p = spec.n_parametric + spec.n_yield;

    std::vector<std::string> lots, params;
    for (std::size_t i = 0; i < n; ++i) lots.push_back(detail::numbered('L', i, n));
    for (std::size_t j = 0; j < spec.n_parametric; ++j) params.push_back(detail::numbered('P', j, spec.n_parametric));
    for (std::size_t j = 0; j < spec.n_yield; ++j) params.push_back(detail::numbered('Y', j, spec.n_yield));

    std::vector<double> values(n * p);
    std::uniform_real_distribution<double> mu_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> sd_dist(0.5, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::poisson_distribution<int> counts(spec.yield_rate);
    for (std::size_t j = 0; j < p; ++j) {
        double* col = values.data() + j * n;
        if (j < spec.n_parametric) {
            std::normal_distribution<double> dist(mu_dist(rng), sd_dist(rng));
            for (std::size_t i = 0; i < n; ++i) col[i] = dist(rng);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                col[i] = unit(rng) < spec.yield_sparsity ? 0.0 : 1.0 + static_cast<double>(counts(rng));
        }
    }

    const bool from_parametric = spec.n_parametric >= spec.n_informative;
    auto informative = detail::pick_distinct(rng, from_parametric ? spec.n_parametric : p, spec.n_informative);
    auto bad = detail::pick_distinct(rng, n, spec.n_bad_lots);
    for (auto j : informative) {
        double* col = values.data() + j * n;
        double sd = stats::stddev(std::span<const double>(col, n));
        if (!(sd > 0.0)) sd = 1.0;
        for (auto i : bad) col[i] += spec.defect_shift * sd;
    }

    LabelSet labels;
    for (const auto& lot : lots) labels.set(lot, Label::Good);
    std::vector<std::string> bad_ids, informative_ids;
    for (auto i : bad) {
        labels.set(lots[i], Label::Bad);
        bad_ids.push_back(lots[i]);
    }
    for (auto j : informative) informative_ids.push_back(params[j]);

    return SyntheticData{DataMatrix(std::move(lots), std::move(params), std::move(values)), std::move(labels),
                         std::move(informative_ids), std::move(bad_ids)};
}

}  // namespace ocfs
