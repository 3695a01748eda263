#pragma once

#include "ocfs/error.hpp"
#include "ocfs/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ocfs {

// Read-only projection of one column of a DataMatrix.
struct ColumnView {
    std::string_view param_id;
    std::span<const double> samples;

    std::size_t size() const noexcept { return samples.size(); }
};

// Lots x parameters table of finite doubles. Immutable once built; values are
// stored column-major because every selection method walks columns.
class DataMatrix {
  public:
    DataMatrix(std::vector<std::string> lot_ids,
               std::vector<std::string> param_ids,
               std::vector<double> column_major)
      : lot_ids_{std::move(lot_ids)}
      , param_ids_{std::move(param_ids)}
      , values_{std::move(column_major)} {
        require(!lot_ids_.empty(), Errc::EmptyData, "matrix has no lots");
        require(!param_ids_.empty(), Errc::EmptyData, "matrix has no parameters");
        require(values_.size() == lot_ids_.size() * param_ids_.size(), Errc::DimMismatch,
                "value count does not match lot/param dimensions");
        for (double v : values_) require(std::isfinite(v), Errc::InvalidArgument, "non-finite value stored");
        index_ = build_index(param_ids_, "parameter");
        build_index(lot_ids_, "lot");
    }

    // Row-major convenience constructor; rows = lots.
    static DataMatrix from_rows(std::vector<std::string> lot_ids,
                                std::vector<std::string> param_ids,
                                const Matrix& rows) {
        require(rows.rows() == lot_ids.size() && rows.cols() == param_ids.size(), Errc::DimMismatch,
                "row matrix does not match id lengths");
        std::vector<double> cm(rows.rows() * rows.cols());
        for (std::size_t r = 0; r < rows.rows(); ++r)
            for (std::size_t c = 0; c < rows.cols(); ++c) cm[c * rows.rows() + r] = rows(r, c);
        return DataMatrix(std::move(lot_ids), std::move(param_ids), std::move(cm));
    }

    std::size_t n_lots() const noexcept { return lot_ids_.size(); }
    std::size_t n_params() const noexcept { return param_ids_.size(); }
    const std::vector<std::string>& lot_ids() const noexcept { return lot_ids_; }
    const std::vector<std::string>& param_ids() const noexcept { return param_ids_; }

    double value(std::size_t lot, std::size_t param) const noexcept { return values_[param * n_lots() + lot]; }

    std::span<const double> column(std::size_t param) const noexcept {
        return {values_.data() + param * n_lots(), n_lots()};
    }

    ColumnView column_view(std::size_t param) const noexcept { return {param_ids_[param], column(param)}; }

    std::optional<std::size_t> find_param(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t param_index(std::string_view id) const {
        auto idx = find_param(id);
        if (!idx) fail(Errc::UnknownParam, "unknown parameter '" + std::string(id) + "'");
        return *idx;
    }

    std::vector<double> row(std::size_t lot) const {
        std::vector<double> r(n_params());
        for (std::size_t c = 0; c < n_params(); ++c) r[c] = value(lot, c);
        return r;
    }

    // Rows = lots, in the given column order.
    Matrix rows(std::span<const std::size_t> params) const {
        Matrix out(n_lots(), params.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto col = column(params[k]);
            for (std::size_t r = 0; r < n_lots(); ++r) out(r, k) = col[r];
        }
        return out;
    }

    // Sub-matrix of the given lots, all columns.
    DataMatrix select_lots(std::span<const std::size_t> lots) const {
        require(!lots.empty(), Errc::EmptyData, "no lots selected");
        std::vector<std::string> ids;
        ids.reserve(lots.size());
        for (auto l : lots) ids.push_back(lot_ids_.at(l));
        std::vector<double> cm;
        cm.reserve(lots.size() * n_params());
        for (std::size_t c = 0; c < n_params(); ++c)
            for (auto l : lots) cm.push_back(value(l, c));
        return DataMatrix(std::move(ids), param_ids_, std::move(cm));
    }

    const std::vector<double>& column_major() const noexcept { return values_; }

    friend bool operator==(const DataMatrix& a, const DataMatrix& b) {
        return a.lot_ids_ == b.lot_ids_ && a.param_ids_ == b.param_ids_ && a.values_ == b.values_;
    }

  private:
    static std::unordered_map<std::string, std::size_t> build_index(const std::vector<std::string>& ids,
                                                                    const char* what) {
        std::unordered_map<std::string, std::size_t> idx;
        idx.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!idx.emplace(ids[i], i).second)
                fail(Errc::MalformedCsv, std::string("duplicate ") + what + " id '" + ids[i] + "'");
        }
        return idx;
    }

    std::vector<std::string> lot_ids_;
    std::vector<std::string> param_ids_;
    std::vector<double> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline ColumnView column(const DataMatrix& m, std::string_view param_id) {
    return m.column_view(m.param_index(param_id));
}

// Keeps the listed parameters in their original relative order.
inline DataMatrix restrict(const DataMatrix& m, const std::set<std::string>& keep) {
    require(!keep.empty(), Errc::EmptySelection, "restrict called with an empty selection");
    std::vector<bool> mask(m.n_params(), false);
    for (const auto& id : keep) mask[m.param_index(id)] = true;
    std::vector<std::string> ids;
    std::vector<double> cm;
    cm.reserve(keep.size() * m.n_lots());
    for (std::size_t c = 0; c < m.n_params(); ++c) {
        if (!mask[c]) continue;
        ids.push_back(m.param_ids()[c]);
        auto col = m.column(c);
        cm.insert(cm.end(), col.begin(), col.end());
    }
    return DataMatrix(m.lot_ids(), std::move(ids), std::move(cm));
}

enum class Label { Good, Bad };

// Ground truth for evaluation. Production data usually has none.
class LabelSet {
  public:
    LabelSet() = default;
    explicit LabelSet(std::map<std::string, Label> labels) : labels_{std::move(labels)} {}

    void set(const std::string& lot, Label l) { labels_[lot] = l; }
    std::optional<Label> get(const std::string& lot) const {
        auto it = labels_.find(lot);
        if (it == labels_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t size() const noexcept { return labels_.size(); }
    const std::map<std::string, Label>& entries() const noexcept { return labels_; }

    std::set<std::string> bad_lots() const {
        std::set<std::string> out;
        for (const auto& [lot, l] : labels_)
            if (l == Label::Bad) out.insert(lot);
        return out;
    }

    void check_against(const DataMatrix& m) const {
        std::set<std::string_view> lots(m.lot_ids().begin(), m.lot_ids().end());
        for (const auto& [lot, l] : labels_)
            require(lots.contains(lot), Errc::MissingLabels, "label for unknown lot '" + lot + "'");
    }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

  private:
    std::map<std::string, Label> labels_;
};

}  // namespace ocfs
