#pragma once

#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/stats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ocfs {

struct IngestOptions {
    // Empty cells are replaced by the column median; off -> NonNumericCell.
    bool impute_missing = true;
};

namespace csv {

// Shortest representation that parses back to the same double.
inline std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits one record on commas. Double-quoted fields may contain commas and
// doubled quotes; no multi-line fields.
inline std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (quoted) fail(Errc::MalformedCsv, "unterminated quoted field");
    out.emplace_back(trim(cur));
    return out;
}

inline std::string quote_if_needed(const std::string& field) {
    if (field.find_first_of(",\"") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q.push_back('"');
        q.push_back(c);
    }
    q.push_back('"');
    return q;
}

inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        fail(Errc::NonNumericCell, "cannot parse '" + std::string(s) + "' as a finite number");
    return v;
}

// Reads data lines, skipping blank lines and '#' comment lines.
inline std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::Io, "cannot open '" + path + "' for writing");
    return out;
}

}  // namespace csv

inline DataMatrix parse_csv(std::istream& in, const IngestOptions& opts = {}) {
    const auto lines = csv::read_lines(in);
    require(!lines.empty(), Errc::EmptyData, "no header row");
    auto header = csv::split_record(lines.front());
    require(header.size() >= 2, Errc::EmptyData, "no data columns");
    std::vector<std::string> params(header.begin() + 1, header.end());
    {
        std::set<std::string> seen;
        for (const auto& p : params) {
            require(!p.empty(), Errc::MalformedCsv, "empty parameter id in header");
            require(seen.insert(p).second, Errc::MalformedCsv, "duplicate header '" + p + "'");
        }
    }
    const std::size_t n_rows = lines.size() - 1;
    require(n_rows > 0, Errc::EmptyData, "no data rows");
    const std::size_t n_cols = params.size();

    std::vector<std::string> lots;
    lots.reserve(n_rows);
    std::vector<std::optional<double>> cells(n_rows * n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        auto fields = csv::split_record(lines[r + 1]);
        if (fields.size() != n_cols + 1)
            fail(Errc::MalformedCsv, "row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                                        " fields, expected " + std::to_string(n_cols + 1));
        lots.push_back(fields.front());
        for (std::size_t c = 0; c < n_cols; ++c) {
            auto v = csv::parse_real(fields[c + 1]);
            if (!v && !opts.impute_missing)
                fail(Errc::NonNumericCell, "missing cell at row " + std::to_string(r + 1) + ", column '" +
                                               params[c] + "'");
            cells[c * n_rows + r] = v;
        }
    }

    std::vector<double> values(n_rows * n_cols);
    std::vector<double> present;
    for (std::size_t c = 0; c < n_cols; ++c) {
        present.clear();
        for (std::size_t r = 0; r < n_rows; ++r)
            if (auto v = cells[c * n_rows + r]) present.push_back(*v);
        require(!present.empty(), Errc::EmptyData, "column '" + params[c] + "' has no values");
        const double fill = present.size() < n_rows ? stats::median(present) : 0.0;
        for (std::size_t r = 0; r < n_rows; ++r) values[c * n_rows + r] = cells[c * n_rows + r].value_or(fill);
    }
    return DataMatrix(std::move(lots), std::move(params), std::move(values));
}

inline DataMatrix load_csv(const std::string& path, const IngestOptions& opts = {}) {
    auto in = csv::open_in(path);
    return parse_csv(in, opts);
}

inline void write_csv(std::ostream& out, const DataMatrix& m) {
    out << "lot";
    for (const auto& p : m.param_ids()) out << ',' << csv::quote_if_needed(p);
    out << '\n';
    for (std::size_t r = 0; r < m.n_lots(); ++r) {
        out << csv::quote_if_needed(m.lot_ids()[r]);
        for (std::size_t c = 0; c < m.n_params(); ++c) out << ',' << csv::format_real(m.value(r, c));
        out << '\n';
    }
}

inline void save_csv(const std::string& path, const DataMatrix& m) {
    auto out = csv::open_out(path);
    write_csv(out, m);
}

inline LabelSet parse_labels(std::istream& in) {
    const auto lines = csv::read_lines(in);
    require(!lines.empty(), Errc::EmptyData, "label file has no header");
    LabelSet labels;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = csv::split_record(lines[i]);
        require(f.size() == 2, Errc::MalformedCsv, "label row " + std::to_string(i) + " must have 2 fields");
        Label l;
        if (f[1] == "GOOD") l = Label::Good;
        else if (f[1] == "BAD") l = Label::Bad;
        else fail(Errc::MalformedCsv, "label must be GOOD or BAD, got '" + f[1] + "'");
        require(!labels.get(f[0]).has_value(), Errc::MalformedCsv, "duplicate label for lot '" + f[0] + "'");
        labels.set(f[0], l);
    }
    return labels;
}

inline LabelSet load_labels(const std::string& path) {
    auto in = csv::open_in(path);
    return parse_labels(in);
}

// Labels in matrix lot order.
inline void write_labels(std::ostream& out, const DataMatrix& m, const LabelSet& labels) {
    out << "lot,label\n";
    for (const auto& lot : m.lot_ids()) {
        auto l = labels.get(lot);
        require(l.has_value(), Errc::MissingLabels, "no label for lot '" + lot + "'");
        out << csv::quote_if_needed(lot) << ',' << (*l == Label::Bad ? "BAD" : "GOOD") << '\n';
    }
}

// Newline-delimited id lists (selected feature sets, flagged lots).
inline std::vector<std::string> parse_id_list(std::istream& in) {
    std::vector<std::string> ids;
    for (auto& line : csv::read_lines(in)) ids.emplace_back(csv::trim(line));
    return ids;
}

inline std::vector<std::string> load_id_list(const std::string& path) {
    auto in = csv::open_in(path);
    return parse_id_list(in);
}

template <typename Range>
void write_id_list(std::ostream& out, const Range& ids) {
    for (const auto& id : ids) out << id << '\n';
}

}  // namespace ocfs
