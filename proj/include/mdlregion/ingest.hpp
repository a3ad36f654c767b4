#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mdlregion/symbol_matrix.hpp"

namespace mdlregion {

/// Raw spatiotemporal data as loaded from disk, before gap filling and
/// discretization. Row-major N x T like SymbolMatrix. `values` holds the
/// numeric parse of each cell (NaN where the cell is missing or does not
/// parse as a finite number); `cells` holds the trimmed field text (""
/// where missing), which is what the categorical pipeline consumes.
struct RawSeriesTable {
    std::vector<std::string> site_ids;                 // N
    std::vector<std::array<double, 2>> coordinates;    // N pairs (x, y)
    std::vector<std::string> timestamps;               // T ordered labels
    std::vector<double> values;                        // N*T, NaN = missing
    std::vector<std::string> cells;                    // N*T, "" = missing

    std::size_t n_sites() const { return site_ids.size(); }
    std::size_t series_length() const { return timestamps.size(); }

    double value(std::size_t i, std::size_t t) const {
        return values[i * series_length() + t];
    }
    const std::string& cell(std::size_t i, std::size_t t) const {
        return cells[i * series_length() + t];
    }

    bool is_missing(std::size_t i, std::size_t t) const {
        return cell(i, t).empty();
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Splits one CSV record. Handles double-quoted fields with "" escapes;
/// the caller strips any trailing '\r' beforehand.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error("CSV: unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string read_line_crlf(std::istream& in, bool& ok) {
    std::string line;
    ok = static_cast<bool>(std::getline(in, line));
    if (ok && !line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

/// A cell is missing when empty or the literal NA (after trimming).
inline bool cell_is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA";
}

inline double parse_cell_value(const std::string& cell) {
    if (cell_is_missing(cell)) return std::numeric_limits<double>::quiet_NaN();
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + cell.size() || !std::isfinite(v))
        return std::numeric_limits<double>::quiet_NaN();
    return v;
}

inline double parse_coordinate(const std::string& field, const std::string& what,
                               std::size_t line_no) {
    const char* begin = field.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size() || !std::isfinite(v))
        throw std::runtime_error("CSV line " + std::to_string(line_no) + ": bad " +
                                 what + " coordinate '" + field + "'");
    return v;
}

inline void check_distinct_ids(const std::vector<std::string>& ids) {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            throw std::runtime_error("CSV: duplicate site id '" + id + "'");
}

inline void check_distinct_timestamps(const std::vector<std::string>& ts) {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : ts)
        if (!seen.insert(t).second)
            throw std::runtime_error("CSV: duplicate timestamp label '" + t + "'");
}

}  // namespace detail

/// Reads the wide layout: header `id,x,y,t1,...,tT`, one row per site.
/// Missing observations are empty fields or the literal `NA`.
inline RawSeriesTable read_wide_csv(std::istream& in) {
    bool ok = false;
    std::string header = detail::read_line_crlf(in, ok);
    if (!ok) throw std::runtime_error("CSV: empty input");
    auto cols = detail::split_csv_line(header);
    if (cols.size() < 4 || detail::trim(cols[0]) != "id" ||
        detail::trim(cols[1]) != "x" || detail::trim(cols[2]) != "y")
        throw std::runtime_error("CSV: wide header must be id,x,y,t1,...,tT");

    RawSeriesTable table;
    table.timestamps.assign(cols.begin() + 3, cols.end());
    for (auto& t : table.timestamps) t = detail::trim(t);
    detail::check_distinct_timestamps(table.timestamps);

    const std::size_t t_len = table.timestamps.size();
    std::size_t line_no = 1;
    for (;;) {
        std::string line = detail::read_line_crlf(in, ok);
        if (!ok) break;
        ++line_no;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 3 + t_len)
            throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(3 + t_len) + " fields, got " +
                                     std::to_string(fields.size()));
        table.site_ids.push_back(detail::trim(fields[0]));
        table.coordinates.push_back({detail::parse_coordinate(detail::trim(fields[1]), "x", line_no),
                                     detail::parse_coordinate(detail::trim(fields[2]), "y", line_no)});
        for (std::size_t t = 0; t < t_len; ++t) {
            std::string cell = detail::trim(fields[3 + t]);
            if (detail::cell_is_missing(cell)) cell.clear();
            table.values.push_back(detail::parse_cell_value(cell));
            table.cells.push_back(std::move(cell));
        }
    }
    if (table.site_ids.empty()) throw std::runtime_error("CSV: no data rows");
    detail::check_distinct_ids(table.site_ids);
    return table;
}

/// Reads the long layout: header `id,x,y,timestamp,value`, one observation
/// per row. Sites keep first-appearance order; timestamps are sorted by
/// label. A repeated (id, timestamp) pair is an error; absent pairs are
/// missing observations.
inline RawSeriesTable read_long_csv(std::istream& in) {
    bool ok = false;
    std::string header = detail::read_line_crlf(in, ok);
    if (!ok) throw std::runtime_error("CSV: empty input");
    auto cols = detail::split_csv_line(header);
    for (auto& c : cols) c = detail::trim(c);
    if (cols.size() != 5 || cols[0] != "id" || cols[1] != "x" || cols[2] != "y" ||
        cols[3] != "timestamp" || cols[4] != "value")
        throw std::runtime_error("CSV: long header must be id,x,y,timestamp,value");

    std::vector<std::string> site_ids;
    std::vector<std::array<double, 2>> coords;
    std::unordered_map<std::string, std::size_t> site_index;
    std::map<std::string, std::size_t> timestamp_index;  // sorted by label
    std::vector<std::pair<std::pair<std::size_t, std::string>, std::string>> obs;

    std::size_t line_no = 1;
    for (;;) {
        std::string line = detail::read_line_crlf(in, ok);
        if (!ok) break;
        ++line_no;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 5)
            throw std::runtime_error("CSV line " + std::to_string(line_no) +
                                     ": expected 5 fields, got " + std::to_string(fields.size()));
        std::string id = detail::trim(fields[0]);
        double x = detail::parse_coordinate(detail::trim(fields[1]), "x", line_no);
        double y = detail::parse_coordinate(detail::trim(fields[2]), "y", line_no);
        std::string ts = detail::trim(fields[3]);
        std::string cell = detail::trim(fields[4]);
        if (detail::cell_is_missing(cell)) cell.clear();

        auto [it, inserted] = site_index.try_emplace(id, site_ids.size());
        if (inserted) {
            site_ids.push_back(id);
            coords.push_back({x, y});
        } else if (coords[it->second][0] != x || coords[it->second][1] != y) {
            throw std::runtime_error("CSV line " + std::to_string(line_no) +
                                     ": site '" + id + "' repeated with different coordinates");
        }
        timestamp_index.try_emplace(ts, 0);
        obs.push_back({{it->second, ts}, std::move(cell)});
    }
    if (site_ids.empty()) throw std::runtime_error("CSV: no data rows");

    std::size_t t_idx = 0;
    for (auto& [ts, idx] : timestamp_index) idx = t_idx++;

    RawSeriesTable table;
    table.site_ids = std::move(site_ids);
    table.coordinates = std::move(coords);
    table.timestamps.resize(timestamp_index.size());
    for (const auto& [ts, idx] : timestamp_index) table.timestamps[idx] = ts;

    const std::size_t n = table.site_ids.size();
    const std::size_t t_len = table.timestamps.size();
    table.cells.assign(n * t_len, std::string{});
    table.values.assign(n * t_len, std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> filled(n * t_len, false);
    for (auto& [key, cell] : obs) {
        std::size_t pos = key.first * t_len + timestamp_index.at(key.second);
        if (filled[pos])
            throw std::runtime_error("CSV: duplicate observation for site '" +
                                     table.site_ids[key.first] + "' at timestamp '" +
                                     key.second + "'");
        filled[pos] = true;
        table.values[pos] = detail::parse_cell_value(cell);
        table.cells[pos] = std::move(cell);
    }
    return table;
}

/// Reads either CSV layout, dispatching on the header: exactly
/// `id,x,y,timestamp,value` selects the long reader, anything else the
/// wide reader.
inline RawSeriesTable read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("CSV: empty input: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    auto cols = detail::split_csv_line(header);
    for (auto& c : cols) c = detail::trim(c);
    bool is_long = cols.size() == 5 && cols[3] == "timestamp" && cols[4] == "value";
    in.clear();
    in.seekg(0);
    return is_long ? read_long_csv(in) : read_wide_csv(in);
}

/// Drops sites whose observed fraction is below min_fraction (>= keeps).
/// Removed ids are appended to *removed_ids when given. Throws if every
/// site is removed.
inline RawSeriesTable filter_completeness(const RawSeriesTable& table,
                                          double min_fraction = 0.8,
                                          std::vector<std::string>* removed_ids = nullptr) {
    if (!(min_fraction > 0.0) || min_fraction > 1.0)
        throw std::invalid_argument("filter_completeness: min_fraction must be in (0, 1]");
    const std::size_t t_len = table.series_length();
    if (t_len == 0) throw std::invalid_argument("filter_completeness: empty table");

    RawSeriesTable out;
    out.timestamps = table.timestamps;
    for (std::size_t i = 0; i < table.n_sites(); ++i) {
        std::size_t observed = 0;
        for (std::size_t t = 0; t < t_len; ++t)
            if (!table.is_missing(i, t)) ++observed;
        double fraction = static_cast<double>(observed) / static_cast<double>(t_len);
        if (fraction < min_fraction) {
            if (removed_ids) removed_ids->push_back(table.site_ids[i]);
            continue;
        }
        out.site_ids.push_back(table.site_ids[i]);
        out.coordinates.push_back(table.coordinates[i]);
        for (std::size_t t = 0; t < t_len; ++t) {
            out.values.push_back(table.value(i, t));
            out.cells.push_back(table.cell(i, t));
        }
    }
    if (out.site_ids.empty())
        throw std::runtime_error("filter_completeness: no site meets the threshold");
    return out;
}

/// Fills gaps in the numeric values: interior runs of NaN are linearly
/// interpolated on the timestamp index, leading/trailing runs copy the
/// nearest observed value. Cells are left untouched; the numeric pipeline
/// reads values only. Throws when a row has no observed value at all.
/// Idempotent on complete tables.
inline RawSeriesTable interpolate_missing(const RawSeriesTable& table) {
    RawSeriesTable out = table;
    const std::size_t t_len = table.series_length();
    for (std::size_t i = 0; i < table.n_sites(); ++i) {
        double* row = out.values.data() + i * t_len;
        std::vector<std::size_t> observed;
        for (std::size_t t = 0; t < t_len; ++t)
            if (!std::isnan(row[t])) observed.push_back(t);
        if (observed.empty())
            throw std::runtime_error("interpolate_missing: site '" + table.site_ids[i] +
                                     "' has no observed values");
        for (std::size_t t = 0; t < observed.front(); ++t) row[t] = row[observed.front()];
        for (std::size_t t = observed.back() + 1; t < t_len; ++t) row[t] = row[observed.back()];
        for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
            std::size_t a = observed[k], b = observed[k + 1];
            for (std::size_t t = a + 1; t < b; ++t) {
                double w = static_cast<double>(t - a) / static_cast<double>(b - a);
                row[t] = row[a] + w * (row[b] - row[a]);
            }
        }
    }
    return out;
}

/// Uniform binning into {1..S} with the global range over all entries:
///   symbol = round((x - x_min) / (x_max - x_min + eps) * (S - 1)) + 1
/// where eps = 1e-9 * range (1e-9 when the range is zero) keeps x_max
/// strictly inside the top bin. Rounding is round-half-to-even. A constant
/// table maps everything to 1 and sets *constant_warning. Monotone in x.
inline SymbolMatrix discretize_uniform(const RawSeriesTable& table, int alphabet_size,
                                       bool* constant_warning = nullptr) {
    if (alphabet_size < 2 || alphabet_size > 255)
        throw std::invalid_argument("discretize_uniform: alphabet size must be in [2, 255]");
    const std::size_t n = table.n_sites();
    const std::size_t t_len = table.series_length();
    if (n == 0 || t_len == 0) throw std::invalid_argument("discretize_uniform: empty table");

    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < t_len; ++t) {
            double v = table.value(i, t);
            if (std::isnan(v))
                throw std::runtime_error("discretize_uniform: missing value at site '" +
                                         table.site_ids[i] + "', timestamp '" +
                                         table.timestamps[t] + "'");
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }

    const double range = x_max - x_min;
    if (constant_warning) *constant_warning = (range == 0.0);
    const double eps = range > 0.0 ? 1e-9 * range : 1e-9;
    const double scale = static_cast<double>(alphabet_size - 1) / (range + eps);

    SymbolMatrix z(n, t_len, alphabet_size);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < t_len; ++t) {
            double bin = std::nearbyint((table.value(i, t) - x_min) * scale);
            z(i, t) = static_cast<Symbol>(bin + 1.0);
        }
    z.validate();
    return z;
}

/// Maps categorical cells to symbols by position in category_order
/// (first category becomes 1). Cells are matched after trimming, exactly.
/// Missing or unrecognized cells are errors naming the offending value.
inline SymbolMatrix passthrough_categorical(const RawSeriesTable& table,
                                            const std::vector<std::string>& category_order) {
    if (category_order.size() < 2 || category_order.size() > 255)
        throw std::invalid_argument("passthrough_categorical: need 2 to 255 categories");
    std::unordered_map<std::string_view, Symbol> index;
    for (std::size_t k = 0; k < category_order.size(); ++k)
        if (!index.try_emplace(category_order[k], static_cast<Symbol>(k + 1)).second)
            throw std::invalid_argument("passthrough_categorical: duplicate category '" +
                                        category_order[k] + "'");

    const std::size_t n = table.n_sites();
    const std::size_t t_len = table.series_length();
    if (n == 0 || t_len == 0) throw std::invalid_argument("passthrough_categorical: empty table");
    SymbolMatrix z(n, t_len, static_cast<int>(category_order.size()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < t_len; ++t) {
            const std::string& cell = table.cell(i, t);
            if (cell.empty())
                throw std::runtime_error("passthrough_categorical: missing value at site '" +
                                         table.site_ids[i] + "', timestamp '" +
                                         table.timestamps[t] + "'");
            auto it = index.find(cell);
            if (it == index.end())
                throw std::runtime_error("passthrough_categorical: unknown category '" + cell +
                                         "' at site '" + table.site_ids[i] + "'");
            z(i, t) = it->second;
        }
    return z;
}

/// Reads one category label per line, trimmed, skipping blank lines.
inline std::vector<std::string> read_category_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::string> categories;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = detail::trim(line);
        if (!t.empty()) categories.push_back(std::move(t));
    }
    return categories;
}

}  // namespace mdlregion
