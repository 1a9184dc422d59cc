#include "bnps/categorical_data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "bnps/error.hpp"

namespace bnps {

int VariableMeta::state_index(std::string_view label) const {
    const auto it = std::find(states.begin(), states.end(), label);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

void VariableMeta::validate() const {
    if (states.size() < 2) fail_data(fmt::format("constant column '{}'", name));
    std::set<std::string_view> seen;
    for (const auto& s : states) {
        if (!seen.insert(s).second)
            fail_data(fmt::format("duplicate state '{}' in variable '{}'", s, name));
    }
}

CategoricalDataset::CategoricalDataset(std::vector<VariableMeta> variables,
                                       std::vector<std::vector<int>> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
    if (variables_.size() != columns_.size())
        fail_data(fmt::format("{} variables but {} columns", variables_.size(), columns_.size()));
    rows_ = columns_.empty() ? 0 : columns_.front().size();
    std::set<std::string_view> names;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        const auto& meta = variables_[c];
        meta.validate();
        if (!names.insert(meta.name).second)
            fail_data(fmt::format("duplicate column name '{}'", meta.name));
        if (columns_[c].size() != rows_)
            fail_data(fmt::format("column '{}' has {} rows, expected {}", meta.name,
                                  columns_[c].size(), rows_));
        const int r = meta.cardinality();
        for (std::size_t i = 0; i < rows_; ++i) {
            const int code = columns_[c][i];
            if (code < 0 || code >= r)
                fail_data(fmt::format("code {} out of range in column '{}' row {}", code,
                                      meta.name, i));
        }
    }
}

std::vector<int> CategoricalDataset::cardinalities() const {
    std::vector<int> out;
    out.reserve(variables_.size());
    for (const auto& v : variables_) out.push_back(v.cardinality());
    return out;
}

std::vector<std::string> CategoricalDataset::names() const {
    std::vector<std::string> out;
    out.reserve(variables_.size());
    for (const auto& v : variables_) out.push_back(v.name);
    return out;
}

std::optional<std::size_t> CategoricalDataset::find(std::string_view name) const {
    for (std::size_t c = 0; c < variables_.size(); ++c)
        if (variables_[c].name == name) return c;
    return std::nullopt;
}

std::size_t CategoricalDataset::index_of(std::string_view name) const {
    if (auto c = find(name)) return *c;
    fail_data(fmt::format("no column named '{}'", name));
}

CategoricalDataset CategoricalDataset::select(std::span<const std::size_t> cols) const {
    std::vector<VariableMeta> vars;
    std::vector<std::vector<int>> data;
    for (const auto c : cols) {
        vars.push_back(variables_.at(c));
        data.push_back(columns_.at(c));
    }
    return CategoricalDataset(std::move(vars), std::move(data));
}

std::vector<int> CategoricalDataset::row(std::size_t r) const {
    std::vector<int> out(cols());
    for (std::size_t c = 0; c < cols(); ++c) out[c] = columns_[c][r];
    return out;
}

std::vector<std::string> CategoricalDataset::decode_row(std::size_t r) const {
    std::vector<std::string> out(cols());
    for (std::size_t c = 0; c < cols(); ++c) out[c] = variables_[c].states[columns_[c][r]];
    return out;
}

CategoricalDataset encode_labels(const std::vector<std::string>& names,
                                 const std::vector<std::vector<std::string>>& rows) {
    const std::size_t p = names.size();
    std::vector<VariableMeta> vars(p);
    std::vector<std::vector<int>> columns(p, std::vector<int>(rows.size()));
    for (std::size_t c = 0; c < p; ++c) {
        std::set<std::string> distinct;
        for (const auto& row : rows) distinct.insert(row.at(c));
        vars[c].name = names[c];
        vars[c].states.assign(distinct.begin(), distinct.end());
        if (vars[c].states.size() < 2) fail_data(fmt::format("constant column '{}'", names[c]));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& states = vars[c].states;
            columns[c][i] = static_cast<int>(
                std::lower_bound(states.begin(), states.end(), rows[i][c]) - states.begin());
        }
    }
    return CategoricalDataset(std::move(vars), std::move(columns));
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool record_has_content = false;

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        // Skip blank lines.
        if (record_has_content || record.size() > 1 || !record.front().empty())
            records.push_back(std::move(record));
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            record_has_content = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') break;
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field.push_back(c);
        }
    }
    if (in_quotes) fail_data("unterminated quoted field");
    if (!field.empty() || !record.empty() || record_has_content) end_record();
    return records;
}

IngestResult ingest_csv_text(std::string_view text, const CsvOptions& options) {
    auto records = parse_csv_records(text);
    if (records.empty()) fail_data("empty file");

    std::vector<std::string> names;
    std::size_t first_data = 0;
    const std::size_t width = records.front().size();
    if (options.header) {
        names = records.front();
        first_data = 1;
    } else {
        for (std::size_t c = 0; c < width; ++c) names.push_back(fmt::format("V{}", c + 1));
    }
    if (records.size() <= first_data) fail_data("empty file");

    IngestResult result;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size() - first_data);
    for (std::size_t r = first_data; r < records.size(); ++r) {
        auto& rec = records[r];
        // Record numbers are 1-based positions in the file, header included.
        if (rec.size() != width) fail_data(fmt::format("ragged row {}", r + 1));
        const auto missing =
            std::find_if(rec.begin(), rec.end(), [](const std::string& s) { return s.empty(); });
        if (missing != rec.end()) {
            if (options.na_policy == NaPolicy::Fail)
                fail_data(fmt::format("missing value at row {} column '{}'", r + 1,
                                      names[missing - rec.begin()]));
            ++result.dropped_rows;
            continue;
        }
        rows.push_back(std::move(rec));
    }
    if (rows.empty()) fail_data("no complete rows");
    result.data = encode_labels(names, rows);
    return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return ingest_csv_text(buffer.str(), options);
}

namespace {

void write_field(std::ostream& out, const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        out << s;
        return;
    }
    out << '"';
    for (const char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

void write_csv(std::ostream& out, const CategoricalDataset& data) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
        if (c) out << ',';
        write_field(out, data.variable(c).name);
    }
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c) out << ',';
            write_field(out, data.variable(c).states[data.at(r, c)]);
        }
        out << '\n';
    }
}

std::int64_t ContingencyTable::config_total(int config) const {
    const auto first = counts.begin() + static_cast<std::ptrdiff_t>(config) * child_cardinality;
    return std::accumulate(first, first + child_cardinality, std::int64_t{0});
}

std::int64_t ContingencyTable::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

int configuration_index(std::span<const int> parent_codes, std::span<const int> radices) {
    int index = 0;
    for (std::size_t i = 0; i < parent_codes.size(); ++i) index = index * radices[i] + parent_codes[i];
    return index;
}

ContingencyTable column_counts(const CategoricalDataset& data, std::size_t child,
                               std::span<const std::size_t> parents) {
    if (child >= data.cols()) fail_usage(fmt::format("column id {} out of range", child));
    std::set<std::size_t> seen{child};
    for (const auto p : parents) {
        if (p >= data.cols()) fail_usage(fmt::format("column id {} out of range", p));
        if (!seen.insert(p).second) fail_usage(fmt::format("duplicate column id {}", p));
    }

    ContingencyTable table;
    table.child_cardinality = data.variable(child).cardinality();
    for (const auto p : parents) {
        table.parent_cardinalities.push_back(data.variable(p).cardinality());
        table.configurations *= table.parent_cardinalities.back();
    }
    table.counts.assign(static_cast<std::size_t>(table.configurations) * table.child_cardinality, 0);

    const auto child_col = data.column(child);
    const std::size_t n = data.rows();
    if (parents.empty()) {
        for (std::size_t i = 0; i < n; ++i) ++table.counts[child_col[i]];
        return table;
    }

    std::vector<int> config(n, 0);
    for (std::size_t k = 0; k < parents.size(); ++k) {
        const auto col = data.column(parents[k]);
        const int radix = table.parent_cardinalities[k];
        for (std::size_t i = 0; i < n; ++i) config[i] = config[i] * radix + col[i];
    }
    const int r = table.child_cardinality;
    for (std::size_t i = 0; i < n; ++i)
        ++table.counts[static_cast<std::size_t>(config[i]) * r + child_col[i]];
    return table;
}

}  // namespace bnps
