#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnps {

/// A categorical variable: a name and its ordered, distinct state labels.
struct VariableMeta {
    std::string name;
    std::vector<std::string> states;

    int cardinality() const { return static_cast<int>(states.size()); }

    /// Index of `label` in `states`, or -1.
    int state_index(std::string_view label) const;

    /// Throws unless the labels are unique and there are at least two.
    void validate() const;

    friend bool operator==(const VariableMeta&, const VariableMeta&) = default;
};

/// Column-major matrix of state codes with per-column metadata.
///
/// Every cell is a 0-based index into its column's state list. Instances are
/// immutable once constructed; the constructor checks all invariants.
class CategoricalDataset {
public:
    CategoricalDataset() = default;
    CategoricalDataset(std::vector<VariableMeta> variables, std::vector<std::vector<int>> columns);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return variables_.size(); }

    const std::vector<VariableMeta>& variables() const { return variables_; }
    const VariableMeta& variable(std::size_t col) const { return variables_.at(col); }
    std::span<const int> column(std::size_t col) const { return columns_.at(col); }
    int at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

    std::vector<int> cardinalities() const;
    std::vector<std::string> names() const;

    std::optional<std::size_t> find(std::string_view name) const;
    /// Like find() but throws a data error naming the missing column.
    std::size_t index_of(std::string_view name) const;

    /// New dataset holding the listed columns in the listed order.
    CategoricalDataset select(std::span<const std::size_t> cols) const;

    std::vector<int> row(std::size_t r) const;
    std::vector<std::string> decode_row(std::size_t r) const;

    friend bool operator==(const CategoricalDataset&, const CategoricalDataset&) = default;

private:
    std::vector<VariableMeta> variables_;
    std::vector<std::vector<int>> columns_;
    std::size_t rows_ = 0;
};

/// Builds a dataset from raw labels (row-major), coding each column by the
/// lexicographic order of its distinct labels.
CategoricalDataset encode_labels(const std::vector<std::string>& names,
                                 const std::vector<std::vector<std::string>>& rows);

enum class NaPolicy { Fail, DropRow };

struct CsvOptions {
    bool header = true;
    NaPolicy na_policy = NaPolicy::Fail;
};

struct IngestResult {
    CategoricalDataset data;
    std::size_t dropped_rows = 0;
};

IngestResult ingest_csv(const std::filesystem::path& path, const CsvOptions& options = {});
IngestResult ingest_csv_text(std::string_view text, const CsvOptions& options = {});

/// Writes a header row and one labeled row per record, quoting as needed.
void write_csv(std::ostream& out, const CategoricalDataset& data);

/// Splits CSV text into records of fields (RFC 4180 quoting, LF or CRLF).
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

/// N_ijk for one family: `counts[j * child_cardinality + k]` counts rows with
/// parent configuration j and child state k. Configurations are mixed-radix
/// over the parent codes with the last parent varying fastest.
struct ContingencyTable {
    int child_cardinality = 0;
    std::vector<int> parent_cardinalities;
    int configurations = 1;
    std::vector<std::int64_t> counts;

    std::int64_t at(int config, int state) const {
        return counts[static_cast<std::size_t>(config) * child_cardinality + state];
    }
    std::int64_t config_total(int config) const;
    std::int64_t total() const;
};

ContingencyTable column_counts(const CategoricalDataset& data, std::size_t child,
                               std::span<const std::size_t> parents);

/// Mixed-radix index of a parent assignment, last position fastest.
int configuration_index(std::span<const int> parent_codes, std::span<const int> radices);

}  // namespace bnps
