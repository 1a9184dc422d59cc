#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bnps/categorical_data.hpp"
#include "bnps/dag.hpp"

namespace bnps {

/// Conditional probability table P(child | parents).
///
/// Stored row-major as `configurations() x cardinality()`; row j is the
/// distribution of the child under mixed-radix parent configuration j (last
/// parent fastest), matching column_counts().
class Cpt {
public:
    Cpt() = default;
    Cpt(int child, std::vector<int> parents, int cardinality, std::vector<int> parent_cardinalities,
        std::vector<double> table);

    int child() const { return child_; }
    const std::vector<int>& parents() const { return parents_; }
    int cardinality() const { return cardinality_; }
    const std::vector<int>& parent_cardinalities() const { return parent_cardinalities_; }
    int configurations() const { return configurations_; }
    const std::vector<double>& table() const { return table_; }

    std::span<const double> row(int config) const {
        return {table_.data() + static_cast<std::size_t>(config) * cardinality_,
                static_cast<std::size_t>(cardinality_)};
    }
    double prob(int config, int state) const {
        return table_[static_cast<std::size_t>(config) * cardinality_ + state];
    }

    /// Parent configuration selected by a full assignment indexed by node id.
    int config_of(std::span<const int> assignment) const;

    /// Throws if an entry leaves [0,1] or a row sum is off by more than `tol`.
    void validate(double tol) const;

    friend bool operator==(const Cpt&, const Cpt&) = default;

private:
    int child_ = 0;
    std::vector<int> parents_;
    int cardinality_ = 0;
    std::vector<int> parent_cardinalities_;
    int configurations_ = 1;
    std::vector<double> table_;
};

/// A DAG over categorical variables with one CPT per node.
class BayesianNetwork {
public:
    BayesianNetwork() = default;
    /// Validates that every CPT matches the DAG's parent lists and the
    /// variable cardinalities, and that rows sum to 1 within `row_tol`.
    BayesianNetwork(std::vector<VariableMeta> variables, Dag dag, std::vector<Cpt> cpts,
                    double row_tol = 1e-12);

    int node_count() const { return dag_.node_count(); }
    const std::vector<VariableMeta>& variables() const { return variables_; }
    const VariableMeta& variable(int v) const { return variables_.at(v); }
    const Dag& dag() const { return dag_; }
    const Cpt& cpt(int v) const { return cpts_.at(v); }
    const std::vector<Cpt>& cpts() const { return cpts_; }
    std::vector<std::string> names() const;
    int index_of(std::string_view name) const;

    friend bool operator==(const BayesianNetwork&, const BayesianNetwork&) = default;

private:
    std::vector<VariableMeta> variables_;
    Dag dag_;
    std::vector<Cpt> cpts_;
};

struct FitOptions {
    /// Added to every cell before normalising. With 0, unseen parent
    /// configurations fall back to the uniform row.
    double pseudo_count = 0.0;
};

BayesianNetwork fit_mle(const CategoricalDataset& data, const Dag& dag,
                        const FitOptions& options = {});

/// Sum over rows and nodes of log P(x_node | x_parents); -inf if any factor is 0.
double log_likelihood(const BayesianNetwork& bn, const CategoricalDataset& data);

struct BicScore {
    double total = 0.0;
    double log_likelihood = 0.0;
    std::int64_t parameters = 0;
    std::vector<double> families;
};

/// BIC of one family at its MLE: sum N_jk log(N_jk / N_j) - (r-1) q log(n) / 2.
double family_bic(const ContingencyTable& counts, std::size_t n);
double family_bic(const CategoricalDataset& data, int child, std::span<const int> parents);

/// logL - (d/2) log n, higher is better, with the per-family decomposition.
BicScore bic_score(const CategoricalDataset& data, const Dag& dag);

/// Forward sampling in topological order, inverse-CDF within each CPT row.
CategoricalDataset ancestral_sample(const BayesianNetwork& bn, std::size_t n, std::uint64_t seed);

/// P(target | every other node), using only the target's family and its
/// children's families. `evidence` holds one code per node; the target's own
/// entry is ignored. Throws a numeric error if no target state has support.
std::vector<double> conditional_distribution(const BayesianNetwork& bn, int target,
                                             std::span<const int> evidence);
double conditional_query(const BayesianNetwork& bn, int target, int target_state,
                         std::span<const int> evidence);

/// Throws unless `data` has the network's columns, in order, with the same
/// names and cardinalities.
void check_schema(const BayesianNetwork& bn, const CategoricalDataset& data);

}  // namespace bnps
