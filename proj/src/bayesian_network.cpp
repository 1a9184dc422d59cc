#include "bnps/bayesian_network.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bnps/error.hpp"
#include "bnps/random.hpp"

namespace bnps {

Cpt::Cpt(int child, std::vector<int> parents, int cardinality,
         std::vector<int> parent_cardinalities, std::vector<double> table)
    : child_(child),
      parents_(std::move(parents)),
      cardinality_(cardinality),
      parent_cardinalities_(std::move(parent_cardinalities)),
      table_(std::move(table)) {
    if (parents_.size() != parent_cardinalities_.size())
        fail_data(fmt::format("cpt of node {}: parent/radix length mismatch", child_));
    if (cardinality_ < 2) fail_data(fmt::format("cpt of node {}: cardinality < 2", child_));
    for (const int r : parent_cardinalities_) configurations_ *= r;
    if (table_.size() != static_cast<std::size_t>(configurations_) * cardinality_)
        fail_data(fmt::format("cpt of node {}: expected {}x{} entries, got {}", child_,
                              configurations_, cardinality_, table_.size()));
}

int Cpt::config_of(std::span<const int> assignment) const {
    int index = 0;
    for (std::size_t i = 0; i < parents_.size(); ++i)
        index = index * parent_cardinalities_[i] + assignment[parents_[i]];
    return index;
}

void Cpt::validate(double tol) const {
    for (int j = 0; j < configurations_; ++j) {
        double sum = 0.0;
        for (const double p : row(j)) {
            if (!(p >= 0.0 && p <= 1.0))
                fail_data(fmt::format("cpt of node {}: entry {} outside [0,1]", child_, p));
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            fail_data(fmt::format("cpt of node {}: row {} sums to {:.15g}", child_, j, sum));
    }
}

BayesianNetwork::BayesianNetwork(std::vector<VariableMeta> variables, Dag dag,
                                 std::vector<Cpt> cpts, double row_tol)
    : variables_(std::move(variables)), dag_(std::move(dag)), cpts_(std::move(cpts)) {
    const int n = dag_.node_count();
    if (static_cast<int>(variables_.size()) != n || static_cast<int>(cpts_.size()) != n)
        fail_data("network: variable, node and cpt counts differ");
    for (const auto& v : variables_) v.validate();
    for (int v = 0; v < n; ++v) {
        const Cpt& cpt = cpts_[v];
        if (cpt.child() != v) fail_data(fmt::format("cpt {} is for node {}", v, cpt.child()));
        if (cpt.parents() != dag_.parents(v))
            fail_data(fmt::format("cpt of node {} disagrees with the dag's parent set", v));
        if (cpt.cardinality() != variables_[v].cardinality())
            fail_data(fmt::format("cpt of node {} has the wrong cardinality", v));
        for (std::size_t i = 0; i < cpt.parents().size(); ++i)
            if (cpt.parent_cardinalities()[i] != variables_[cpt.parents()[i]].cardinality())
                fail_data(fmt::format("cpt of node {} has a wrong parent radix", v));
        cpt.validate(row_tol);
    }
}

std::vector<std::string> BayesianNetwork::names() const {
    std::vector<std::string> out;
    for (const auto& v : variables_) out.push_back(v.name);
    return out;
}

int BayesianNetwork::index_of(std::string_view name) const {
    for (int v = 0; v < node_count(); ++v)
        if (variables_[v].name == name) return v;
    fail_data(fmt::format("network has no variable '{}'", name));
}

void check_schema(const BayesianNetwork& bn, const CategoricalDataset& data) {
    if (static_cast<int>(data.cols()) != bn.node_count())
        fail_data(fmt::format("schema mismatch: {} columns vs {} nodes", data.cols(),
                              bn.node_count()));
    for (int v = 0; v < bn.node_count(); ++v) {
        const auto& a = bn.variable(v);
        const auto& b = data.variable(v);
        if (a.name != b.name || a.cardinality() != b.cardinality())
            fail_data(fmt::format("schema mismatch at column {} ('{}' vs '{}')", v, a.name, b.name));
    }
}

namespace {

std::vector<std::size_t> as_columns(std::span<const int> ids) {
    return {ids.begin(), ids.end()};
}

}  // namespace

BayesianNetwork fit_mle(const CategoricalDataset& data, const Dag& dag, const FitOptions& options) {
    if (options.pseudo_count < 0.0) fail_usage("pseudo_count must be nonnegative");
    if (static_cast<int>(data.cols()) != dag.node_count())
        fail_data(fmt::format("dataset has {} columns but the dag has {} nodes", data.cols(),
                              dag.node_count()));
    std::vector<Cpt> cpts;
    cpts.reserve(dag.node_count());
    for (int v = 0; v < dag.node_count(); ++v) {
        const auto& parents = dag.parents(v);
        const auto cols = as_columns(parents);
        const auto counts = column_counts(data, v, cols);
        const int r = counts.child_cardinality;
        std::vector<double> table(counts.counts.size());
        for (int j = 0; j < counts.configurations; ++j) {
            const double denom = static_cast<double>(counts.config_total(j)) + r * options.pseudo_count;
            for (int k = 0; k < r; ++k) {
                const std::size_t cell = static_cast<std::size_t>(j) * r + k;
                table[cell] = denom > 0.0
                                  ? (static_cast<double>(counts.counts[cell]) + options.pseudo_count) / denom
                                  : 1.0 / r;
            }
        }
        cpts.emplace_back(v, parents, r, counts.parent_cardinalities, std::move(table));
    }
    return BayesianNetwork(data.variables(), dag, std::move(cpts));
}

double log_likelihood(const BayesianNetwork& bn, const CategoricalDataset& data) {
    check_schema(bn, data);
    double total = 0.0;
    std::vector<int> assignment(bn.node_count());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (int v = 0; v < bn.node_count(); ++v) assignment[v] = data.at(i, v);
        for (int v = 0; v < bn.node_count(); ++v) {
            const Cpt& cpt = bn.cpt(v);
            const double p = cpt.prob(cpt.config_of(assignment), assignment[v]);
            if (p == 0.0) return -std::numeric_limits<double>::infinity();
            total += std::log(p);
        }
    }
    return total;
}

double family_bic(const ContingencyTable& counts, std::size_t n) {
    if (n == 0) fail_data("BIC needs at least one row");
    const int r = counts.child_cardinality;
    double loglik = 0.0;
    for (int j = 0; j < counts.configurations; ++j) {
        const auto nj = counts.config_total(j);
        if (nj == 0) continue;
        const double log_nj = std::log(static_cast<double>(nj));
        for (int k = 0; k < r; ++k) {
            const auto njk = counts.at(j, k);
            if (njk > 0) loglik += static_cast<double>(njk) * (std::log(static_cast<double>(njk)) - log_nj);
        }
    }
    const double params = static_cast<double>(r - 1) * counts.configurations;
    return loglik - 0.5 * params * std::log(static_cast<double>(n));
}

double family_bic(const CategoricalDataset& data, int child, std::span<const int> parents) {
    const auto cols = as_columns(parents);
    return family_bic(column_counts(data, child, cols), data.rows());
}

BicScore bic_score(const CategoricalDataset& data, const Dag& dag) {
    if (data.rows() == 0) fail_data("BIC needs at least one row");
    if (static_cast<int>(data.cols()) != dag.node_count())
        fail_data("dataset columns do not match dag nodes");
    BicScore score;
    const double log_n = std::log(static_cast<double>(data.rows()));
    for (int v = 0; v < dag.node_count(); ++v) {
        const auto cols = as_columns(dag.parents(v));
        const auto counts = column_counts(data, v, cols);
        const double fam = family_bic(counts, data.rows());
        const std::int64_t d =
            static_cast<std::int64_t>(counts.child_cardinality - 1) * counts.configurations;
        score.families.push_back(fam);
        score.total += fam;
        score.parameters += d;
        score.log_likelihood += fam + 0.5 * static_cast<double>(d) * log_n;
    }
    return score;
}

CategoricalDataset ancestral_sample(const BayesianNetwork& bn, std::size_t n, std::uint64_t seed) {
    if (n == 0) fail_usage("sample size must be at least 1");
    const auto order = topological_order(bn.dag());
    const int p = bn.node_count();
    std::vector<std::vector<int>> columns(p, std::vector<int>(n));
    std::vector<int> assignment(p, 0);
    Engine engine(seed);
    for (std::size_t i = 0; i < n; ++i) {
        for (const int v : order) {
            const Cpt& cpt = bn.cpt(v);
            assignment[v] = sample_categorical(cpt.row(cpt.config_of(assignment)), engine);
            columns[v][i] = assignment[v];
        }
    }
    return CategoricalDataset(bn.variables(), std::move(columns));
}

std::vector<double> conditional_distribution(const BayesianNetwork& bn, int target,
                                             std::span<const int> evidence) {
    if (target < 0 || target >= bn.node_count()) fail_usage("query target out of range");
    if (static_cast<int>(evidence.size()) != bn.node_count())
        fail_usage("evidence must assign every node");
    std::vector<int> assignment(evidence.begin(), evidence.end());
    const Cpt& own = bn.cpt(target);
    const int own_config = own.config_of(assignment);
    const auto& children = bn.dag().children(target);

    std::vector<double> weights(own.cardinality());
    double total = 0.0;
    for (int s = 0; s < own.cardinality(); ++s) {
        assignment[target] = s;
        double w = own.prob(own_config, s);
        for (const int c : children) {
            if (w == 0.0) break;
            const Cpt& cc = bn.cpt(c);
            w *= cc.prob(cc.config_of(assignment), assignment[c]);
        }
        weights[s] = w;
        total += w;
    }
    if (!(total > 0.0)) fail_numeric("unsupported evidence configuration");
    for (auto& w : weights) w /= total;
    return weights;
}

double conditional_query(const BayesianNetwork& bn, int target, int target_state,
                         std::span<const int> evidence) {
    const auto dist = conditional_distribution(bn, target, evidence);
    if (target_state < 0 || target_state >= static_cast<int>(dist.size()))
        fail_usage("query state out of range");
    return dist[target_state];
}

}  // namespace bnps
