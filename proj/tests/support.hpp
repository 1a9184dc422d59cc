#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bnps/bayesian_network.hpp"
#include "bnps/categorical_data.hpp"
#include "bnps/random.hpp"

namespace bnps::testing {

// Dataset with states "0".."k-1" per column; cardinality defaults to max code + 1
// (at least 2).
inline CategoricalDataset make_data(const std::vector<std::vector<int>>& columns,
                                    std::vector<int> cards = {}) {
    std::vector<VariableMeta> vars;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        int k = c < cards.size() ? cards[c] : 2;
        for (const int v : columns[c]) k = std::max(k, v + 1);
        VariableMeta meta{"V" + std::to_string(c), {}};
        for (int s = 0; s < k; ++s) meta.states.push_back(std::to_string(s));
        vars.push_back(std::move(meta));
    }
    return CategoricalDataset(std::move(vars), columns);
}

inline std::vector<double> random_row(int k, Engine& rng) {
    std::vector<double> row(k);
    double total = 0.0;
    for (auto& p : row) total += (p = 0.05 + uniform01(rng));
    for (auto& p : row) p /= total;
    return row;
}

// Random DAG over up to `max_nodes` nodes (arcs only from lower to higher id
// after a random relabelling) with strictly positive random CPTs.
inline BayesianNetwork random_network(Engine& rng, int max_nodes = 4, int max_states = 3) {
    const int n = 1 + static_cast<int>(rng() % max_nodes);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
    std::vector<Arc> arcs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (uniform01(rng) < 0.5) arcs.emplace_back(perm[i], perm[j]);
    const Dag dag = Dag::from_arcs(n, arcs);

    std::vector<VariableMeta> vars;
    for (int v = 0; v < n; ++v) {
        const int k = 2 + static_cast<int>(rng() % (max_states - 1));
        VariableMeta meta{"N" + std::to_string(v), {}};
        for (int s = 0; s < k; ++s) meta.states.push_back(std::to_string(s));
        vars.push_back(std::move(meta));
    }
    std::vector<Cpt> cpts;
    for (int v = 0; v < n; ++v) {
        std::vector<int> pc;
        int q = 1;
        for (const int p : dag.parents(v)) {
            pc.push_back(vars[p].cardinality());
            q *= vars[p].cardinality();
        }
        std::vector<double> table;
        for (int j = 0; j < q; ++j) {
            const auto row = random_row(vars[v].cardinality(), rng);
            table.insert(table.end(), row.begin(), row.end());
        }
        cpts.emplace_back(v, dag.parents(v), vars[v].cardinality(), pc, table);
    }
    return BayesianNetwork(std::move(vars), dag, std::move(cpts));
}

// Product of all CPT entries for one full assignment.
inline double joint_probability(const BayesianNetwork& bn, const std::vector<int>& x) {
    double p = 1.0;
    for (int v = 0; v < bn.node_count(); ++v) p *= bn.cpt(v).prob(bn.cpt(v).config_of(x), x[v]);
    return p;
}

// Calls f(assignment) for every joint state of the network.
template <class F>
void for_each_assignment(const BayesianNetwork& bn, F&& f) {
    const int n = bn.node_count();
    std::vector<int> x(n, 0);
    while (true) {
        f(x);
        int i = n - 1;
        while (i >= 0 && ++x[i] == bn.variable(i).cardinality()) x[i--] = 0;
        if (i < 0) return;
    }
}

// P(target | all other nodes) by brute-force enumeration of the joint.
inline std::vector<double> brute_force_conditional(const BayesianNetwork& bn, int target,
                                                   std::vector<int> evidence) {
    std::vector<double> out(bn.variable(target).cardinality());
    double total = 0.0;
    for (int s = 0; s < bn.variable(target).cardinality(); ++s) {
        evidence[target] = s;
        double mass = 0.0;
        // The evidence fixes every other node, so the sum has one term; the loop
        // over the joint keeps the oracle independent of the factorisation.
        for_each_assignment(bn, [&](const std::vector<int>& x) {
            if (x == evidence) mass += joint_probability(bn, x);
        });
        out[s] = mass;
        total += mass;
    }
    for (auto& p : out) p /= total;
    return out;
}

}  // namespace bnps::testing
