#include "bnps/model_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "bnps/error.hpp"

namespace bnps {

using nlohmann::json;

json network_to_json(const BayesianNetwork& bn) {
    json doc;
    doc["version"] = kModelFormatVersion;
    doc["variables"] = json::array();
    for (const auto& v : bn.variables())
        doc["variables"].push_back({{"name", v.name}, {"states", v.states}});
    doc["arcs"] = json::array();
    for (const auto& [u, v] : bn.dag().arcs()) doc["arcs"].push_back({u, v});
    doc["cpts"] = json::array();
    for (const auto& cpt : bn.cpts()) {
        json rows = json::array();
        for (int j = 0; j < cpt.configurations(); ++j) {
            const auto row = cpt.row(j);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        doc["cpts"].push_back({{"node", cpt.child()}, {"rows", std::move(rows)}});
    }
    return doc;
}

BayesianNetwork network_from_json(const json& doc) {
    try {
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion)
            fail_data(fmt::format("unsupported model version {}", version));

        std::vector<VariableMeta> variables;
        for (const auto& v : doc.at("variables"))
            variables.push_back({v.at("name").get<std::string>(),
                                 v.at("states").get<std::vector<std::string>>()});
        const int n = static_cast<int>(variables.size());

        std::vector<Arc> arcs;
        for (const auto& a : doc.at("arcs")) {
            if (!a.is_array() || a.size() != 2) fail_data("arc entries must be [parent, child]");
            arcs.emplace_back(a[0].get<int>(), a[1].get<int>());
        }
        Dag dag = Dag::from_arcs(n, arcs);

        std::vector<Cpt> cpts(n);
        std::vector<char> seen(n, 0);
        for (const auto& entry : doc.at("cpts")) {
            const int node = entry.at("node").get<int>();
            if (node < 0 || node >= n || seen[node])
                fail_data(fmt::format("bad or repeated cpt node {}", node));
            seen[node] = 1;
            std::vector<int> radices;
            for (const int p : dag.parents(node)) radices.push_back(variables[p].cardinality());
            std::vector<double> table;
            const auto& rows = entry.at("rows");
            for (const auto& row : rows) {
                if (static_cast<int>(row.size()) != variables[node].cardinality())
                    fail_data(fmt::format("cpt of '{}' has a row of the wrong width",
                                          variables[node].name));
                for (const auto& p : row) table.push_back(p.get<double>());
            }
            cpts[node] = Cpt(node, dag.parents(node), variables[node].cardinality(),
                             std::move(radices), std::move(table));
        }
        for (int v = 0; v < n; ++v)
            if (!seen[v]) fail_data(fmt::format("missing cpt for node {}", v));
        return BayesianNetwork(std::move(variables), std::move(dag), std::move(cpts), 1e-9);
    } catch (const json::exception& e) {
        fail_data(fmt::format("malformed model file: {}", e.what()));
    }
}

void save_network(const BayesianNetwork& bn, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_data(fmt::format("cannot write '{}'", path.string()));
    // json emits shortest round-trip doubles, so probabilities reload exactly.
    out << network_to_json(bn).dump(2) << '\n';
}

BayesianNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data(fmt::format("cannot open '{}'", path.string()));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail_data(fmt::format("malformed model file: {}", e.what()));
    }
    return network_from_json(doc);
}

}  // namespace bnps
