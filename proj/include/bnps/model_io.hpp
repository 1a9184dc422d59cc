#pragma once

#include <filesystem>

#include <json.hpp>

#include "bnps/bayesian_network.hpp"

namespace bnps {

inline constexpr int kModelFormatVersion = 1;

// Model file layout:
//   {"version": 1,
//    "variables": [{"name": ..., "states": [...]}, ...],
//    "arcs": [[parent, child], ...],
//    "cpts": [{"node": i, "rows": [[p, ...], ...]}, ...]}
// Rows follow mixed-radix parent order (last parent fastest), columns follow
// state order. Readers reject any row whose sum is off by more than 1e-9.
nlohmann::json network_to_json(const BayesianNetwork& bn);
BayesianNetwork network_from_json(const nlohmann::json& doc);

void save_network(const BayesianNetwork& bn, const std::filesystem::path& path);
BayesianNetwork load_network(const std::filesystem::path& path);

}  // namespace bnps
