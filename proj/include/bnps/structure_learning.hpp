#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnps/categorical_data.hpp"
#include "bnps/dag.hpp"

namespace bnps {

enum class SearchAlgorithm { HillClimb, Tabu };

/// Moves with delta at or below this are not improvements.
inline constexpr double kImprovementEpsilon = 1e-9;

struct SearchConfig {
    SearchAlgorithm algorithm = SearchAlgorithm::Tabu;
    int tabu_length = 10;
    int max_degrading_steps = 10;
    int max_iter = 10000;
    std::vector<Arc> blacklist;
    std::vector<Arc> whitelist;
    // Carried for the run manifest. Ties are broken by move order, so the
    // search itself never consumes it.
    std::uint64_t seed = 0;

    void validate(int node_count) const;
};

/// Memoised BIC family scores keyed by (child, sorted parent set).
class FamilyScoreCache {
public:
    explicit FamilyScoreCache(const CategoricalDataset& data) : data_(&data) {}

    double score(int child, std::span<const int> parents);

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }
    std::size_t size() const { return table_.size(); }

    struct Entry {
        int child;
        std::vector<int> parents;
        double score;
    };
    std::vector<Entry> entries() const;

    const CategoricalDataset& data() const { return *data_; }

private:
    const CategoricalDataset* data_;
    std::map<std::vector<int>, double> table_;  // key: child followed by parents
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct TraceStep {
    int step = 0;
    Move move;
    double delta = 0.0;
    double total_score = 0.0;
    // A better-scoring move was blocked by the tabu list at this step.
    bool tabu_hit = false;
};

struct SearchResult {
    Dag dag;
    double score = 0.0;
    std::vector<TraceStep> trace;
    std::vector<std::string> warnings;
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
};

struct ScoredMove {
    Move move;
    double delta = 0.0;
};

/// Score change of applying `m` to `g`; only the families whose parent sets
/// change are rescored (one for Add/Delete, two for Reverse).
double score_delta(FamilyScoreCache& cache, const Dag& g, const Move& m);

/// Every move that keeps `g` acyclic and respects the arc constraints, in
/// lexicographic (kind, from, to) order.
std::vector<Move> legal_moves(const Dag& g, const SearchConfig& cfg);

/// The empty graph plus whitelisted arcs.
Dag initial_graph(int node_count, const SearchConfig& cfg);

SearchResult hill_climb(const CategoricalDataset& data, const SearchConfig& cfg);
SearchResult hill_climb(const CategoricalDataset& data, const SearchConfig& cfg,
                        FamilyScoreCache& cache, std::optional<Dag> start = std::nullopt);

SearchResult tabu_search(const CategoricalDataset& data, const SearchConfig& cfg);
SearchResult tabu_search(const CategoricalDataset& data, const SearchConfig& cfg,
                         FamilyScoreCache& cache);

/// Dispatches on cfg.algorithm.
SearchResult learn_structure(const CategoricalDataset& data, const SearchConfig& cfg);

/// Exhaustively rescans all legal moves of `g`; returns the best one with
/// delta > kImprovementEpsilon, if any.
std::optional<ScoredMove> find_improving_move(const CategoricalDataset& data, const Dag& g,
                                              const SearchConfig& cfg);

/// CSV: step,move_kind,u,v,delta,total_score,tabu_hit
void write_trace_csv(std::ostream& out, const SearchResult& result);

}  // namespace bnps
