#include "bnps/structure_learning.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "bnps/bayesian_network.hpp"
#include "bnps/error.hpp"

namespace bnps {

void SearchConfig::validate(int node_count) const {
    if (tabu_length < 1) fail_usage("tabu_length must be at least 1");
    if (max_degrading_steps < 1) fail_usage("max_degrading_steps must be at least 1");
    if (max_iter < 1) fail_usage("max_iter must be at least 1");
    auto check_ids = [&](const std::vector<Arc>& arcs, const char* what) {
        for (const auto& [u, v] : arcs)
            if (u < 0 || v < 0 || u >= node_count || v >= node_count || u == v)
                fail_usage(fmt::format("invalid {} arc ({},{})", what, u, v));
    };
    check_ids(blacklist, "blacklist");
    check_ids(whitelist, "whitelist");
    for (const auto& arc : whitelist)
        if (std::find(blacklist.begin(), blacklist.end(), arc) != blacklist.end())
            fail_usage(fmt::format("arc ({},{}) is both white- and blacklisted", arc.first, arc.second));
    // Throws when the whitelist is cyclic or names both directions of an edge.
    (void)Dag::from_arcs(node_count, whitelist);
}

double FamilyScoreCache::score(int child, std::span<const int> parents) {
    std::vector<int> key;
    key.reserve(parents.size() + 1);
    key.push_back(child);
    key.insert(key.end(), parents.begin(), parents.end());
    std::sort(key.begin() + 1, key.end());
    if (const auto it = table_.find(key); it != table_.end()) {
        ++hits_;
        return it->second;
    }
    ++misses_;
    const double value =
        family_bic(*data_, child, std::span<const int>(key.data() + 1, key.size() - 1));
    table_.emplace(std::move(key), value);
    return value;
}

std::vector<FamilyScoreCache::Entry> FamilyScoreCache::entries() const {
    std::vector<Entry> out;
    out.reserve(table_.size());
    for (const auto& [key, value] : table_)
        out.push_back({key.front(), std::vector<int>(key.begin() + 1, key.end()), value});
    return out;
}

namespace {

std::vector<int> with_parent(const std::vector<int>& parents, int added) {
    std::vector<int> out = parents;
    out.insert(std::lower_bound(out.begin(), out.end(), added), added);
    return out;
}

std::vector<int> without_parent(const std::vector<int>& parents, int removed) {
    std::vector<int> out;
    out.reserve(parents.size());
    for (const int p : parents)
        if (p != removed) out.push_back(p);
    return out;
}

// Blacklist/whitelist lookups as dense boolean matrices.
struct ArcConstraints {
    int n = 0;
    std::vector<char> black;
    std::vector<char> white;

    ArcConstraints(int nodes, const SearchConfig& cfg)
        : n(nodes), black(static_cast<std::size_t>(nodes) * nodes, 0), white(black) {
        for (const auto& [u, v] : cfg.blacklist) black[u * n + v] = 1;
        for (const auto& [u, v] : cfg.whitelist) white[u * n + v] = 1;
    }
    bool blacklisted(int u, int v) const { return black[u * n + v] != 0; }
    bool whitelisted(int u, int v) const { return white[u * n + v] != 0; }
};

std::vector<Move> enumerate_moves(const Dag& g, const ArcConstraints& rules) {
    const int n = g.node_count();
    std::vector<Move> moves;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v || g.has_arc(u, v) || g.has_arc(v, u) || rules.blacklisted(u, v)) continue;
            const Move m{MoveKind::Add, u, v};
            if (g.keeps_acyclic(m)) moves.push_back(m);
        }
    for (const auto& [u, v] : g.arcs())
        if (!rules.whitelisted(u, v)) moves.push_back({MoveKind::Delete, u, v});
    for (const auto& [u, v] : g.arcs()) {
        if (rules.whitelisted(u, v) || rules.blacklisted(v, u)) continue;
        const Move m{MoveKind::Reverse, u, v};
        if (g.keeps_acyclic(m)) moves.push_back(m);
    }
    return moves;
}

// Family scores of the current graph, kept in step with every applied move.
struct ScoredGraph {
    Dag dag;
    std::vector<double> families;

    ScoredGraph(Dag g, FamilyScoreCache& cache) : dag(std::move(g)), families(dag.node_count()) {
        for (int v = 0; v < dag.node_count(); ++v) families[v] = cache.score(v, dag.parents(v));
    }

    double total() const { return std::accumulate(families.begin(), families.end(), 0.0); }

    void apply(const Move& m, FamilyScoreCache& cache) {
        dag.apply_unchecked(m);
        families[m.to] = cache.score(m.to, dag.parents(m.to));
        if (m.kind == MoveKind::Reverse) families[m.from] = cache.score(m.from, dag.parents(m.from));
    }
};

// Tabu entries are undirected edges tagged with the kind of move that would
// undo a recent step.
struct TabuSignature {
    int lo;
    int hi;
    MoveKind kind;
    friend bool operator==(const TabuSignature&, const TabuSignature&) = default;
};

TabuSignature signature_of(const Move& m) {
    return {std::min(m.from, m.to), std::max(m.from, m.to), m.kind};
}

void finish(SearchResult& result, const ScoredGraph& state, const FamilyScoreCache& cache) {
    result.dag = state.dag;
    result.score = state.total();
    result.cache_hits = cache.hits();
    result.cache_misses = cache.misses();
}

}  // namespace

double score_delta(FamilyScoreCache& cache, const Dag& g, const Move& m) {
    check_move(g, m);
    const auto& to_parents = g.parents(m.to);
    switch (m.kind) {
    case MoveKind::Add:
        return cache.score(m.to, with_parent(to_parents, m.from)) - cache.score(m.to, to_parents);
    case MoveKind::Delete:
        return cache.score(m.to, without_parent(to_parents, m.from)) - cache.score(m.to, to_parents);
    case MoveKind::Reverse: {
        const auto& from_parents = g.parents(m.from);
        return cache.score(m.to, without_parent(to_parents, m.from)) - cache.score(m.to, to_parents) +
               cache.score(m.from, with_parent(from_parents, m.to)) - cache.score(m.from, from_parents);
    }
    }
    return 0.0;
}

std::vector<Move> legal_moves(const Dag& g, const SearchConfig& cfg) {
    return enumerate_moves(g, ArcConstraints(g.node_count(), cfg));
}

Dag initial_graph(int node_count, const SearchConfig& cfg) {
    return Dag::from_arcs(node_count, cfg.whitelist);
}

SearchResult hill_climb(const CategoricalDataset& data, const SearchConfig& cfg) {
    FamilyScoreCache cache(data);
    return hill_climb(data, cfg, cache);
}

SearchResult hill_climb(const CategoricalDataset& data, const SearchConfig& cfg,
                        FamilyScoreCache& cache, std::optional<Dag> start) {
    const int p = static_cast<int>(data.cols());
    if (p < 2) fail_usage("structure learning needs at least two columns");
    cfg.validate(p);
    const ArcConstraints rules(p, cfg);
    ScoredGraph state(start ? std::move(*start) : initial_graph(p, cfg), cache);

    SearchResult result;
    int step = 0;
    for (;; ++step) {
        if (step >= cfg.max_iter) {
            result.warnings.push_back(fmt::format("max_iter ({}) reached", cfg.max_iter));
            break;
        }
        std::optional<ScoredMove> best;
        for (const auto& m : enumerate_moves(state.dag, rules)) {
            const double d = score_delta(cache, state.dag, m);
            if (!best || d > best->delta) best = ScoredMove{m, d};
        }
        if (!best || best->delta <= kImprovementEpsilon) break;
        state.apply(best->move, cache);
        result.trace.push_back({step + 1, best->move, best->delta, state.total(), false});
    }
    finish(result, state, cache);
    return result;
}

SearchResult tabu_search(const CategoricalDataset& data, const SearchConfig& cfg) {
    FamilyScoreCache cache(data);
    return tabu_search(data, cfg, cache);
}

SearchResult tabu_search(const CategoricalDataset& data, const SearchConfig& cfg,
                         FamilyScoreCache& cache) {
    const int p = static_cast<int>(data.cols());
    if (p < 2) fail_usage("structure learning needs at least two columns");
    cfg.validate(p);
    const ArcConstraints rules(p, cfg);
    ScoredGraph state(initial_graph(p, cfg), cache);

    Dag best_dag = state.dag;
    double best_score = state.total();
    std::deque<TabuSignature> tabu;
    int stalled = 0;

    SearchResult result;
    int step = 0;
    for (;; ++step) {
        if (step >= cfg.max_iter) {
            result.warnings.push_back(fmt::format("max_iter ({}) reached", cfg.max_iter));
            break;
        }
        const double current = state.total();
        std::optional<ScoredMove> chosen;
        double best_blocked = -std::numeric_limits<double>::infinity();
        for (const auto& m : enumerate_moves(state.dag, rules)) {
            const double d = score_delta(cache, state.dag, m);
            const bool is_tabu =
                std::find(tabu.begin(), tabu.end(), signature_of(m)) != tabu.end();
            // Aspiration: a tabu move is still allowed if it beats the best graph seen.
            if (is_tabu && !(current + d > best_score + kImprovementEpsilon)) {
                best_blocked = std::max(best_blocked, d);
                continue;
            }
            if (!chosen || d > chosen->delta) chosen = ScoredMove{m, d};
        }
        if (!chosen) break;

        state.apply(chosen->move, cache);
        tabu.push_back(signature_of(inverse(chosen->move)));
        while (static_cast<int>(tabu.size()) > cfg.tabu_length) tabu.pop_front();
        const double total = state.total();
        result.trace.push_back(
            {step + 1, chosen->move, chosen->delta, total, best_blocked > chosen->delta});

        if (total > best_score + kImprovementEpsilon) {
            best_score = total;
            best_dag = state.dag;
            stalled = 0;
        } else if (++stalled >= cfg.max_degrading_steps) {
            break;
        }
    }

    // The best graph is a local optimum unless the iteration cap cut the
    // search short right after reaching it; a plain ascent closes that gap.
    auto polished = hill_climb(data, cfg, cache, best_dag);
    for (auto& t : polished.trace) {
        t.step = static_cast<int>(result.trace.size()) + 1;
        result.trace.push_back(t);
    }
    for (auto& w : polished.warnings) result.warnings.push_back("polish: " + w);
    result.dag = std::move(polished.dag);
    result.score = polished.score;
    result.cache_hits = cache.hits();
    result.cache_misses = cache.misses();
    return result;
}

SearchResult learn_structure(const CategoricalDataset& data, const SearchConfig& cfg) {
    return cfg.algorithm == SearchAlgorithm::Tabu ? tabu_search(data, cfg) : hill_climb(data, cfg);
}

std::optional<ScoredMove> find_improving_move(const CategoricalDataset& data, const Dag& g,
                                              const SearchConfig& cfg) {
    FamilyScoreCache cache(data);
    std::optional<ScoredMove> best;
    for (const auto& m : legal_moves(g, cfg)) {
        const double d = score_delta(cache, g, m);
        if (d > kImprovementEpsilon && (!best || d > best->delta)) best = ScoredMove{m, d};
    }
    return best;
}

void write_trace_csv(std::ostream& out, const SearchResult& result) {
    out << "step,move_kind,u,v,delta,total_score,tabu_hit\n";
    for (const auto& t : result.trace)
        out << fmt::format("{},{},{},{},{:.17g},{:.17g},{}\n", t.step, to_string(t.move.kind),
                           t.move.from, t.move.to, t.delta, t.total_score, t.tabu_hit ? 1 : 0);
}

}  // namespace bnps
