#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bnps {

using Arc = std::pair<int, int>;  // (parent, child)

enum class MoveKind : int { Add = 0, Delete = 1, Reverse = 2 };

const char* to_string(MoveKind kind);

/// One arc edit. For Delete and Reverse, (from, to) names the existing arc;
/// Reverse turns from->to into to->from.
struct Move {
    MoveKind kind = MoveKind::Add;
    int from = 0;
    int to = 0;

    friend auto operator<=>(const Move&, const Move&) = default;
};

/// The move that undoes `m`.
Move inverse(const Move& m);

/// Directed acyclic graph over nodes 0..n-1. Parent and child lists are kept
/// sorted ascending; every public mutation preserves acyclicity.
class Dag {
public:
    explicit Dag(int node_count = 0);

    /// Throws if any arc is invalid or the arcs contain a cycle.
    static Dag from_arcs(int node_count, std::span<const Arc> arcs);

    int node_count() const { return static_cast<int>(parents_.size()); }
    const std::vector<int>& parents(int v) const { return parents_.at(v); }
    const std::vector<int>& children(int v) const { return children_.at(v); }
    bool has_arc(int u, int v) const;
    std::size_t arc_count() const;
    /// All arcs sorted by (parent, child).
    std::vector<Arc> arcs() const;

    /// Is there a directed path from `from` to `to`? Optionally ignores one arc.
    bool reachable(int from, int to, const Arc* skip = nullptr) const;

    /// Would applying `m` keep the graph acyclic? Assumes the move's
    /// precondition already holds.
    bool keeps_acyclic(const Move& m) const;

    /// Applies `m` in place without the cycle check. Callers must have
    /// established keeps_acyclic(m).
    void apply_unchecked(const Move& m);

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    void insert_arc(int u, int v);
    void erase_arc(int u, int v);

    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
};

struct Rejection {
    std::string reason;
};

using MoveOutcome = std::variant<Dag, Rejection>;

/// Throws on invalid node ids or a violated precondition (Add needs the arc
/// absent in both directions, Delete/Reverse need it present). Returns a
/// Rejection{"cycle"} when the result would be cyclic; `g` is never modified.
MoveOutcome apply_move(const Dag& g, const Move& m);

/// Throws unless `m` satisfies its precondition on `g`.
void check_move(const Dag& g, const Move& m);

/// Kahn's algorithm with smallest-id-first tie-breaking.
std::vector<int> topological_order(const Dag& g);

/// Independent cycle detector (three-colour DFS), kept for cross-checking.
bool has_cycle_dfs(int node_count, std::span<const Arc> arcs);

/// Graphviz rendering: one `"u" -> "v";` line per arc, inside `digraph G { }`.
std::string to_dot(const Dag& g, std::span<const std::string> names);

}  // namespace bnps
