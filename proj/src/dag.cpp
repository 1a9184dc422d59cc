#include "bnps/dag.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include <fmt/format.h>

#include "bnps/error.hpp"

namespace bnps {

const char* to_string(MoveKind kind) {
    switch (kind) {
    case MoveKind::Add: return "add";
    case MoveKind::Delete: return "delete";
    case MoveKind::Reverse: return "reverse";
    }
    return "?";
}

Move inverse(const Move& m) {
    switch (m.kind) {
    case MoveKind::Add: return {MoveKind::Delete, m.from, m.to};
    case MoveKind::Delete: return {MoveKind::Add, m.from, m.to};
    case MoveKind::Reverse: return {MoveKind::Reverse, m.to, m.from};
    }
    return m;
}

Dag::Dag(int node_count) {
    if (node_count < 0) fail_usage("negative node count");
    parents_.resize(node_count);
    children_.resize(node_count);
}

Dag Dag::from_arcs(int node_count, std::span<const Arc> arcs) {
    Dag g(node_count);
    for (const auto& [u, v] : arcs) {
        const Move add{MoveKind::Add, u, v};
        check_move(g, add);
        if (!g.keeps_acyclic(add)) fail_data(fmt::format("arc {}->{} closes a cycle", u, v));
        g.insert_arc(u, v);
    }
    return g;
}

bool Dag::has_arc(int u, int v) const {
    const auto& p = parents_.at(v);
    return std::binary_search(p.begin(), p.end(), u);
}

std::size_t Dag::arc_count() const {
    std::size_t total = 0;
    for (const auto& p : parents_) total += p.size();
    return total;
}

std::vector<Arc> Dag::arcs() const {
    std::vector<Arc> out;
    for (int u = 0; u < node_count(); ++u)
        for (const int v : children_[u]) out.emplace_back(u, v);
    return out;
}

bool Dag::reachable(int from, int to, const Arc* skip) const {
    if (from == to) return true;
    std::vector<char> seen(parents_.size(), 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const int w : children_[u]) {
            if (skip && u == skip->first && w == skip->second) continue;
            if (w == to) return true;
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return false;
}

bool Dag::keeps_acyclic(const Move& m) const {
    switch (m.kind) {
    case MoveKind::Add:
        // u->v closes a cycle iff v already reaches u.
        return !reachable(m.to, m.from);
    case MoveKind::Delete:
        return true;
    case MoveKind::Reverse: {
        // v->u closes a cycle iff u reaches v by some path other than u->v.
        const Arc skip{m.from, m.to};
        return !reachable(m.from, m.to, &skip);
    }
    }
    return false;
}

void Dag::insert_arc(int u, int v) {
    auto& p = parents_[v];
    p.insert(std::lower_bound(p.begin(), p.end(), u), u);
    auto& c = children_[u];
    c.insert(std::lower_bound(c.begin(), c.end(), v), v);
}

void Dag::erase_arc(int u, int v) {
    auto& p = parents_[v];
    p.erase(std::lower_bound(p.begin(), p.end(), u));
    auto& c = children_[u];
    c.erase(std::lower_bound(c.begin(), c.end(), v));
}

void Dag::apply_unchecked(const Move& m) {
    switch (m.kind) {
    case MoveKind::Add: insert_arc(m.from, m.to); break;
    case MoveKind::Delete: erase_arc(m.from, m.to); break;
    case MoveKind::Reverse:
        erase_arc(m.from, m.to);
        insert_arc(m.to, m.from);
        break;
    }
}

void check_move(const Dag& g, const Move& m) {
    const int n = g.node_count();
    if (m.from < 0 || m.from >= n || m.to < 0 || m.to >= n)
        fail_usage(fmt::format("invalid node id in {}({},{})", to_string(m.kind), m.from, m.to));
    if (m.from == m.to) fail_usage(fmt::format("self-loop on node {}", m.from));
    const bool forward = g.has_arc(m.from, m.to);
    if (m.kind == MoveKind::Add) {
        if (forward || g.has_arc(m.to, m.from))
            fail_usage(fmt::format("add({},{}): nodes already adjacent", m.from, m.to));
    } else if (!forward) {
        fail_usage(fmt::format("{}({},{}): arc absent", to_string(m.kind), m.from, m.to));
    }
}

MoveOutcome apply_move(const Dag& g, const Move& m) {
    check_move(g, m);
    if (!g.keeps_acyclic(m)) return Rejection{"cycle"};
    Dag next = g;
    next.apply_unchecked(m);
    return next;
}

std::vector<int> topological_order(const Dag& g) {
    const int n = g.node_count();
    std::vector<int> indegree(n);
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int v = 0; v < n; ++v) {
        indegree[v] = static_cast<int>(g.parents(v).size());
        if (indegree[v] == 0) ready.push(v);
    }
    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty()) {
        const int u = ready.top();
        ready.pop();
        order.push_back(u);
        for (const int w : g.children(u))
            if (--indegree[w] == 0) ready.push(w);
    }
    return order;
}

bool has_cycle_dfs(int node_count, std::span<const Arc> arcs) {
    std::vector<std::vector<int>> adj(node_count);
    for (const auto& [u, v] : arcs) adj[u].push_back(v);
    enum : char { White, Grey, Black };
    std::vector<char> colour(node_count, White);
    std::function<bool(int)> visit = [&](int u) {
        colour[u] = Grey;
        for (const int w : adj[u]) {
            if (colour[w] == Grey) return true;
            if (colour[w] == White && visit(w)) return true;
        }
        colour[u] = Black;
        return false;
    };
    for (int u = 0; u < node_count; ++u)
        if (colour[u] == White && visit(u)) return true;
    return false;
}

std::string to_dot(const Dag& g, std::span<const std::string> names) {
    if (static_cast<int>(names.size()) != g.node_count())
        fail_usage("name count does not match node count");
    std::ostringstream out;
    out << "digraph G {\n";
    for (const auto& name : names) out << "  \"" << name << "\";\n";
    for (const auto& [u, v] : g.arcs())
        out << "  \"" << names[u] << "\" -> \"" << names[v] << "\";\n";
    out << "}\n";
    return out.str();
}

}  // namespace bnps
