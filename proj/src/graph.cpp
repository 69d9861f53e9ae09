#include "iklkit/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace iklkit {

namespace {

std::string edge_str(int i, int j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

std::vector<char> make_mask(int d, const std::vector<int>& vars, const char* what) {
    std::vector<char> mask(static_cast<std::size_t>(d), 0);
    for (int v : vars) {
        if (v < 0 || v >= d) {
            throw InputError(std::string(what) + " index " + std::to_string(v) + " out of range");
        }
        mask[static_cast<std::size_t>(v)] = 1;
    }
    return mask;
}

// Kahn's algorithm with a min-heap; returns nullopt on a cycle.
std::optional<std::vector<int>> try_topological_order(int d,
                                                      const std::vector<std::vector<int>>& children,
                                                      const std::vector<std::vector<int>>& parents) {
    std::vector<int> indeg(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < d; ++i) {
        indeg[static_cast<std::size_t>(i)] = static_cast<int>(parents[static_cast<std::size_t>(i)].size());
    }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int i = 0; i < d; ++i) {
        if (indeg[static_cast<std::size_t>(i)] == 0) ready.push(i);
    }
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(d));
    while (!ready.empty()) {
        const int u = ready.top();
        ready.pop();
        order.push_back(u);
        for (int c : children[static_cast<std::size_t>(u)]) {
            if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push(c);
        }
    }
    if (static_cast<int>(order.size()) != d) return std::nullopt;
    return order;
}

}  // namespace

EdgeSet::EdgeSet(std::initializer_list<Edge> edges) {
    for (const auto& [i, j] : edges) insert(i, j);
}

void EdgeSet::insert(int i, int j) {
    if (i == j || i < 0 || j < 0) {
        throw InputError("invalid undirected edge " + edge_str(i, j));
    }
    edges_.emplace(std::min(i, j), std::max(i, j));
}

bool EdgeSet::contains(int i, int j) const {
    return edges_.count({std::min(i, j), std::max(i, j)}) > 0;
}

Dag::Dag(int num_vars, const std::vector<Edge>& edges) : num_vars_(num_vars) {
    if (num_vars <= 0) throw InputError("Dag needs at least one variable");
    parents_.resize(static_cast<std::size_t>(num_vars));
    children_.resize(static_cast<std::size_t>(num_vars));
    std::set<Edge> seen;
    for (const auto& [i, j] : edges) {
        if (i < 0 || i >= num_vars || j < 0 || j >= num_vars) {
            throw InputError("edge " + edge_str(i, j) + " out of range");
        }
        if (i == j) throw StructureError("self-loop at " + std::to_string(i));
        if (!seen.emplace(i, j).second) {
            throw StructureError("duplicate edge " + edge_str(i, j));
        }
        parents_[static_cast<std::size_t>(j)].push_back(i);
        children_[static_cast<std::size_t>(i)].push_back(j);
    }
    edges_.assign(seen.begin(), seen.end());
    for (auto& p : parents_) std::sort(p.begin(), p.end());
    for (auto& c : children_) std::sort(c.begin(), c.end());
    auto order = try_topological_order(num_vars_, children_, parents_);
    if (!order) throw StructureError("edge set contains a cycle");
    topo_ = std::move(*order);
}

void Dag::check_index(int i) const {
    if (i < 0 || i >= num_vars_) {
        throw InputError("variable index " + std::to_string(i) + " out of range");
    }
}

bool Dag::has_edge(int i, int j) const {
    check_index(i);
    check_index(j);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

const std::vector<int>& Dag::parents(int i) const {
    check_index(i);
    return parents_[static_cast<std::size_t>(i)];
}

const std::vector<int>& Dag::children(int i) const {
    check_index(i);
    return children_[static_cast<std::size_t>(i)];
}

EdgeSet Dag::skeleton() const {
    EdgeSet s;
    for (const auto& [i, j] : edges_) s.insert(i, j);
    return s;
}

std::set<std::array<int, 3>> Dag::v_structures() const {
    std::set<std::array<int, 3>> out;
    for (int k = 0; k < num_vars_; ++k) {
        const auto& pa = parents_[static_cast<std::size_t>(k)];
        for (std::size_t a = 0; a < pa.size(); ++a) {
            for (std::size_t b = a + 1; b < pa.size(); ++b) {
                if (!adjacent(pa[a], pa[b])) out.insert({pa[a], k, pa[b]});
            }
        }
    }
    return out;
}

bool Dag::operator==(const Dag& other) const {
    return num_vars_ == other.num_vars_ && edges_ == other.edges_;
}

bool is_markov_equivalent(const Dag& g1, const Dag& g2) {
    if (g1.num_vars() != g2.num_vars()) {
        throw InputError("graphs have different variable counts");
    }
    return g1.skeleton() == g2.skeleton() && g1.v_structures() == g2.v_structures();
}

std::vector<int> descendants(const Dag& g, int i) {
    std::vector<char> seen(static_cast<std::size_t>(g.num_vars()), 0);
    std::vector<int> stack = {i};
    std::vector<int> out;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int c : g.children(u)) {
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = 1;
                out.push_back(c);
                stack.push_back(c);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool d_separated(const Dag& g, const std::vector<int>& a, const std::vector<int>& b,
                 const std::vector<int>& z) {
    const int d = g.num_vars();
    const auto in_a = make_mask(d, a, "source");
    const auto in_b = make_mask(d, b, "sink");
    const auto in_z = make_mask(d, z, "conditioning");
    for (int v = 0; v < d; ++v) {
        const std::size_t u = static_cast<std::size_t>(v);
        if ((in_a[u] && in_b[u]) || (in_a[u] && in_z[u]) || (in_b[u] && in_z[u])) {
            throw InputError("d-separation sets must be pairwise disjoint");
        }
    }

    // Ancestors of z (z included), needed for the collider-opening rule.
    std::vector<char> anc(static_cast<std::size_t>(d), 0);
    {
        std::vector<int> stack(z.begin(), z.end());
        for (int v : z) anc[static_cast<std::size_t>(v)] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int p : g.parents(u)) {
                if (!anc[static_cast<std::size_t>(p)]) {
                    anc[static_cast<std::size_t>(p)] = 1;
                    stack.push_back(p);
                }
            }
        }
    }

    // Reachability over (vertex, incoming-direction) states: "up" means the
    // trail arrived from a child, "down" from a parent.
    enum Dir : int { up = 0, down = 1 };
    std::vector<std::array<char, 2>> visited(static_cast<std::size_t>(d), {0, 0});
    std::queue<std::pair<int, int>> frontier;
    for (int s : a) frontier.push({s, up});
    while (!frontier.empty()) {
        const auto [v, dir] = frontier.front();
        frontier.pop();
        const std::size_t u = static_cast<std::size_t>(v);
        if (visited[u][static_cast<std::size_t>(dir)]) continue;
        visited[u][static_cast<std::size_t>(dir)] = 1;
        if (!in_z[u] && in_b[u]) return false;
        if (dir == up && !in_z[u]) {
            for (int p : g.parents(v)) frontier.push({p, up});
            for (int c : g.children(v)) frontier.push({c, down});
        } else if (dir == down) {
            if (!in_z[u]) {
                for (int c : g.children(v)) frontier.push({c, down});
            }
            if (anc[u]) {
                for (int p : g.parents(v)) frontier.push({p, up});
            }
        }
    }
    return true;
}

std::optional<std::vector<int>> find_unblocked_directed_path(const Dag& g,
                                                             const std::vector<int>& targets, int i,
                                                             const std::vector<int>& z) {
    const int d = g.num_vars();
    if (i < 0 || i >= d) throw InputError("path endpoint index out of range");
    const auto in_t = make_mask(d, targets, "target");
    if (in_t[static_cast<std::size_t>(i)]) return std::vector<int>{i};
    if (targets.empty()) return std::nullopt;
    const auto in_z = make_mask(d, z, "blocking");
    if (in_z[static_cast<std::size_t>(i)]) return std::nullopt;

    // BFS forward from every unblocked target; z vertices are never entered,
    // so any discovered path avoids z entirely.
    std::vector<int> pred(static_cast<std::size_t>(d), -1);
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    std::queue<int> frontier;
    std::vector<int> sorted_targets(targets.begin(), targets.end());
    std::sort(sorted_targets.begin(), sorted_targets.end());
    for (int t : sorted_targets) {
        const std::size_t u = static_cast<std::size_t>(t);
        if (!in_z[u] && !seen[u]) {
            seen[u] = 1;
            frontier.push(t);
        }
    }
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int c : g.children(v)) {
            const std::size_t u = static_cast<std::size_t>(c);
            if (seen[u] || in_z[u]) continue;
            seen[u] = 1;
            pred[u] = v;
            if (c == i) {
                std::vector<int> path = {c};
                for (int cur = v; cur != -1; cur = pred[static_cast<std::size_t>(cur)]) {
                    path.push_back(cur);
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            frontier.push(c);
        }
    }
    return std::nullopt;
}

bool has_unblocked_directed_path(const Dag& g, const std::vector<int>& targets, int i,
                                 const std::vector<int>& z) {
    return find_unblocked_directed_path(g, targets, i, z).has_value();
}

std::vector<Dag> enumerate_markov_equivalence_class(const Dag& g, int max_vars) {
    if (g.num_vars() > max_vars) {
        throw CapacityError("MEC enumeration limited to " + std::to_string(max_vars) +
                            " variables, got " + std::to_string(g.num_vars()));
    }
    const int d = g.num_vars();
    const EdgeSet skeleton = g.skeleton();
    const std::vector<Edge> skel(skeleton.edges().begin(), skeleton.edges().end());
    const auto target_vs = g.v_structures();
    const std::size_t m = skel.size();
    std::vector<Dag> members;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<Edge> oriented;
        oriented.reserve(m);
        std::vector<std::vector<int>> parents(static_cast<std::size_t>(d));
        std::vector<std::vector<int>> children(static_cast<std::size_t>(d));
        for (std::size_t e = 0; e < m; ++e) {
            auto [lo, hi] = skel[e];
            if (mask & (std::size_t{1} << e)) std::swap(lo, hi);
            oriented.emplace_back(lo, hi);
            parents[static_cast<std::size_t>(hi)].push_back(lo);
            children[static_cast<std::size_t>(lo)].push_back(hi);
        }
        if (!try_topological_order(d, children, parents)) continue;
        Dag candidate(d, oriented);
        if (candidate.v_structures() == target_vs) members.push_back(std::move(candidate));
    }
    return members;
}

}  // namespace iklkit
