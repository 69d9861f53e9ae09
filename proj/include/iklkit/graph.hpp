#pragma once

#include <array>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "iklkit/errors.hpp"

namespace iklkit {

// Directed edge (i, j) meaning i -> j.
using Edge = std::pair<int, int>;

// Set of unordered edges, stored with the smaller index first.
class EdgeSet {
  public:
    EdgeSet() = default;
    EdgeSet(std::initializer_list<Edge> edges);

    void insert(int i, int j);
    bool contains(int i, int j) const;
    const std::set<Edge>& edges() const { return edges_; }
    std::size_t size() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }
    bool operator==(const EdgeSet&) const = default;

  private:
    std::set<Edge> edges_;
};

/// Immutable directed acyclic graph over variables indexed 0..d-1.
///
/// Acyclicity, index ranges, self-loops and duplicate edges are checked at
/// construction; every query below is a pure function of the stored value.
class Dag {
  public:
    Dag(int num_vars, const std::vector<Edge>& edges);

    int num_vars() const { return num_vars_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool has_edge(int i, int j) const;
    bool adjacent(int i, int j) const { return has_edge(i, j) || has_edge(j, i); }

    // Sorted parent / child index lists.
    const std::vector<int>& parents(int i) const;
    const std::vector<int>& children(int i) const;

    // Deterministic order: Kahn's algorithm with smallest-index-first ties.
    const std::vector<int>& topological_order() const { return topo_; }

    EdgeSet skeleton() const;

    // Unshielded colliders i -> k <- j as (i, k, j) with i < j.
    std::set<std::array<int, 3>> v_structures() const;

    bool operator==(const Dag& other) const;

  private:
    void check_index(int i) const;

    int num_vars_;
    std::vector<Edge> edges_;  // sorted
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<int> topo_;
};

// Verma–Pearl criterion: same skeleton and same v-structures.
bool is_markov_equivalent(const Dag& g1, const Dag& g2);

/// Standard d-separation of a from b given z (all pairwise disjoint).
/// A path is blocked when a chain or fork node lies in z, or when a collider
/// has neither itself nor any descendant in z.
bool d_separated(const Dag& g, const std::vector<int>& a, const std::vector<int>& b,
                 const std::vector<int>& z);

std::vector<int> descendants(const Dag& g, int i);  // excludes i itself

/// True iff some target k has a directed path k -> ... -> i avoiding z on
/// every path vertex, endpoints included. When i is itself a target the
/// condition holds trivially and z is not consulted. Empty targets: false.
bool has_unblocked_directed_path(const Dag& g, const std::vector<int>& targets, int i,
                                 const std::vector<int>& z);

// Same predicate, returning a witnessing vertex sequence k..i when one exists.
std::optional<std::vector<int>> find_unblocked_directed_path(const Dag& g,
                                                             const std::vector<int>& targets, int i,
                                                             const std::vector<int>& z);

/// All DAGs sharing g's skeleton and v-structures, by exhaustive orientation
/// of the skeleton filtered through acyclicity and Markov equivalence.
/// Deterministic order; always contains g.
std::vector<Dag> enumerate_markov_equivalence_class(const Dag& g, int max_vars = 8);

}  // namespace iklkit
