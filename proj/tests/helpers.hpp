#pragma once

#include <vector>

#include "iklkit/distribution.hpp"
#include "iklkit/environment.hpp"
#include "iklkit/graph.hpp"

namespace testutil {

using namespace iklkit;

// Root-cause fork X1 -> X2, X1 -> X3 (paper Figure 1, 0-based).
inline Dag fork3() { return Dag(3, {{0, 1}, {0, 2}}); }

// The five-variable Markov equivalent pair (paper Figure 2): the right graph
// flips the X3 -> X4 edge (indices 2 -> 3).
inline Dag five_left() { return Dag(5, {{0, 1}, {1, 2}, {2, 3}, {1, 3}, {2, 4}}); }
inline Dag five_right() { return Dag(5, {{0, 1}, {1, 2}, {3, 2}, {1, 3}, {2, 4}}); }

inline VariableSpace binary(int d) { return VariableSpace(std::vector<int>(d, 2)); }

inline Mechanism mech(const VariableSpace& space, int child, std::vector<int> parents,
                      std::vector<double> table) {
    std::vector<int> parent_cards;
    for (int p : parents) parent_cards.push_back(space.cardinality(p));
    return Mechanism(child, std::move(parents), space.cardinality(child),
                     std::move(parent_cards), std::move(table));
}

// Fixed faithful binary fork model used by the Example-1 style tests.
inline Cgm fork_model() {
    const VariableSpace space = binary(3);
    return Cgm(space, fork3(),
               {mech(space, 0, {}, {0.4, 0.6}),
                mech(space, 1, {0}, {0.7, 0.3, 0.2, 0.8}),
                mech(space, 2, {0}, {0.9, 0.1, 0.3, 0.7})});
}

// Fixed faithful binary model on the five-variable left graph.
inline Cgm five_model() {
    const VariableSpace space = binary(5);
    return Cgm(space, five_left(),
               {mech(space, 0, {}, {0.35, 0.65}),
                mech(space, 1, {0}, {0.8, 0.2, 0.25, 0.75}),
                mech(space, 2, {1}, {0.7, 0.3, 0.2, 0.8}),
                mech(space, 3, {1, 2}, {0.9, 0.1, 0.4, 0.6, 0.6, 0.4, 0.1, 0.9}),
                mech(space, 4, {2}, {0.75, 0.25, 0.3, 0.7})});
}

// Same joint refactored over a different (Markov-compatible) graph.
inline Cgm model_with_graph(const JointTable& joint, const Dag& g) {
    std::vector<Mechanism> mechs;
    for (int i = 0; i < g.num_vars(); ++i) {
        mechs.push_back(conditional(joint, i, g.parents(i)));
    }
    return Cgm(joint.space(), g, std::move(mechs));
}

inline double value_of(NonNegReal v) { return v.value(); }

}  // namespace testutil
