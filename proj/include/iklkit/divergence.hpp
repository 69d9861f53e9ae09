#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "iklkit/environment.hpp"

namespace iklkit {

/// Chain-rule decomposition of KL(P^e || Q) into per-variable expected
/// conditional divergences plus a residual non-Markovianity term.
struct KlDecomposition {
    std::map<int, NonNegReal> intervened_terms;
    std::map<int, NonNegReal> unintervened_terms;
    NonNegReal residual;
    NonNegReal total;

    // The part that enters the IKL average: un-intervened terms + residual.
    NonNegReal ikl_contribution() const;
};

/// Shared-graph decomposition: conditioning sets come from g and Q must be
/// Markovian w.r.t. g (automatic when g is q's own graph); no residual term.
KlDecomposition decompose_kl_shared(const Environment& p_env, const Cgm& q, const Dag& g,
                                    double markov_tol = 1e-9);

/// General decomposition: conditioning sets from q's graph, residual
/// KL(P^e || pi_{G_Q}(P^e)).
KlDecomposition decompose_kl_general(const Environment& p_env, const Cgm& q);

struct IklReport {
    std::map<std::string, KlDecomposition> per_environment;
    NonNegReal ikl_value;
    bool equivalent = false;
    double epsilon = 1e-9;
};

/// Interventional KL divergence: average over environments of the
/// un-intervened conditional terms plus the residual. `equivalent` holds when
/// the value is at most epsilon.
IklReport ikl(const EnvironmentSet& envs, const Cgm& q, double epsilon = 1e-9);

/// Restricted IKL under partial observability: distributions and the model
/// are marginalized to `observed`, and only un-intervened variables incident
/// to an edge of `identified` contribute. Terms are keyed by the original
/// variable indices; there is no residual.
IklReport restricted_ikl(const EnvironmentSet& envs, const Cgm& q, const EdgeSet& identified,
                         const std::vector<int>& observed, double epsilon = 1e-9);

struct EdgeWitness {
    bool satisfied = false;
    std::string env_label;
    int condition = 0;       // 1 or 2, the clause that fired
    std::vector<int> path;   // unblocked directed path, target .. endpoint
};

struct ConditionReport {
    std::map<Edge, EdgeWitness> per_edge;  // keyed by the directed edges of g_q
    bool all_satisfied = false;
    EdgeSet identified_edges;              // E_E: edges with a witness
};

/// Edge-identifiability conditions: an edge i -> j of g_q is witnessed by an
/// environment e when either
///   (i)  an unblocked directed path from I_e reaches i given PA_j \ {i}
///        and j is not intervened, or
///   (ii) such a path reaches j given PA_i and i is not intervened.
/// Environments are scanned in order, clause (i) before (ii); the first
/// witness is recorded.
ConditionReport check_sufficient_conditions(const Dag& g_q, const EnvironmentSet& envs);

struct FlippedEdgeChange {
    bool changes_j = false;  // mechanism of X_j differs between P^e and P
    bool changes_i = false;
};

/// Sufficient (not necessary) conditions for an edge flipped between g_p and
/// g_q to change the extracted conditionals under env's targets. Paths are
/// searched in g_p; `edge` must be i -> j in g_q and j -> i in g_p.
FlippedEdgeChange flipped_edge_change_predicate(const Dag& g_p, const Dag& g_q,
                                                const Environment& env, Edge edge);

struct EnvironmentBound {
    std::string label;
    double deviation = 0.0;  // |E_{P^e}[f] - E_{Q^e}[f]|
    double kl_value = 0.0;   // KL(P^e || Q^e)
    double tv = 0.0;         // total variation between P^e and Q^e
    bool within = false;
};

struct BoundReport {
    double epsilon = 0.0;  // the IKL value
    double rho = 0.0;
    double bound = 0.0;    // B * sqrt(epsilon) / rho
    std::vector<EnvironmentBound> per_environment;
    double fraction_within = 0.0;
    bool holds = false;    // fraction_within >= 1 - rho
};

/// Estimation guarantee: builds Q^e per environment and checks that at least
/// a 1 - rho fraction of environments keep |E_{P^e}[f] - E_{Q^e}[f]| within
/// B * sqrt(IKL) / rho. f holds one value per joint cell, bounded by B.
BoundReport estimation_bound_report(const EnvironmentSet& envs, const Cgm& q,
                                    std::span<const double> f, double bound_b, double rho);

struct OrientationCandidate {
    Dag dag;
    double total_term = 0.0;  // sum of all testable per-variable terms
    double max_term = 0.0;
    bool survivor = false;    // every testable term <= epsilon
};

struct OrientationReport {
    // Variables whose parent set under g_q is provably wrong: some environment
    // leaves them un-intervened yet their conditional term is positive.
    std::set<int> mismatched_parent_vars;
    std::vector<OrientationCandidate> candidates;  // survivors first, then by score
    std::vector<Dag> survivors() const;
};

/// Edge orientation over the Markov equivalence class of g_q, testing the
/// model (p_joint, G) for every member G: term(e, i) compares P^e(X_i | PA_i^G)
/// against P(X_i | PA_i^G) for un-intervened i.
OrientationReport orient_edges(const EnvironmentSet& envs, const JointTable& p_joint,
                               const Dag& g_q, double epsilon = 1e-9, int mec_limit = 8);

}  // namespace iklkit
