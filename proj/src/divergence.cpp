#include "iklkit/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iklkit {

namespace {

// Term for variable i: E_{outer(pa_i)}[ KL(p^e(X_i | pa_i) || q(X_i | pa_i)) ].
NonNegReal variable_term(const JointTable& pe, const JointTable& q_joint, int i,
                         const std::vector<int>& parents) {
    return expected_conditional_kl(pe, pe, q_joint, i, parents);
}

KlDecomposition decompose_with_graph(const Environment& p_env, const JointTable& q_joint,
                                     const Dag& g, bool with_residual) {
    const JointTable& pe = p_env.distribution();
    KlDecomposition out;
    for (int i = 0; i < g.num_vars(); ++i) {
        const NonNegReal term = variable_term(pe, q_joint, i, g.parents(i));
        if (p_env.is_target(i)) {
            out.intervened_terms.emplace(i, term);
        } else {
            out.unintervened_terms.emplace(i, term);
        }
    }
    out.residual = with_residual ? kl(pe, markov_project(pe, g)) : NonNegReal(0.0);
    out.total = out.residual;
    for (const auto& [i, t] : out.intervened_terms) out.total += t;
    for (const auto& [i, t] : out.unintervened_terms) out.total += t;
    return out;
}

std::vector<int> relative_indices(const std::vector<int>& subset, const std::vector<int>& within) {
    std::vector<int> out;
    out.reserve(subset.size());
    for (int v : subset) {
        const auto it = std::lower_bound(within.begin(), within.end(), v);
        out.push_back(static_cast<int>(it - within.begin()));
    }
    return out;
}

}  // namespace

NonNegReal KlDecomposition::ikl_contribution() const {
    NonNegReal c = residual;
    for (const auto& [i, t] : unintervened_terms) c += t;
    return c;
}

KlDecomposition decompose_kl_shared(const Environment& p_env, const Cgm& q, const Dag& g,
                                    double markov_tol) {
    if (!(p_env.space() == q.space())) {
        throw InputError("environment and model variable spaces do not match");
    }
    if (g.num_vars() != q.space().num_vars()) {
        throw InputError("shared graph dimension mismatch");
    }
    const JointTable q_joint = joint_from_model(q);
    if (!(g == q.graph()) && !is_markov(q_joint, g, markov_tol)) {
        throw InputError("model is not Markovian w.r.t. the shared graph; "
                         "use the general decomposition");
    }
    return decompose_with_graph(p_env, q_joint, g, /*with_residual=*/false);
}

KlDecomposition decompose_kl_general(const Environment& p_env, const Cgm& q) {
    if (!(p_env.space() == q.space())) {
        throw InputError("environment and model variable spaces do not match");
    }
    const JointTable q_joint = joint_from_model(q);
    return decompose_with_graph(p_env, q_joint, q.graph(), /*with_residual=*/true);
}

IklReport ikl(const EnvironmentSet& envs, const Cgm& q, double epsilon) {
    if (!(envs.space() == q.space())) {
        throw InputError("environment set and model variable spaces do not match");
    }
    IklReport report;
    report.epsilon = epsilon;
    NonNegReal acc(0.0);
    for (const Environment& e : envs.environments()) {
        KlDecomposition dec = decompose_kl_general(e, q);
        acc += dec.ikl_contribution();
        report.per_environment.emplace(e.label(), std::move(dec));
    }
    report.ikl_value = weighted(1.0 / static_cast<double>(envs.size()), acc);
    report.equivalent = !report.ikl_value.is_infinite() && report.ikl_value.value() <= epsilon;
    return report;
}

IklReport restricted_ikl(const EnvironmentSet& envs, const Cgm& q, const EdgeSet& identified,
                         const std::vector<int>& observed, double epsilon) {
    if (!(envs.space() == q.space())) {
        throw InputError("environment set and model variable spaces do not match");
    }
    std::vector<int> obs = observed;
    std::sort(obs.begin(), obs.end());
    if (obs.empty() || std::adjacent_find(obs.begin(), obs.end()) != obs.end()) {
        throw InputError("observed set must be nonempty and duplicate-free");
    }
    for (int v : obs) {
        if (v < 0 || v >= q.space().num_vars()) {
            throw InputError("observed variable " + std::to_string(v) + " out of range");
        }
    }
    const EdgeSet skel = q.graph().skeleton();
    for (const auto& [a, b] : identified.edges()) {
        if (!std::binary_search(obs.begin(), obs.end(), a) ||
            !std::binary_search(obs.begin(), obs.end(), b) || !skel.contains(a, b)) {
            throw InputError("identified edge (" + std::to_string(a) + ", " + std::to_string(b) +
                             ") lies outside the observed subgraph of the model");
        }
    }

    // Induced subgraph and marginal model over the observed variables.
    std::vector<Edge> sub_edges;
    for (const auto& [i, j] : q.graph().edges()) {
        if (std::binary_search(obs.begin(), obs.end(), i) &&
            std::binary_search(obs.begin(), obs.end(), j)) {
            const auto rel = relative_indices({i, j}, obs);
            sub_edges.emplace_back(rel[0], rel[1]);
        }
    }
    const Dag g_sub(static_cast<int>(obs.size()), sub_edges);
    const JointTable q_sub = marginalize(joint_from_model(q), obs);

    std::vector<int> incident;  // observed variables touched by an identified edge
    for (int v : obs) {
        for (const auto& [a, b] : identified.edges()) {
            if (a == v || b == v) {
                incident.push_back(v);
                break;
            }
        }
    }

    IklReport report;
    report.epsilon = epsilon;
    NonNegReal acc(0.0);
    for (const Environment& e : envs.environments()) {
        const JointTable pe_sub = marginalize(e.distribution(), obs);
        KlDecomposition dec;
        for (int v : incident) {
            if (e.is_target(v)) continue;
            const auto rel = relative_indices({v}, obs);
            const NonNegReal term =
                variable_term(pe_sub, q_sub, rel[0], g_sub.parents(rel[0]));
            dec.unintervened_terms.emplace(v, term);
            dec.total += term;
        }
        acc += dec.ikl_contribution();
        report.per_environment.emplace(e.label(), std::move(dec));
    }
    report.ikl_value = weighted(1.0 / static_cast<double>(envs.size()), acc);
    report.equivalent = !report.ikl_value.is_infinite() && report.ikl_value.value() <= epsilon;
    return report;
}

ConditionReport check_sufficient_conditions(const Dag& g_q, const EnvironmentSet& envs) {
    ConditionReport report;
    report.all_satisfied = true;
    for (const auto& [i, j] : g_q.edges()) {
        EdgeWitness witness;
        for (const Environment& e : envs.environments()) {
            if (!e.is_target(j)) {
                std::vector<int> z = g_q.parents(j);
                z.erase(std::remove(z.begin(), z.end(), i), z.end());
                if (auto path = find_unblocked_directed_path(g_q, e.targets(), i, z)) {
                    witness = {true, e.label(), 1, std::move(*path)};
                    break;
                }
            }
            if (!e.is_target(i)) {
                if (auto path = find_unblocked_directed_path(g_q, e.targets(), j,
                                                             g_q.parents(i))) {
                    witness = {true, e.label(), 2, std::move(*path)};
                    break;
                }
            }
        }
        if (witness.satisfied) {
            report.identified_edges.insert(i, j);
        } else {
            report.all_satisfied = false;
        }
        report.per_edge.emplace(Edge{i, j}, std::move(witness));
    }
    return report;
}

FlippedEdgeChange flipped_edge_change_predicate(const Dag& g_p, const Dag& g_q,
                                                const Environment& env, Edge edge) {
    if (g_p.num_vars() != g_q.num_vars()) {
        throw InputError("graphs have different variable counts");
    }
    if (!(g_p.skeleton() == g_q.skeleton())) {
        throw InputError("flipped-edge predicate requires a shared skeleton");
    }
    const auto [i, j] = edge;
    if (!g_q.has_edge(i, j) || !g_p.has_edge(j, i)) {
        throw InputError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is not flipped between the graphs");
    }
    std::vector<int> z_j = g_q.parents(j);
    z_j.erase(std::remove(z_j.begin(), z_j.end(), i), z_j.end());
    FlippedEdgeChange out;
    out.changes_j = has_unblocked_directed_path(g_p, env.targets(), i, z_j);
    out.changes_i = has_unblocked_directed_path(g_p, env.targets(), j, g_q.parents(i));
    return out;
}

BoundReport estimation_bound_report(const EnvironmentSet& envs, const Cgm& q,
                                    std::span<const double> f, double bound_b, double rho) {
    if (bound_b <= 0.0) throw InputError("statistic bound B must be positive");
    if (rho <= 0.0 || rho >= 1.0) throw InputError("rho must lie in (0, 1)");
    if (f.size() != q.space().num_cells()) {
        throw InputError("statistic length does not match the joint table");
    }
    for (double v : f) {
        if (std::abs(v) > bound_b) {
            throw InputError("statistic exceeds its stated bound B");
        }
    }

    BoundReport report;
    report.rho = rho;
    report.epsilon = ikl(envs, q).ikl_value.value();
    report.bound = bound_b * std::sqrt(report.epsilon) / rho;
    std::size_t within = 0;
    for (const Environment& e : envs.environments()) {
        const Cgm qe_model = build_shifted_model(q, e);
        const JointTable qe = joint_from_model(qe_model);
        EnvironmentBound eb;
        eb.label = e.label();
        eb.deviation = std::abs(expectation(e.distribution(), f) - expectation(qe, f));
        eb.kl_value = kl(e.distribution(), qe).value();
        eb.tv = total_variation(e.distribution(), qe);
        eb.within = eb.deviation <= report.bound;
        if (eb.within) ++within;
        report.per_environment.push_back(std::move(eb));
    }
    report.fraction_within =
        static_cast<double>(within) / static_cast<double>(envs.size());
    report.holds = report.fraction_within + 1e-12 >= 1.0 - rho;
    return report;
}

std::vector<Dag> OrientationReport::survivors() const {
    std::vector<Dag> out;
    for (const OrientationCandidate& c : candidates) {
        if (c.survivor) out.push_back(c.dag);
    }
    return out;
}

OrientationReport orient_edges(const EnvironmentSet& envs, const JointTable& p_joint,
                               const Dag& g_q, double epsilon, int mec_limit) {
    if (!(envs.space() == p_joint.space())) {
        throw InputError("environment set and reference joint spaces do not match");
    }
    if (g_q.num_vars() != p_joint.space().num_vars()) {
        throw InputError("candidate graph dimension mismatch");
    }

    OrientationReport report;
    auto score = [&](const Dag& g) {
        OrientationCandidate cand{g, 0.0, 0.0, false};
        for (const Environment& e : envs.environments()) {
            for (int i = 0; i < g.num_vars(); ++i) {
                if (e.is_target(i)) continue;
                const double t =
                    variable_term(e.distribution(), p_joint, i, g.parents(i)).value();
                cand.total_term += t;
                cand.max_term = std::max(cand.max_term, t);
            }
        }
        cand.survivor = cand.max_term <= epsilon;
        return cand;
    };

    // Flag provably-wrong parent sets under the candidate graph itself.
    for (const Environment& e : envs.environments()) {
        for (int i = 0; i < g_q.num_vars(); ++i) {
            if (e.is_target(i)) continue;
            const double t =
                variable_term(e.distribution(), p_joint, i, g_q.parents(i)).value();
            if (t > epsilon) report.mismatched_parent_vars.insert(i);
        }
    }

    for (const Dag& member : enumerate_markov_equivalence_class(g_q, mec_limit)) {
        report.candidates.push_back(score(member));
    }
    std::stable_sort(report.candidates.begin(), report.candidates.end(),
                     [](const OrientationCandidate& a, const OrientationCandidate& b) {
                         if (a.survivor != b.survivor) return a.survivor;
                         return a.total_term < b.total_term;
                     });
    return report;
}

}  // namespace iklkit
