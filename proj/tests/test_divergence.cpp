#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "iklkit/divergence.hpp"
#include "iklkit/oracle.hpp"

using namespace iklkit;
using namespace testutil;

namespace {

// Fork environments from the partial-observability example: e1 cuts X3 loose
// from X1, e2 shifts the X2 mechanism.
EnvironmentSet example1_envs(const Cgm& p_model) {
    return EnvironmentSet(
        {environment_from_interventions(
             p_model, "e1",
             {Intervention::replace(mech(p_model.space(), 2, {0}, {0.5, 0.5, 0.5, 0.5}))}),
         environment_from_interventions(
             p_model, "e2",
             {Intervention::replace(mech(p_model.space(), 1, {0}, {0.1, 0.9, 0.6, 0.4}))})});
}

// Singleton soft shifts on every variable plus the empty intervention.
EnvironmentSet covering_envs(const Cgm& p_model, const oracle::OracleConfig& cfg) {
    std::vector<Environment> envs;
    envs.push_back(Environment("e0", p_model.space(), {}, joint_from_model(p_model)));
    for (int k = 0; k < p_model.space().num_vars(); ++k) {
        const Cgm shifted = oracle::with_shifted_mechanism(cfg, p_model, k);
        envs.push_back(environment_from_interventions(
            p_model, "i" + std::to_string(k),
            {Intervention::replace(shifted.mechanism(k))}));
    }
    return EnvironmentSet(std::move(envs));
}

}  // namespace

TEST_CASE("decompose_kl_shared") {
    const Cgm p_model = fork_model();
    const JointTable p = joint_from_model(p_model);

    SUBCASE("empty intervention with matching model gives all-zero terms") {
        const Environment e("obs", p_model.space(), {}, p);
        const KlDecomposition dec = decompose_kl_shared(e, p_model, p_model.graph());
        CHECK(dec.intervened_terms.empty());
        for (const auto& [i, t] : dec.unintervened_terms) CHECK(t.value() <= 1e-12);
        CHECK(dec.residual.value() == 0.0);
        CHECK(dec.total.value() <= 1e-12);
    }

    SUBCASE("totals equal the brute-force joint KL on random shared-graph instances") {
        oracle::OracleConfig cfg;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            cfg.seed = seed;
            const Cgm pm = oracle::random_cgm(cfg);
            const Cgm qm = oracle::random_cgm_on(cfg, pm.graph(), pm.space(), 31);
            const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 3);
            const JointTable qj = oracle::brute_force_joint(qm);
            for (const Environment& e : envs.environments()) {
                const KlDecomposition dec = decompose_kl_shared(e, qm, pm.graph());
                const double direct = oracle::brute_force_kl(e.distribution(), qj).value();
                CHECK(std::abs(dec.total.value() - direct) <= 1e-9);
                // Intervened terms sit exactly on the targets.
                for (int t : e.targets()) CHECK(dec.intervened_terms.count(t) == 1);
                CHECK(dec.intervened_terms.size() == e.targets().size());
            }
        }
    }

    SUBCASE("two-marginal identity of the partial-observability example") {
        oracle::OracleConfig cfg;
        cfg.seed = 9;
        // Any Q Markovian w.r.t. the fork graph, not equal to P.
        const Cgm q_model = oracle::random_cgm_on(cfg, p_model.graph(), p_model.space());
        const JointTable q = joint_from_model(q_model);
        const EnvironmentSet envs = example1_envs(p_model);

        const double lhs = kl(marginalize(p, {0, 1}), marginalize(q, {0, 1})).value() +
                           kl(marginalize(p, {0, 2}), marginalize(q, {0, 2})).value();
        const double rhs = 2.0 * ikl(envs, q_model).ikl_value.value();
        CHECK(std::abs(lhs - rhs) <= 1e-9);
    }

    SUBCASE("non-Markovian model is rejected") {
        // A strongly correlated pair is not Markovian w.r.t. the edgeless graph.
        const VariableSpace s2 = binary(2);
        const Cgm corr(s2, Dag(2, {{0, 1}}),
                       {mech(s2, 0, {}, {0.5, 0.5}), mech(s2, 1, {0}, {0.95, 0.05, 0.1, 0.9})});
        const Environment e("obs", s2, {}, joint_from_model(corr));
        CHECK_THROWS_AS(decompose_kl_shared(e, corr, Dag(2, {})), InputError);
        // A Markovian supergraph is accepted.
        const KlDecomposition dec = decompose_kl_shared(e, corr, Dag(2, {{0, 1}}));
        CHECK(dec.total.value() <= 1e-12);
    }
}

TEST_CASE("decompose_kl_general") {
    oracle::OracleConfig cfg;

    SUBCASE("complete-DAG model has zero residual for every environment") {
        cfg.seed = 4;
        const Cgm pm = oracle::random_cgm(cfg);
        const int d = pm.space().num_vars();
        std::vector<Edge> complete_edges;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) complete_edges.emplace_back(i, j);
        }
        const Cgm q = model_with_graph(joint_from_model(pm), Dag(d, complete_edges));
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 3);
        for (const Environment& e : envs.environments()) {
            CHECK(decompose_kl_general(e, q).residual.value() <= 1e-12);
        }
    }

    SUBCASE("Markovian case reduces to the shared decomposition") {
        cfg.seed = 6;
        const Cgm pm = oracle::random_cgm(cfg);
        const Cgm qm = oracle::random_cgm_on(cfg, pm.graph(), pm.space(), 8);
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 3);
        for (const Environment& e : envs.environments()) {
            const KlDecomposition general = decompose_kl_general(e, qm);
            const KlDecomposition shared = decompose_kl_shared(e, qm, pm.graph());
            CHECK(general.residual.value() <= 1e-9);
            CHECK(std::abs(general.total.value() - shared.total.value()) <= 1e-9);
        }
    }

    SUBCASE("identity against the oracle with independent random graphs") {
        for (std::uint64_t seed = 60; seed < 100; ++seed) {
            cfg.seed = seed;
            const Cgm pm = oracle::random_cgm(cfg);
            const int d = pm.space().num_vars();
            const Dag gq = oracle::random_dag(cfg, d, 17);
            const Cgm qm = oracle::random_cgm_on(cfg, gq, pm.space(), 18);
            const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 3);
            for (const Environment& e : envs.environments()) {
                CHECK(oracle::verify_decomposition(e, qm) <= 1e-9);
                const KlDecomposition dec = decompose_kl_general(e, qm);
                const double direct =
                    kl(e.distribution(), joint_from_model(qm)).value();
                CHECK(std::abs(dec.total.value() - direct) <= 1e-9);
            }
        }
    }

    SUBCASE("infinite totals stay consistent with the direct KL") {
        // Q(X1 = 1 | x0) = 0 everywhere, but P reaches X1 = 1.
        const VariableSpace s2 = binary(2);
        const Cgm q(s2, Dag(2, {{0, 1}}),
                    {mech(s2, 0, {}, {0.5, 0.5}), mech(s2, 1, {0}, {1.0, 0.0, 1.0, 0.0})});
        const Cgm p_model(s2, Dag(2, {{0, 1}}),
                          {mech(s2, 0, {}, {0.5, 0.5}), mech(s2, 1, {0}, {0.6, 0.4, 0.3, 0.7})});
        const Environment e("obs", s2, {}, joint_from_model(p_model));
        const KlDecomposition dec = decompose_kl_general(e, q);
        CHECK(dec.total.is_infinite());
        CHECK(kl(e.distribution(), joint_from_model(q)).is_infinite());
        CHECK(dec.unintervened_terms.at(1).is_infinite());
    }
}

TEST_CASE("ikl") {
    oracle::OracleConfig cfg;

    SUBCASE("matching models are interventionally equivalent") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            cfg.seed = seed;
            const Cgm pm = oracle::random_cgm(cfg);
            const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 4);
            const IklReport report = ikl(envs, pm);
            CHECK(report.ikl_value.value() <= 1e-9);
            CHECK(report.equivalent);
        }
    }

    SUBCASE("partial-observability example: zero iff the mechanism matches") {
        const Cgm p_model = fork_model();
        const EnvironmentSet envs = example1_envs(p_model);
        CHECK(ikl(envs, p_model).ikl_value.value() <= 1e-9);
        CHECK(ikl(envs, p_model).equivalent);

        const Cgm perturbed = p_model.with_mechanism(
            mech(p_model.space(), 1, {0}, {0.55, 0.45, 0.35, 0.65}));
        const IklReport report = ikl(envs, perturbed);
        CHECK(report.ikl_value.value() > 1e-6);
        CHECK_FALSE(report.equivalent);
        // The X2 term dominates in the environment that left X2 un-intervened.
        const KlDecomposition& dec = report.per_environment.at("e1");
        CHECK(dec.unintervened_terms.at(1).value() >
              dec.unintervened_terms.at(0).value());
    }

    SUBCASE("an included empty intervention lower-bounds the IKL by KL/|E|") {
        for (std::uint64_t seed = 200; seed < 215; ++seed) {
            cfg.seed = seed;
            const Cgm pm = oracle::random_cgm(cfg);
            const Cgm qm = oracle::random_cgm_on(cfg, pm.graph(), pm.space(), 5);
            const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 4);
            const double joint_kl =
                kl(joint_from_model(pm), joint_from_model(qm)).value();
            CHECK(ikl(envs, qm).ikl_value.value() >=
                  joint_kl / static_cast<double>(envs.size()) - 1e-12);
        }
    }
}

TEST_CASE("Lemma-8 style equivalence under a shared graph") {
    oracle::OracleConfig cfg;
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        cfg.seed = seed;
        const Cgm pm = oracle::random_cgm(cfg);
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 4);

        // Q == P: zero IKL and (numerically) identical joints.
        CHECK(ikl(envs, pm).ikl_value.value() <= 1e-9);

        // One mechanism perturbed by TV >= 0.05 on every row: IKL bounded away
        // from zero and joints visibly different.
        const int target = static_cast<int>(seed) % pm.space().num_vars();
        const Cgm qm = oracle::with_shifted_mechanism(cfg, pm, target, 99);
        CHECK(ikl(envs, qm).ikl_value.value() >= 1e-6);
        CHECK(max_abs_diff(joint_from_model(pm), joint_from_model(qm)) > 1e-6);
    }
}

TEST_CASE("restricted_ikl reproduces the five-variable example") {
    const Cgm p_model = five_model();
    const JointTable p = joint_from_model(p_model);
    const Cgm q_model = model_with_graph(p, five_right());

    SUBCASE("correctly oriented edge: zero restricted divergence") {
        const EnvironmentSet envs({environment_from_interventions(
            p_model, "e1",
            {Intervention::replace(mech(p_model.space(), 4, {2}, {0.5, 0.5, 0.95, 0.05}))},
            std::vector<int>{1, 2, 4})});
        EdgeSet identified;
        identified.insert(2, 4);
        const IklReport r = restricted_ikl(envs, q_model, identified, {1, 2, 4});
        CHECK(r.ikl_value.value() <= 1e-9);
        CHECK(r.equivalent);

        // Still zero when the unobserved X4 is intervened as well: it is never
        // conditioned upon.
        const EnvironmentSet envs2({environment_from_interventions(
            p_model, "e1b",
            {Intervention::replace(mech(p_model.space(), 4, {2}, {0.5, 0.5, 0.95, 0.05})),
             Intervention::replace(
                 mech(p_model.space(), 3, {1, 2},
                      {0.2, 0.8, 0.7, 0.3, 0.15, 0.85, 0.6, 0.4}))},
            std::vector<int>{1, 2, 4})});
        CHECK(restricted_ikl(envs2, q_model, identified, {1, 2, 4}).ikl_value.value() <= 1e-9);
    }

    SUBCASE("flipped edge shows up; clean X2 term stays zero") {
        const EnvironmentSet envs({environment_from_interventions(
            p_model, "e2",
            {Intervention::replace(mech(p_model.space(), 2, {1}, {0.35, 0.65, 0.85, 0.15}))},
            std::vector<int>{1, 2, 3})});
        EdgeSet identified;
        identified.insert(3, 2);
        identified.insert(1, 2);
        const IklReport r = restricted_ikl(envs, q_model, identified, {1, 2, 3});
        const KlDecomposition& dec = r.per_environment.at("e2");
        CHECK(dec.unintervened_terms.at(3).value() >= 1e-6);  // mis-oriented X3-X4
        CHECK(dec.unintervened_terms.at(1).value() <= 1e-9);  // X2 is clean
        CHECK(r.ikl_value.value() >= 1e-6);
    }

    SUBCASE("an additional shift on the unobserved X1 pollutes the X2 term") {
        const EnvironmentSet envs({environment_from_interventions(
            p_model, "e2x1",
            {Intervention::replace(mech(p_model.space(), 2, {1}, {0.35, 0.65, 0.85, 0.15})),
             Intervention::replace(mech(p_model.space(), 0, {}, {0.75, 0.25}))},
            std::vector<int>{1, 2, 3})});
        EdgeSet identified;
        identified.insert(3, 2);
        identified.insert(1, 2);
        const IklReport r = restricted_ikl(envs, q_model, identified, {1, 2, 3});
        CHECK(r.per_environment.at("e2x1").unintervened_terms.at(1).value() >= 1e-6);
    }

    SUBCASE("empty identified set gives zero; bad edges are rejected") {
        const EnvironmentSet envs({environment_from_interventions(
            p_model, "e1",
            {Intervention::replace(mech(p_model.space(), 4, {2}, {0.5, 0.5, 0.95, 0.05}))})});
        CHECK(restricted_ikl(envs, q_model, EdgeSet{}, {1, 2, 4}).ikl_value.value() == 0.0);
        EdgeSet outside;
        outside.insert(0, 4);  // not a skeleton edge
        CHECK_THROWS_AS(restricted_ikl(envs, q_model, outside, {0, 1, 2, 3, 4}), InputError);
        EdgeSet unobserved;
        unobserved.insert(2, 3);
        CHECK_THROWS_AS(restricted_ikl(envs, q_model, unobserved, {1, 2, 4}), InputError);
    }
}

TEST_CASE("check_sufficient_conditions") {
    const VariableSpace s2 = binary(2);

    SUBCASE("single edge, intervention on the tail") {
        const EnvironmentSet envs({Environment("e", s2, {0}, std::nullopt)});
        const ConditionReport r = check_sufficient_conditions(Dag(2, {{0, 1}}), envs);
        CHECK(r.all_satisfied);
        const EdgeWitness& w = r.per_edge.at({0, 1});
        CHECK(w.condition == 1);
        CHECK(w.path == std::vector<int>{0});
    }

    SUBCASE("single edge, intervention on the head") {
        const EnvironmentSet envs({Environment("e", s2, {1}, std::nullopt)});
        const ConditionReport r = check_sufficient_conditions(Dag(2, {{0, 1}}), envs);
        CHECK(r.all_satisfied);
        CHECK(r.per_edge.at({0, 1}).condition == 2);
    }

    SUBCASE("five-variable right graph with shifts on X5 and X3") {
        const VariableSpace s5 = binary(5);
        const EnvironmentSet envs({Environment("e1", s5, {4}, std::nullopt),
                                   Environment("e2", s5, {2}, std::nullopt)});
        const ConditionReport r = check_sufficient_conditions(five_right(), envs);
        CHECK(r.per_edge.at({2, 4}).satisfied);
        CHECK(r.per_edge.at({2, 4}).env_label == "e1");
        const EdgeWitness& flipped = r.per_edge.at({3, 2});
        CHECK(flipped.satisfied);
        CHECK(flipped.env_label == "e2");
        CHECK(flipped.condition == 2);
        CHECK(r.identified_edges.contains(2, 3));
        CHECK(r.identified_edges.contains(2, 4));
        CHECK_FALSE(r.all_satisfied);  // 0 -> 1 has no witness here
        CHECK_FALSE(r.per_edge.at({0, 1}).satisfied);
    }

    SUBCASE("the empty intervention alone witnesses nothing") {
        const EnvironmentSet null_only({Environment("e0", s2, {}, std::nullopt)});
        const ConditionReport r = check_sufficient_conditions(Dag(2, {{0, 1}}), null_only);
        CHECK_FALSE(r.all_satisfied);
        CHECK(r.identified_edges.empty());
    }

    SUBCASE("adding environments never shrinks the identified set") {
        oracle::OracleConfig cfg;
        std::mt19937_64 rng(17);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            cfg.seed = seed;
            const Dag g = oracle::random_dag(cfg, 5);
            const VariableSpace s5 = binary(5);
            std::vector<Environment> pool;
            for (int k = 0; k < 5; ++k) {
                std::vector<int> targets;
                for (int v = 0; v < 5; ++v) {
                    if (rng() % 2 == 0) targets.push_back(v);
                }
                pool.push_back(
                    Environment("e" + std::to_string(k), s5, targets, std::nullopt));
            }
            EdgeSet previous;
            for (std::size_t n = 1; n <= pool.size(); ++n) {
                const EnvironmentSet envs(
                    std::vector<Environment>(pool.begin(), pool.begin() + n));
                const EdgeSet current =
                    check_sufficient_conditions(g, envs).identified_edges;
                for (const auto& [a, b] : previous.edges()) CHECK(current.contains(a, b));
                previous = current;
            }
        }
    }
}

TEST_CASE("flipped_edge_change_predicate") {
    const VariableSpace s2 = binary(2);

    // Direct intervention on the tail changes the head's conditional.
    const FlippedEdgeChange direct = flipped_edge_change_predicate(
        Dag(2, {{1, 0}}), Dag(2, {{0, 1}}), Environment("e", s2, {0}, std::nullopt), {0, 1});
    CHECK(direct.changes_j);

    // Figure-2 flipped pair: shift on X3 fires clause (ii) for the X4 side.
    const VariableSpace s5 = binary(5);
    const FlippedEdgeChange fig2 = flipped_edge_change_predicate(
        five_left(), five_right(), Environment("e2", s5, {2}, std::nullopt), {3, 2});
    CHECK(fig2.changes_i);

    // No targets, no paths.
    const FlippedEdgeChange none = flipped_edge_change_predicate(
        Dag(2, {{1, 0}}), Dag(2, {{0, 1}}), Environment("e", s2, {}, std::nullopt), {0, 1});
    CHECK_FALSE(none.changes_i);
    CHECK_FALSE(none.changes_j);

    CHECK_THROWS_AS(flipped_edge_change_predicate(Dag(2, {{0, 1}}), Dag(2, {{0, 1}}),
                                                  Environment("e", s2, {}, std::nullopt),
                                                  {0, 1}),
                    InputError);
    CHECK_THROWS_AS(flipped_edge_change_predicate(Dag(2, {}), Dag(2, {{0, 1}}),
                                                  Environment("e", s2, {}, std::nullopt),
                                                  {0, 1}),
                    InputError);
}

TEST_CASE("estimation_bound_report") {
    oracle::OracleConfig cfg;
    cfg.seed = 21;
    cfg.max_vars = 4;

    SUBCASE("matching models: zero deviations, full fraction") {
        const Cgm pm = oracle::random_cgm(cfg);
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 5);
        const std::vector<double> f(pm.space().num_cells(), 0.7);
        const BoundReport r = estimation_bound_report(envs, pm, f, 1.0, 0.5);
        CHECK(r.epsilon <= 1e-9);
        for (const EnvironmentBound& e : r.per_environment) CHECK(e.deviation <= 1e-12);
        CHECK(r.fraction_within == 1.0);
        CHECK(r.holds);
    }

    SUBCASE("random models satisfy the bound and the per-environment Pinsker step") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            cfg.seed = 700 + seed;
            const Cgm pm = oracle::random_cgm(cfg);
            const Cgm qm = oracle::random_cgm_on(cfg, pm.graph(), pm.space(), 3);
            const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 6);
            std::vector<double> f(pm.space().num_cells());
            for (double& v : f) v = u(rng);
            for (const double rho : {0.3, 0.5}) {
                const BoundReport r = estimation_bound_report(envs, qm, f, 1.0, rho);
                CHECK(r.holds);
                for (const EnvironmentBound& e : r.per_environment) {
                    CHECK(e.tv <= std::sqrt(e.kl_value / 2.0) + 1e-12);
                }
            }
        }
    }

    SUBCASE("a constant statistic sees no deviation even between distinct models") {
        cfg.seed = 33;
        const Cgm pm = oracle::random_cgm(cfg);
        const Cgm qm = oracle::random_cgm_on(cfg, pm.graph(), pm.space(), 1);
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 5);
        const std::vector<double> f(pm.space().num_cells(), 0.9);
        const BoundReport r = estimation_bound_report(envs, qm, f, 1.0, 0.5);
        CHECK(r.epsilon > 1e-6);  // the models genuinely differ
        for (const EnvironmentBound& e : r.per_environment) CHECK(e.deviation <= 1e-12);
        CHECK(r.fraction_within == 1.0);
    }

    SUBCASE("input validation") {
        const Cgm pm = fork_model();
        const EnvironmentSet envs({Environment("e0", pm.space(), {}, joint_from_model(pm))});
        const std::vector<double> f(pm.space().num_cells(), 2.0);
        CHECK_THROWS_AS(estimation_bound_report(envs, pm, f, 1.0, 0.5), InputError);
        const std::vector<double> ok(pm.space().num_cells(), 0.5);
        CHECK_THROWS_AS(estimation_bound_report(envs, pm, ok, 1.0, 1.5), InputError);
    }
}

TEST_CASE("orient_edges") {
    oracle::OracleConfig cfg;
    cfg.seed = 11;

    SUBCASE("the generating graph always survives") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            cfg.seed = 800 + seed;
            cfg.max_vars = 4;
            const Cgm pm = oracle::random_cgm(cfg);
            const EnvironmentSet envs = covering_envs(pm, cfg);
            const OrientationReport r =
                orient_edges(envs, joint_from_model(pm), pm.graph());
            bool found = false;
            for (const Dag& s : r.survivors()) {
                if (s == pm.graph()) found = true;
            }
            CHECK(found);
        }
    }

    SUBCASE("five-variable example: flipped edge flagged, left graph exonerated") {
        const Cgm p_model = five_model();
        const JointTable p = joint_from_model(p_model);
        const EnvironmentSet e2_only({environment_from_interventions(
            p_model, "e2",
            {Intervention::replace(mech(p_model.space(), 2, {1}, {0.35, 0.65, 0.85, 0.15}))})});
        const OrientationReport r = orient_edges(e2_only, p, five_right());
        // X4's parent set under the right graph is provably wrong.
        CHECK(r.mismatched_parent_vars.count(3) == 1);
        // The left graph scores zero; the right graph does not survive.
        bool left_survives = false, right_survives = false;
        for (const Dag& s : r.survivors()) {
            if (s == five_left()) left_survives = true;
            if (s == five_right()) right_survives = true;
        }
        CHECK(left_survives);
        CHECK_FALSE(right_survives);

        // With shifts on every variable the left graph is the sole survivor.
        const EnvironmentSet full = covering_envs(p_model, cfg);
        const OrientationReport rf = orient_edges(full, p, five_right());
        REQUIRE(rf.survivors().size() == 1);
        CHECK(rf.survivors().front() == five_left());
    }

    SUBCASE("under-identified environments keep the ambiguity") {
        const VariableSpace s3 = binary(3);
        const Cgm chain(s3, Dag(3, {{0, 1}, {1, 2}}),
                        {mech(s3, 0, {}, {0.3, 0.7}), mech(s3, 1, {0}, {0.8, 0.2, 0.25, 0.75}),
                         mech(s3, 2, {1}, {0.6, 0.4, 0.15, 0.85})});
        const JointTable p = joint_from_model(chain);
        const EnvironmentSet empty_only({Environment("e0", s3, {}, p)});
        const OrientationReport r = orient_edges(empty_only, p, chain.graph());
        CHECK(r.survivors().size() == 3);  // the whole chain MEC remains
        CHECK(r.mismatched_parent_vars.empty());
    }
}

TEST_CASE("Theorem-13 style equivalence on constructed triples") {
    oracle::OracleConfig cfg;
    cfg.max_vars = 4;
    int done = 0;
    for (std::uint64_t seed = 0; done < 10 && seed < 100; ++seed) {
        cfg.seed = 900 + seed;
        const Cgm pm = oracle::random_cgm(cfg);
        const auto mec = enumerate_markov_equivalence_class(pm.graph());
        // Need a Markov-equivalent graph with at least one flipped edge.
        const Dag* flipped = nullptr;
        for (const Dag& m : mec) {
            if (!(m == pm.graph())) {
                flipped = &m;
                break;
            }
        }
        if (flipped == nullptr) continue;
        ++done;

        const EnvironmentSet envs = covering_envs(pm, cfg);
        CHECK(check_sufficient_conditions(*flipped, envs).all_satisfied);

        const JointTable p = joint_from_model(pm);
        // (a) identical models: equivalent.
        CHECK(ikl(envs, pm).ikl_value.value() <= 1e-9);
        // (b) same distribution over the flipped graph: bounded away from zero.
        const Cgm q_flipped = model_with_graph(p, *flipped);
        CHECK(ikl(envs, q_flipped).ikl_value.value() >= 1e-6);
        // (c) different distribution: positive as well.
        const Cgm q_other = oracle::random_cgm_on(cfg, *flipped, pm.space(), 404);
        CHECK(ikl(envs, q_other).ikl_value.value() >= 1e-6);
    }
    CHECK(done == 10);
}

TEST_CASE("Theorem-10 identity between IKL and shifted-model KL averages") {
    oracle::OracleConfig cfg;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = 1000 + seed;
        const Cgm pm = oracle::random_cgm(cfg);
        const Dag gq = oracle::random_dag(cfg, pm.space().num_vars(), 2);
        const Cgm qm = oracle::random_cgm_on(cfg, gq, pm.space(), 3);
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 4);
        double avg = 0.0;
        for (const Environment& e : envs.environments()) {
            avg += kl(e.distribution(), joint_from_model(build_shifted_model(qm, e))).value();
        }
        avg /= static_cast<double>(envs.size());
        CHECK(std::abs(avg - ikl(envs, qm).ikl_value.value()) <= 1e-9);
    }
}
