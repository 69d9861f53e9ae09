#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "iklkit/divergence.hpp"
#include "iklkit/oracle.hpp"

using namespace iklkit;
using namespace testutil;

TEST_CASE("brute_force_joint") {
    // Single-variable model copies the mechanism table.
    const VariableSpace s1({3});
    const Cgm one(s1, Dag(1, {}), {Mechanism(0, {}, 3, {}, {0.2, 0.3, 0.5})});
    const JointTable j = oracle::brute_force_joint(one);
    CHECK(j[0] == 0.2);
    CHECK(j[1] == 0.3);
    CHECK(j[2] == 0.5);

    // Uniform mechanisms give the uniform joint.
    const VariableSpace s3 = binary(3);
    const Cgm uniform(s3, Dag(3, {{0, 1}, {1, 2}}),
                      {mech(s3, 0, {}, {0.5, 0.5}), mech(s3, 1, {0}, {0.5, 0.5, 0.5, 0.5}),
                       mech(s3, 2, {1}, {0.5, 0.5, 0.5, 0.5})});
    const JointTable ju = oracle::brute_force_joint(uniform);
    for (std::size_t c = 0; c < 8; ++c) CHECK(ju[c] == doctest::Approx(0.125).epsilon(1e-15));

    // Cross-implementation agreement on random models.
    oracle::OracleConfig cfg;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        cfg.seed = seed;
        const Cgm m = oracle::random_cgm(cfg);
        CHECK(max_abs_diff(oracle::brute_force_joint(m), joint_from_model(m)) <= 1e-12);
    }
}

TEST_CASE("brute_force_kl") {
    const JointTable p(binary(1), {0.5, 0.5});
    CHECK(oracle::brute_force_kl(p, p).value() == 0.0);
    const JointTable point0(binary(1), {1.0, 0.0});
    const JointTable point1(binary(1), {0.0, 1.0});
    CHECK(oracle::brute_force_kl(point0, point1).is_infinite());

    oracle::OracleConfig cfg;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        cfg.seed = seed;
        const Cgm a = oracle::random_cgm(cfg);
        const Cgm b = oracle::random_cgm_on(cfg, a.graph(), a.space(), 1);
        const JointTable pa = oracle::brute_force_joint(a);
        const JointTable pb = oracle::brute_force_joint(b);
        CHECK(std::abs(oracle::brute_force_kl(pa, pb).value() - kl(pa, pb).value()) <= 1e-12);
    }
}

TEST_CASE("verify_decomposition") {
    oracle::OracleConfig cfg;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        cfg.seed = 2000 + seed;
        const Cgm pm = oracle::random_cgm(cfg);
        const Dag gq = oracle::random_dag(cfg, pm.space().num_vars(), 7);
        const Cgm qm = oracle::random_cgm_on(cfg, gq, pm.space(), 8);
        const EnvironmentSet envs = oracle::random_environment_set(cfg, pm, 2);
        for (const Environment& e : envs.environments()) {
            CHECK(oracle::verify_decomposition(e, qm) <= 1e-9);
        }
    }

    // Complete-DAG model: the residual block vanishes, identity still holds.
    cfg.seed = 5;
    const Cgm pm = oracle::random_cgm(cfg);
    const int d = pm.space().num_vars();
    std::vector<Edge> complete;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) complete.emplace_back(i, j);
    }
    const Cgm qc = model_with_graph(joint_from_model(pm), Dag(d, complete));
    const Environment e("obs", pm.space(), {}, oracle::brute_force_joint(pm));
    CHECK(oracle::verify_decomposition(e, qc) <= 1e-9);
    CHECK(decompose_kl_general(e, qc).residual.value() <= 1e-12);
}

TEST_CASE("random_cgm is deterministic, Markovian, and overwhelmingly faithful") {
    oracle::OracleConfig cfg;
    cfg.seed = 123;
    const Cgm a = oracle::random_cgm(cfg);
    const Cgm b = oracle::random_cgm(cfg);
    CHECK(a.graph() == b.graph());
    for (int i = 0; i < a.space().num_vars(); ++i) CHECK(a.mechanism(i) == b.mechanism(i));

    int faithful = 0;
    const int draws = 300;
    for (int k = 0; k < draws; ++k) {
        cfg.seed = static_cast<std::uint64_t>(k);
        const Cgm m = oracle::random_cgm(cfg);
        const JointTable j = oracle::brute_force_joint(m);
        CHECK(is_markov(j, m.graph(), 1e-9));
        if (is_faithful(j, m.graph(), 1e-9)) ++faithful;
    }
    // random_cgm post-filters by faithfulness, so this is a self-check of the
    // filter plus the generic-position claim.
    CHECK(faithful == draws);
}

TEST_CASE("oracle config validation") {
    oracle::OracleConfig bad;
    bad.max_vars = 9;
    CHECK_THROWS_AS(oracle::random_cgm(bad), InputError);
    bad = {};
    bad.min_shift_tv = 0.9;
    CHECK_THROWS_AS(oracle::random_cgm(bad), InputError);
}

TEST_CASE("random_environment_set") {
    oracle::OracleConfig cfg;
    cfg.seed = 77;
    const Cgm m = oracle::random_cgm(cfg);
    const EnvironmentSet envs = oracle::random_environment_set(cfg, m, 6);
    REQUIRE(envs.size() == 6);

    // First environment is the empty intervention with the observational joint.
    CHECK(envs[0].targets().empty());
    CHECK(max_abs_diff(envs[0].distribution(), oracle::brute_force_joint(m)) == 0.0);

    // Every shifted mechanism moved by at least min_shift_tv on every row.
    for (const Environment& e : envs.environments()) {
        for (const Intervention& iv : e.interventions()) {
            const Mechanism& original = m.mechanism(iv.target);
            const Mechanism& repl = *iv.replacement;
            for (std::size_t r = 0; r < original.num_rows(); ++r) {
                double tv = 0.0;
                for (int c = 0; c < original.child_cardinality(); ++c) {
                    tv += std::abs(original.row(r)[c] - repl.row(r)[c]);
                }
                CHECK(0.5 * tv >= cfg.min_shift_tv);
            }
        }
    }

    // Determinism in the seed.
    const EnvironmentSet again = oracle::random_environment_set(cfg, m, 6);
    for (std::size_t k = 0; k < envs.size(); ++k) {
        CHECK(envs[k].targets() == again[k].targets());
        CHECK(max_abs_diff(envs[k].distribution(), again[k].distribution()) == 0.0);
    }

    // With many environments the intersection of targets empties out.
    CHECK(validate_environment_set(envs).intersection_empty);
    CHECK(validate_environment_set(envs).has_empty_intervention);
}
