#pragma once

#include <cstdint>
#include <random>

#include "iklkit/environment.hpp"

namespace iklkit::oracle {

/// Generator and checker configuration. Generators are pure functions of
/// (seed, parameters).
struct OracleConfig {
    std::uint64_t seed = 0;
    int max_vars = 5;          // <= 7
    int max_cardinality = 3;
    double min_shift_tv = 0.05;  // in (0, 0.5)
};

// Direct per-assignment product of mechanism lookups; shares no machinery
// with joint_from_model beyond the data types.
JointTable brute_force_joint(const Cgm& m);

// Direct summation with the same conventions as kl().
NonNegReal brute_force_kl(const JointTable& p, const JointTable& q);

/// Recomputes every term of the general decomposition of KL(P^e || Q) by
/// direct summation and returns |sum of terms - direct KL|. Finite instances
/// only.
double verify_decomposition(const Environment& p_env, const Cgm& q);

// Random DAG on d variables: random order, each compatible edge kept with
// probability 1/2.
Dag random_dag(const OracleConfig& cfg, int d, std::uint64_t salt = 0);

// Random mechanisms for a fixed structure; rows are Dirichlet-like with every
// probability at least 1e-3.
Cgm random_cgm_on(const OracleConfig& cfg, const Dag& g, const VariableSpace& space,
                  std::uint64_t salt = 0);

/// Random faithful model: random dimension/cardinalities/graph/mechanisms,
/// redrawn until is_faithful accepts (at most 100 attempts).
Cgm random_cgm(const OracleConfig& cfg);

// Copy of m with every parent row of variable `target` moved by total
// variation at least cfg.min_shift_tv.
Cgm with_shifted_mechanism(const OracleConfig& cfg, const Cgm& m, int target,
                           std::uint64_t salt = 0);

/// Environments with random targets and shifts of TV >= min_shift_tv on every
/// row; the first element is always the empty intervention carrying the
/// observational joint. Distributions are computed by brute_force_joint.
EnvironmentSet random_environment_set(const OracleConfig& cfg, const Cgm& m, int count);

}  // namespace iklkit::oracle
