#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iklkit/distribution.hpp"

namespace iklkit {

/// A mechanism shift on one variable: either a full replacement table or a
/// hard intervention pinning the variable to one value (sugar for a point-mass
/// replacement on every parent row).
struct Intervention {
    enum class Kind { replace_mechanism, hard };

    int target = -1;
    Kind kind = Kind::replace_mechanism;
    std::optional<Mechanism> replacement;  // replace_mechanism
    int fixed_value = -1;                  // hard

    static Intervention replace(Mechanism m);
    static Intervention hard(int target, int value);
};

/// Replaces the mechanisms of the intervened variables and nothing else; the
/// graph and every other mechanism are returned bit-identical.
Cgm apply_environment(const Cgm& m, const std::vector<Intervention>& interventions);

/// One interventional regime: known targets I_e, optionally the interventions
/// themselves, and the distribution P^e. The distribution may be absent when
/// the environment is used for structural queries only.
class Environment {
  public:
    Environment(std::string label, VariableSpace space, std::vector<int> targets,
                std::optional<JointTable> distribution,
                std::vector<Intervention> interventions = {},
                std::optional<std::vector<int>> observed = std::nullopt);

    const std::string& label() const { return label_; }
    const VariableSpace& space() const { return space_; }
    const std::vector<int>& targets() const { return targets_; }  // sorted
    bool is_target(int i) const;
    bool has_distribution() const { return distribution_.has_value(); }
    const JointTable& distribution() const;
    const std::vector<Intervention>& interventions() const { return interventions_; }
    const std::optional<std::vector<int>>& observed() const { return observed_; }

  private:
    std::string label_;
    VariableSpace space_;
    std::vector<int> targets_;
    std::optional<JointTable> distribution_;
    std::vector<Intervention> interventions_;
    std::optional<std::vector<int>> observed_;
};

// Applies the interventions to a base model and packages the resulting joint.
Environment environment_from_interventions(const Cgm& base, std::string label,
                                            std::vector<Intervention> interventions,
                                            std::optional<std::vector<int>> observed = std::nullopt);

/// Nonempty list of environments over one shared variable space with unique
/// labels.
class EnvironmentSet {
  public:
    explicit EnvironmentSet(std::vector<Environment> environments);

    const std::vector<Environment>& environments() const { return environments_; }
    std::size_t size() const { return environments_.size(); }
    const Environment& operator[](std::size_t k) const { return environments_[k]; }
    const VariableSpace& space() const { return environments_.front().space(); }

  private:
    std::vector<Environment> environments_;
};

struct ValidationReport {
    bool intersection_empty = false;   // no variable intervened in every environment
    bool has_empty_intervention = false;
    // Per variable: labels of the environments where it is un-intervened.
    std::vector<std::vector<std::string>> coverage;
};

ValidationReport validate_environment_set(const EnvironmentSet& es);

/// Theorem-10 shifted model Q^e: mechanisms of intervened variables are
/// extracted from P^e as P^e(X_j | PA_j^{G_Q}); everything else stays Q's.
/// Throws DomainError when an extracted row is undefined yet reachable with
/// positive probability under the resulting model.
Cgm build_shifted_model(const Cgm& q, const Environment& env);

}  // namespace iklkit
