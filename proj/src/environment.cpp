#include "iklkit/environment.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace iklkit {

namespace {

Mechanism point_mass_mechanism(const Cgm& m, int target, int value) {
    const int ccard = m.space().cardinality(target);
    if (value < 0 || value >= ccard) {
        throw InputError("hard intervention value out of range for variable " +
                         std::to_string(target));
    }
    const Mechanism& original = m.mechanism(target);
    std::vector<double> table(original.num_rows() * static_cast<std::size_t>(ccard), 0.0);
    for (std::size_t r = 0; r < original.num_rows(); ++r) {
        table[r * static_cast<std::size_t>(ccard) + static_cast<std::size_t>(value)] = 1.0;
    }
    return Mechanism(target, original.parent_indices(), ccard, original.parent_cardinalities(),
                     std::move(table));
}

}  // namespace

Intervention Intervention::replace(Mechanism m) {
    Intervention iv;
    iv.target = m.child();
    iv.kind = Kind::replace_mechanism;
    iv.replacement = std::move(m);
    return iv;
}

Intervention Intervention::hard(int target, int value) {
    Intervention iv;
    iv.target = target;
    iv.kind = Kind::hard;
    iv.fixed_value = value;
    return iv;
}

Cgm apply_environment(const Cgm& m, const std::vector<Intervention>& interventions) {
    std::set<int> seen;
    std::vector<Mechanism> mechs = m.mechanisms();
    for (const Intervention& iv : interventions) {
        if (iv.target < 0 || iv.target >= m.space().num_vars()) {
            throw InputError("intervention target " + std::to_string(iv.target) +
                             " out of range");
        }
        if (!seen.insert(iv.target).second) {
            throw InputError("duplicate intervention target " + std::to_string(iv.target));
        }
        Mechanism replacement = [&] {
            if (iv.kind == Intervention::Kind::hard) {
                return point_mass_mechanism(m, iv.target, iv.fixed_value);
            }
            if (!iv.replacement) {
                throw InputError("replace intervention carries no mechanism");
            }
            return *iv.replacement;
        }();
        if (replacement.child() != iv.target) {
            throw InputError("replacement mechanism child does not match the target");
        }
        const Mechanism& original = m.mechanism(iv.target);
        if (replacement.parent_indices() != original.parent_indices() ||
            replacement.child_cardinality() != original.child_cardinality()) {
            throw InputError("replacement mechanism shape does not match variable " +
                             std::to_string(iv.target));
        }
        mechs[static_cast<std::size_t>(iv.target)] = std::move(replacement);
    }
    return Cgm(m.space(), m.graph(), std::move(mechs));
}

Environment::Environment(std::string label, VariableSpace space, std::vector<int> targets,
                         std::optional<JointTable> distribution,
                         std::vector<Intervention> interventions,
                         std::optional<std::vector<int>> observed)
    : label_(std::move(label)),
      space_(std::move(space)),
      targets_(std::move(targets)),
      distribution_(std::move(distribution)),
      interventions_(std::move(interventions)),
      observed_(std::move(observed)) {
    if (label_.empty()) throw InputError("environment label must be nonempty");
    std::sort(targets_.begin(), targets_.end());
    if (std::adjacent_find(targets_.begin(), targets_.end()) != targets_.end()) {
        throw InputError("environment targets contain duplicates");
    }
    for (int t : targets_) {
        if (t < 0 || t >= space_.num_vars()) {
            throw InputError("environment target " + std::to_string(t) + " out of range");
        }
    }
    if (!interventions_.empty()) {
        std::vector<int> iv_targets;
        iv_targets.reserve(interventions_.size());
        for (const auto& iv : interventions_) iv_targets.push_back(iv.target);
        std::sort(iv_targets.begin(), iv_targets.end());
        if (iv_targets != targets_) {
            throw InputError("environment targets do not match its interventions");
        }
    }
    if (distribution_ && !(distribution_->space() == space_)) {
        throw InputError("environment distribution space mismatch");
    }
    if (observed_) {
        std::sort(observed_->begin(), observed_->end());
        if (observed_->empty() ||
            std::adjacent_find(observed_->begin(), observed_->end()) != observed_->end()) {
            throw InputError("observed variable list must be nonempty and duplicate-free");
        }
        for (int v : *observed_) {
            if (v < 0 || v >= space_.num_vars()) {
                throw InputError("observed variable " + std::to_string(v) + " out of range");
            }
        }
    }
}

bool Environment::is_target(int i) const {
    return std::binary_search(targets_.begin(), targets_.end(), i);
}

const JointTable& Environment::distribution() const {
    if (!distribution_) {
        throw InputError("environment '" + label_ + "' carries no distribution");
    }
    return *distribution_;
}

Environment environment_from_interventions(const Cgm& base, std::string label,
                                           std::vector<Intervention> interventions,
                                           std::optional<std::vector<int>> observed) {
    const Cgm shifted = apply_environment(base, interventions);
    std::vector<int> targets;
    targets.reserve(interventions.size());
    for (const auto& iv : interventions) targets.push_back(iv.target);
    return Environment(std::move(label), base.space(), std::move(targets),
                       joint_from_model(shifted), std::move(interventions), std::move(observed));
}

EnvironmentSet::EnvironmentSet(std::vector<Environment> environments)
    : environments_(std::move(environments)) {
    if (environments_.empty()) throw InputError("environment set must be nonempty");
    std::set<std::string> labels;
    for (const Environment& e : environments_) {
        if (!(e.space() == environments_.front().space())) {
            throw InputError("environments must share one variable space");
        }
        if (!labels.insert(e.label()).second) {
            throw InputError("duplicate environment label '" + e.label() + "'");
        }
    }
}

ValidationReport validate_environment_set(const EnvironmentSet& es) {
    ValidationReport report;
    const int d = es.space().num_vars();
    report.coverage.resize(static_cast<std::size_t>(d));
    std::vector<char> always(static_cast<std::size_t>(d), 1);
    for (const Environment& e : es.environments()) {
        if (e.targets().empty()) report.has_empty_intervention = true;
        for (int v = 0; v < d; ++v) {
            if (!e.is_target(v)) {
                always[static_cast<std::size_t>(v)] = 0;
                report.coverage[static_cast<std::size_t>(v)].push_back(e.label());
            }
        }
    }
    report.intersection_empty =
        std::none_of(always.begin(), always.end(), [](char a) { return a != 0; });
    return report;
}

Cgm build_shifted_model(const Cgm& q, const Environment& env) {
    if (!(env.space() == q.space())) {
        throw InputError("environment and model variable spaces do not match");
    }
    const JointTable& pe = env.distribution();
    std::vector<Mechanism> mechs = q.mechanisms();
    for (int j : env.targets()) {
        mechs[static_cast<std::size_t>(j)] = conditional(pe, j, q.graph().parents(j));
    }
    Cgm shifted(q.space(), q.graph(), std::move(mechs));

    // Undefined extracted rows are uniform-filled; the fill is harmless only
    // where the row's parent assignment has probability zero under Q^e itself.
    bool any_undefined = false;
    for (int j : env.targets()) {
        if (!shifted.mechanism(j).fully_defined()) any_undefined = true;
    }
    if (any_undefined) {
        const JointTable qe = joint_from_model(shifted);
        for (int j : env.targets()) {
            const Mechanism& m = shifted.mechanism(j);
            // Parent-free rows are always defined, so parents are nonempty here.
            if (m.fully_defined()) continue;
            const JointTable parent_marginal = marginalize(qe, m.parent_indices());
            for (std::size_t r = 0; r < m.num_rows(); ++r) {
                if (m.row_defined(r)) continue;
                const double w = parent_marginal[r];
                if (w > 0.0) {
                    throw DomainError("extracted mechanism of variable " + std::to_string(j) +
                                      " is undefined on parent row " + std::to_string(r) +
                                      ", which is reachable with probability " +
                                      std::to_string(w));
                }
            }
        }
    }
    return shifted;
}

}  // namespace iklkit
