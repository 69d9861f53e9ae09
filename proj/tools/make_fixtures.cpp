// Regenerates the bundled example fixtures under fixtures/. The files are
// committed; rerun this after changing the serialization format.

#include <cstdio>
#include <string>
#include <vector>

#include "iklkit/io.hpp"

using namespace iklkit;

namespace {

Mechanism mech(const VariableSpace& space, int child, std::vector<int> parents,
               std::vector<double> table) {
    std::vector<int> parent_cards;
    for (int p : parents) parent_cards.push_back(space.cardinality(p));
    return Mechanism(child, std::move(parents), space.cardinality(child),
                     std::move(parent_cards), std::move(table));
}

void write(const std::string& path, const io::json& j) {
    io::write_text_file(path, io::canonical_dump(j));
    std::printf("wrote %s\n", path.c_str());
}

io::EnvironmentSpec env_spec(std::string label, const std::vector<std::string>& names,
                             const VariableSpace& space, std::vector<Intervention> interventions,
                             std::optional<std::vector<int>> observed = std::nullopt) {
    std::vector<int> targets;
    for (const Intervention& iv : interventions) targets.push_back(iv.target);
    return {std::move(label), names,        space,
            std::move(targets), std::move(interventions), std::nullopt,
            std::move(observed)};
}

void example1(const std::string& dir) {
    const std::vector<std::string> names = {"X1", "X2", "X3"};
    const VariableSpace space({2, 2, 2});
    const Dag fork(3, {{0, 1}, {0, 2}});
    const Cgm model(space, fork,
                    {mech(space, 0, {}, {0.4, 0.6}),
                     mech(space, 1, {0}, {0.7, 0.3, 0.2, 0.8}),
                     mech(space, 2, {0}, {0.9, 0.1, 0.3, 0.7})});
    write(dir + "/model.json", io::model_to_json(model, names));

    const Cgm perturbed =
        model.with_mechanism(mech(space, 1, {0}, {0.55, 0.45, 0.35, 0.65}));
    write(dir + "/model_perturbed.json", io::model_to_json(perturbed, names));

    // e1 disconnects X3 from X1: the unobserved variable as an intervention.
    write(dir + "/env_e1.json",
          io::environment_to_json(env_spec(
              "e1", names, space,
              {Intervention::replace(mech(space, 2, {0}, {0.5, 0.5, 0.5, 0.5}))})));
    write(dir + "/env_e2.json",
          io::environment_to_json(env_spec(
              "e2", names, space,
              {Intervention::replace(mech(space, 1, {0}, {0.1, 0.9, 0.6, 0.4}))})));
}

void example2(const std::string& dir) {
    const std::vector<std::string> names = {"X1", "X2", "X3", "X4", "X5"};
    const VariableSpace space({2, 2, 2, 2, 2});
    const Dag left(5, {{0, 1}, {1, 2}, {2, 3}, {1, 3}, {2, 4}});
    const Dag right(5, {{0, 1}, {1, 2}, {3, 2}, {1, 3}, {2, 4}});
    const Cgm p_model(space, left,
                      {mech(space, 0, {}, {0.35, 0.65}),
                       mech(space, 1, {0}, {0.8, 0.2, 0.25, 0.75}),
                       mech(space, 2, {1}, {0.7, 0.3, 0.2, 0.8}),
                       mech(space, 3, {1, 2}, {0.9, 0.1, 0.4, 0.6, 0.6, 0.4, 0.1, 0.9}),
                       mech(space, 4, {2}, {0.75, 0.25, 0.3, 0.7})});
    write(dir + "/model_p.json", io::model_to_json(p_model, names));

    const JointTable p = joint_from_model(p_model);
    std::vector<Mechanism> q_mechs;
    for (int i = 0; i < 5; ++i) q_mechs.push_back(conditional(p, i, right.parents(i)));
    const Cgm q_model(space, right, std::move(q_mechs));
    write(dir + "/model_q.json", io::model_to_json(q_model, names));

    write(dir + "/p_joint.json", io::distribution_to_json(p, names));
    write(dir + "/graph_right.json", io::graph_to_json(right, names));

    // Partial-observability environments.
    write(dir + "/env_e1.json",
          io::environment_to_json(env_spec(
              "e1", names, space,
              {Intervention::replace(mech(space, 4, {2}, {0.5, 0.5, 0.95, 0.05}))},
              std::vector<int>{1, 2, 4})));
    write(dir + "/env_e2.json",
          io::environment_to_json(env_spec(
              "e2", names, space,
              {Intervention::replace(mech(space, 2, {1}, {0.35, 0.65, 0.85, 0.15}))},
              std::vector<int>{1, 2, 3})));
    write(dir + "/env_e2_x1.json",
          io::environment_to_json(env_spec(
              "e2x1", names, space,
              {Intervention::replace(mech(space, 0, {}, {0.75, 0.25})),
               Intervention::replace(mech(space, 2, {1}, {0.35, 0.65, 0.85, 0.15}))},
              std::vector<int>{1, 2, 3})));

    // Singleton soft shifts covering every variable, for orientation runs.
    const std::vector<std::vector<double>> shifts = {
        {0.75, 0.25},
        {0.3, 0.7, 0.7, 0.3},
        {0.35, 0.65, 0.85, 0.15},
        {0.2, 0.8, 0.7, 0.3, 0.15, 0.85, 0.6, 0.4},
        {0.5, 0.5, 0.95, 0.05},
    };
    for (int k = 0; k < 5; ++k) {
        const auto& parents = left.parents(k);
        write(dir + "/env_shift_x" + std::to_string(k + 1) + ".json",
              io::environment_to_json(env_spec(
                  "shift_x" + std::to_string(k + 1), names, space,
                  {Intervention::replace(mech(space, k, parents, shifts[k]))})));
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::string root = argc > 1 ? argv[1] : "fixtures";
    example1(root + "/example1");
    example2(root + "/example2");
    return 0;
}
