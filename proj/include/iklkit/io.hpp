#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iklkit/divergence.hpp"

namespace iklkit::io {

using nlohmann::json;

/// Canonical JSON text: sorted keys, two-space indent, doubles at 17
/// significant digits. serialize(parse(file)) is byte-identical for files
/// produced by this writer.
std::string canonical_dump(const json& j);
std::string format_double(double v);

// Values that may be +infinity are encoded as the string "infinity".
json to_json(NonNegReal v);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

int name_index(const std::vector<std::string>& names, const std::string& name);

// --- Model files -------------------------------------------------------------

struct NamedModel {
    std::vector<std::string> names;
    Cgm model;
};

json model_to_json(const Cgm& model, const std::vector<std::string>& names);
NamedModel model_from_json(const json& j);

// --- Distribution files ------------------------------------------------------

struct NamedDistribution {
    std::vector<std::string> names;
    JointTable table;
};

json distribution_to_json(const JointTable& table, const std::vector<std::string>& names);
NamedDistribution distribution_from_json(const json& j);

// --- Graph files -------------------------------------------------------------

struct NamedGraph {
    std::vector<std::string> names;
    Dag graph;
};

json graph_to_json(const Dag& graph, const std::vector<std::string>& names);
NamedGraph graph_from_json(const json& j);

// --- Environment files -------------------------------------------------------

/// Parsed environment file: targets plus optionally the interventions, an
/// explicit joint, and an observed-variable list.
struct EnvironmentSpec {
    std::string label;
    std::vector<std::string> names;
    VariableSpace space;
    std::vector<int> targets;
    std::vector<Intervention> interventions;
    std::optional<JointTable> joint;
    std::optional<std::vector<int>> observed;
};

json environment_to_json(const EnvironmentSpec& spec);
EnvironmentSpec environment_from_json(const json& j);

/// Builds the runtime Environment. An explicit joint wins; otherwise
/// interventions are applied to `base`; otherwise the environment carries no
/// distribution (valid for structural commands only).
Environment realize_environment(const EnvironmentSpec& spec, const std::optional<Cgm>& base);

// --- Report serialization ----------------------------------------------------

json decomposition_to_json(const KlDecomposition& dec, const std::vector<std::string>& names);
json report_to_json(const IklReport& report, const std::vector<std::string>& names);
json report_to_json(const ConditionReport& report, const std::vector<std::string>& names);
json report_to_json(const ValidationReport& report, const std::vector<std::string>& names);
json report_to_json(const BoundReport& report);
json report_to_json(const OrientationReport& report, const std::vector<std::string>& names);

}  // namespace iklkit::io
