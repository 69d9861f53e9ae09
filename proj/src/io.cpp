#include "iklkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace iklkit::io {

namespace {

bool is_primitive(const json& j) {
    return !j.is_object() && !j.is_array();
}

void dump_value(const json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in + json(it.key()).dump() + ": ";
                dump_value(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool inline_array =
                std::all_of(j.begin(), j.end(), [](const json& e) { return is_primitive(e); });
            if (inline_array) {
                out += "[";
                bool first = true;
                for (const json& e : j) {
                    if (!first) out += ", ";
                    first = false;
                    dump_value(e, out, depth);
                }
                out += "]";
            } else {
                out += "[\n";
                bool first = true;
                for (const json& e : j) {
                    if (!first) out += ",\n";
                    first = false;
                    out += pad_in;
                    dump_value(e, out, depth + 1);
                }
                out += "\n" + pad + "]";
            }
            return;
        }
        case json::value_t::string:
            out += j.dump();
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::null:
            out += "null";
            return;
        case json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            return;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            return;
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            throw InputError("unsupported JSON value type");
    }
}

std::vector<std::string> parse_names_with_cards(const json& j, std::vector<int>& cards) {
    if (!j.is_array() || j.empty()) {
        throw InputError("'variables' must be a nonempty array");
    }
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const json& v : j) {
        const std::string name = v.at("name").get<std::string>();
        const int card = v.at("cardinality").get<int>();
        if (name.empty()) throw InputError("variable names must be nonempty");
        if (!seen.insert(name).second) throw InputError("duplicate variable name '" + name + "'");
        names.push_back(name);
        cards.push_back(card);
    }
    return names;
}

json variables_to_json(const std::vector<std::string>& names, const VariableSpace& space) {
    json vars = json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        vars.push_back({{"name", names[i]}, {"cardinality", space.cardinality(static_cast<int>(i))}});
    }
    return vars;
}

json table_to_json(const Mechanism& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        json row = json::array();
        for (double v : m.row(r)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> table_from_json(const json& rows, std::size_t expect_rows,
                                    std::size_t expect_cols, const std::string& what) {
    if (!rows.is_array() || rows.size() != expect_rows) {
        throw InputError(what + ": expected " + std::to_string(expect_rows) + " table rows");
    }
    std::vector<double> flat;
    flat.reserve(expect_rows * expect_cols);
    for (const json& row : rows) {
        if (!row.is_array() || row.size() != expect_cols) {
            throw InputError(what + ": expected rows of length " + std::to_string(expect_cols));
        }
        for (const json& v : row) flat.push_back(v.get<double>());
    }
    return flat;
}

std::vector<int> parent_cards_for(const VariableSpace& space, const std::vector<int>& parents) {
    std::vector<int> cards;
    cards.reserve(parents.size());
    for (int p : parents) cards.push_back(space.cardinality(p));
    return cards;
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) throw InputError("cannot serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string canonical_dump(const json& j) {
    std::string out;
    dump_value(j, out, 0);
    out += "\n";
    return out;
}

json to_json(NonNegReal v) {
    if (v.is_infinite()) return json("infinity");
    return json(v.value());
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("failed to parse '" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

int name_index(const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InputError("unknown variable name '" + name + "'");
    return static_cast<int>(it - names.begin());
}

json model_to_json(const Cgm& model, const std::vector<std::string>& names) {
    if (names.size() != static_cast<std::size_t>(model.space().num_vars())) {
        throw InputError("name list does not match the model dimension");
    }
    json edges = json::array();
    for (const auto& [i, j] : model.graph().edges()) {
        edges.push_back({names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]});
    }
    json mechanisms = json::object();
    for (int i = 0; i < model.space().num_vars(); ++i) {
        const Mechanism& m = model.mechanism(i);
        json parents = json::array();
        for (int p : m.parent_indices()) parents.push_back(names[static_cast<std::size_t>(p)]);
        mechanisms[names[static_cast<std::size_t>(i)]] = {{"parents", std::move(parents)},
                                                          {"table", table_to_json(m)}};
    }
    return {{"variables", variables_to_json(names, model.space())},
            {"edges", std::move(edges)},
            {"mechanisms", std::move(mechanisms)}};
}

NamedModel model_from_json(const json& j) {
    std::vector<int> cards;
    const auto names = parse_names_with_cards(j.at("variables"), cards);
    const VariableSpace space(cards);
    std::vector<Edge> edges;
    for (const json& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw InputError("edges must be name pairs");
        edges.emplace_back(name_index(names, e[0].get<std::string>()),
                           name_index(names, e[1].get<std::string>()));
    }
    const Dag graph(static_cast<int>(names.size()), edges);
    const json& mech_json = j.at("mechanisms");
    std::vector<Mechanism> mechanisms;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!mech_json.contains(names[i])) {
            throw InputError("missing mechanism for variable '" + names[i] + "'");
        }
        const json& mj = mech_json.at(names[i]);
        std::vector<int> parents;
        for (const json& p : mj.at("parents")) {
            parents.push_back(name_index(names, p.get<std::string>()));
        }
        if (!std::is_sorted(parents.begin(), parents.end())) {
            throw InputError("mechanism parents of '" + names[i] +
                             "' must be listed in variable-index order");
        }
        std::size_t rows = 1;
        for (int p : parents) rows *= static_cast<std::size_t>(space.cardinality(p));
        const std::size_t ccard = static_cast<std::size_t>(space.cardinality(static_cast<int>(i)));
        mechanisms.emplace_back(static_cast<int>(i), parents, static_cast<int>(ccard),
                                parent_cards_for(space, parents),
                                table_from_json(mj.at("table"), rows, ccard,
                                                "mechanism of '" + names[i] + "'"));
    }
    return {names, Cgm(space, graph, std::move(mechanisms))};
}

json distribution_to_json(const JointTable& table, const std::vector<std::string>& names) {
    if (names.size() != static_cast<std::size_t>(table.space().num_vars())) {
        throw InputError("name list does not match the distribution dimension");
    }
    json probs = json::array();
    for (double v : table.probabilities()) probs.push_back(v);
    return {{"variables", variables_to_json(names, table.space())},
            {"probabilities", std::move(probs)}};
}

NamedDistribution distribution_from_json(const json& j) {
    std::vector<int> cards;
    const auto names = parse_names_with_cards(j.at("variables"), cards);
    const VariableSpace space(cards);
    const json& pj = j.at("probabilities");
    if (!pj.is_array() || pj.size() != space.num_cells()) {
        throw InputError("'probabilities' must hold one entry per joint cell");
    }
    std::vector<double> probs;
    probs.reserve(pj.size());
    for (const json& v : pj) probs.push_back(v.get<double>());
    return {names, JointTable(space, std::move(probs))};
}

json graph_to_json(const Dag& graph, const std::vector<std::string>& names) {
    if (names.size() != static_cast<std::size_t>(graph.num_vars())) {
        throw InputError("name list does not match the graph dimension");
    }
    json edges = json::array();
    for (const auto& [i, j] : graph.edges()) {
        edges.push_back({names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]});
    }
    return {{"variables", names}, {"edges", std::move(edges)}};
}

NamedGraph graph_from_json(const json& j) {
    const json& vj = j.at("variables");
    if (!vj.is_array() || vj.empty()) throw InputError("'variables' must be a nonempty array");
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const json& v : vj) {
        // Accept both plain names and {name, cardinality} records.
        const std::string name = v.is_string() ? v.get<std::string>()
                                               : v.at("name").get<std::string>();
        if (name.empty()) throw InputError("variable names must be nonempty");
        if (!seen.insert(name).second) throw InputError("duplicate variable name '" + name + "'");
        names.push_back(name);
    }
    std::vector<Edge> edges;
    for (const json& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw InputError("edges must be name pairs");
        edges.emplace_back(name_index(names, e[0].get<std::string>()),
                           name_index(names, e[1].get<std::string>()));
    }
    return {names, Dag(static_cast<int>(names.size()), edges)};
}

json environment_to_json(const EnvironmentSpec& spec) {
    json out = {{"label", spec.label}, {"variables", variables_to_json(spec.names, spec.space)}};
    json targets = json::array();
    for (int t : spec.targets) targets.push_back(spec.names[static_cast<std::size_t>(t)]);
    out["targets"] = std::move(targets);
    if (!spec.interventions.empty()) {
        json ivs = json::object();
        for (const Intervention& iv : spec.interventions) {
            const std::string& name = spec.names[static_cast<std::size_t>(iv.target)];
            if (iv.kind == Intervention::Kind::hard) {
                ivs[name] = {{"kind", "hard"}, {"value", iv.fixed_value}};
            } else {
                json parents = json::array();
                for (int p : iv.replacement->parent_indices()) {
                    parents.push_back(spec.names[static_cast<std::size_t>(p)]);
                }
                ivs[name] = {{"kind", "replace"},
                             {"parents", std::move(parents)},
                             {"table", table_to_json(*iv.replacement)}};
            }
        }
        out["interventions"] = std::move(ivs);
    }
    if (spec.joint) {
        json probs = json::array();
        for (double v : spec.joint->probabilities()) probs.push_back(v);
        out["joint"] = std::move(probs);
    }
    if (spec.observed) {
        json obs = json::array();
        for (int v : *spec.observed) obs.push_back(spec.names[static_cast<std::size_t>(v)]);
        out["observed"] = std::move(obs);
    }
    return out;
}

EnvironmentSpec environment_from_json(const json& j) {
    std::vector<int> cards;
    auto names = parse_names_with_cards(j.at("variables"), cards);
    VariableSpace space(cards);
    std::vector<int> targets;
    for (const json& t : j.at("targets")) {
        targets.push_back(name_index(names, t.get<std::string>()));
    }
    std::sort(targets.begin(), targets.end());

    std::vector<Intervention> interventions;
    if (j.contains("interventions")) {
        for (const auto& [name, ij] : j.at("interventions").items()) {
            const int target = name_index(names, name);
            const std::string kind = ij.at("kind").get<std::string>();
            if (kind == "hard") {
                interventions.push_back(Intervention::hard(target, ij.at("value").get<int>()));
            } else if (kind == "replace") {
                std::vector<int> parents;
                for (const json& p : ij.at("parents")) {
                    parents.push_back(name_index(names, p.get<std::string>()));
                }
                if (!std::is_sorted(parents.begin(), parents.end())) {
                    throw InputError("intervention parents of '" + name +
                                     "' must be listed in variable-index order");
                }
                std::size_t rows = 1;
                for (int p : parents) rows *= static_cast<std::size_t>(space.cardinality(p));
                const std::size_t ccard = static_cast<std::size_t>(space.cardinality(target));
                interventions.push_back(Intervention::replace(Mechanism(
                    target, parents, static_cast<int>(ccard), parent_cards_for(space, parents),
                    table_from_json(ij.at("table"), rows, ccard,
                                    "intervention on '" + name + "'"))));
            } else {
                throw InputError("unknown intervention kind '" + kind + "'");
            }
        }
    }

    std::optional<JointTable> joint;
    if (j.contains("joint")) {
        const json& pj = j.at("joint");
        if (!pj.is_array() || pj.size() != space.num_cells()) {
            throw InputError("'joint' must hold one entry per joint cell");
        }
        std::vector<double> probs;
        probs.reserve(pj.size());
        for (const json& v : pj) probs.push_back(v.get<double>());
        joint.emplace(space, std::move(probs));
    }

    std::optional<std::vector<int>> observed;
    if (j.contains("observed")) {
        std::vector<int> obs;
        for (const json& o : j.at("observed")) {
            obs.push_back(name_index(names, o.get<std::string>()));
        }
        observed = std::move(obs);
    }

    return {j.at("label").get<std::string>(), std::move(names), std::move(space),
            std::move(targets), std::move(interventions), std::move(joint), std::move(observed)};
}

Environment realize_environment(const EnvironmentSpec& spec, const std::optional<Cgm>& base) {
    if (spec.joint) {
        return Environment(spec.label, spec.space, spec.targets, spec.joint, spec.interventions,
                           spec.observed);
    }
    if (!spec.interventions.empty() && base) {
        if (!(base->space() == spec.space)) {
            throw InputError("base model and environment variable spaces do not match");
        }
        Environment realized = environment_from_interventions(*base, spec.label,
                                                              spec.interventions, spec.observed);
        return realized;
    }
    return Environment(spec.label, spec.space, spec.targets, std::nullopt, spec.interventions,
                       spec.observed);
}

json decomposition_to_json(const KlDecomposition& dec, const std::vector<std::string>& names) {
    json intervened = json::object();
    for (const auto& [i, t] : dec.intervened_terms) {
        intervened[names[static_cast<std::size_t>(i)]] = to_json(t);
    }
    json unintervened = json::object();
    for (const auto& [i, t] : dec.unintervened_terms) {
        unintervened[names[static_cast<std::size_t>(i)]] = to_json(t);
    }
    return {{"intervened", std::move(intervened)},
            {"unintervened", std::move(unintervened)},
            {"residual", to_json(dec.residual)},
            {"total", to_json(dec.total)},
            {"ikl_contribution", to_json(dec.ikl_contribution())}};
}

json report_to_json(const IklReport& report, const std::vector<std::string>& names) {
    json envs = json::object();
    for (const auto& [label, dec] : report.per_environment) {
        envs[label] = decomposition_to_json(dec, names);
    }
    return {{"environments", std::move(envs)},
            {"ikl", to_json(report.ikl_value)},
            {"equivalent", report.equivalent},
            {"epsilon", report.epsilon}};
}

json report_to_json(const ConditionReport& report, const std::vector<std::string>& names) {
    json edges = json::array();
    for (const auto& [edge, witness] : report.per_edge) {
        json e = {{"from", names[static_cast<std::size_t>(edge.first)]},
                  {"to", names[static_cast<std::size_t>(edge.second)]},
                  {"satisfied", witness.satisfied}};
        if (witness.satisfied) {
            json path = json::array();
            for (int v : witness.path) path.push_back(names[static_cast<std::size_t>(v)]);
            e["witness"] = {{"environment", witness.env_label},
                            {"condition", witness.condition},
                            {"path", std::move(path)}};
        }
        edges.push_back(std::move(e));
    }
    json identified = json::array();
    for (const auto& [a, b] : report.identified_edges.edges()) {
        identified.push_back({names[static_cast<std::size_t>(a)],
                              names[static_cast<std::size_t>(b)]});
    }
    return {{"edges", std::move(edges)},
            {"all_satisfied", report.all_satisfied},
            {"identified_edges", std::move(identified)}};
}

json report_to_json(const ValidationReport& report, const std::vector<std::string>& names) {
    json coverage = json::object();
    for (std::size_t v = 0; v < report.coverage.size(); ++v) {
        json labels = json::array();
        for (const std::string& l : report.coverage[v]) labels.push_back(l);
        coverage[names[v]] = std::move(labels);
    }
    return {{"intersection_empty", report.intersection_empty},
            {"has_empty_intervention", report.has_empty_intervention},
            {"coverage", std::move(coverage)}};
}

json report_to_json(const BoundReport& report) {
    json envs = json::array();
    for (const EnvironmentBound& e : report.per_environment) {
        envs.push_back({{"label", e.label},
                        {"deviation", e.deviation},
                        {"kl", e.kl_value},
                        {"tv", e.tv},
                        {"within", e.within}});
    }
    return {{"ikl", report.epsilon},
            {"rho", report.rho},
            {"bound", report.bound},
            {"environments", std::move(envs)},
            {"fraction_within", report.fraction_within},
            {"holds", report.holds}};
}

json report_to_json(const OrientationReport& report, const std::vector<std::string>& names) {
    json flagged = json::array();
    for (int v : report.mismatched_parent_vars) {
        flagged.push_back(names[static_cast<std::size_t>(v)]);
    }
    json candidates = json::array();
    for (const OrientationCandidate& c : report.candidates) {
        json edges = json::array();
        for (const auto& [i, j] : c.dag.edges()) {
            edges.push_back({names[static_cast<std::size_t>(i)],
                             names[static_cast<std::size_t>(j)]});
        }
        candidates.push_back({{"edges", std::move(edges)},
                              {"total", c.total_term},
                              {"max_term", c.max_term},
                              {"survivor", c.survivor}});
    }
    return {{"mismatched_parent_variables", std::move(flagged)},
            {"candidates", std::move(candidates)}};
}

}  // namespace iklkit::io
