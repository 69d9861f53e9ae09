#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iklkit/divergence.hpp"
#include "iklkit/io.hpp"
#include "iklkit/oracle.hpp"

namespace {

using namespace iklkit;

// Report values are printed in nats with 12 significant digits.
std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_val(NonNegReal v) {
    return v.is_infinite() ? "infinity" : fmt12(v.value());
}

struct Options {
    double epsilon = 1e-9;
    bool json_out = false;
    long long seed = 0;  // reserved for instance-generating commands
    std::string model_path;
    std::string dist_path;
    std::string graph_path;
    std::vector<std::string> env_paths;
    std::string base_model_path;
    std::vector<std::string> edge_args;
    std::vector<std::string> observed_args;
};

struct LoadedEnvironments {
    std::vector<std::string> names;
    std::vector<Environment> envs;
};

void check_names_match(const std::vector<std::string>& a, const std::vector<std::string>& b,
                       const std::string& context) {
    if (a != b) throw InputError("variable lists do not match between " + context);
}

LoadedEnvironments load_environments(const Options& opt,
                                     const std::optional<io::NamedModel>& reference,
                                     bool need_distribution) {
    std::optional<Cgm> base;
    std::vector<std::string> base_names;
    if (!opt.base_model_path.empty()) {
        io::NamedModel bm = io::model_from_json(io::load_json_file(opt.base_model_path));
        base_names = bm.names;
        base = std::move(bm.model);
    }
    LoadedEnvironments out;
    for (const std::string& path : opt.env_paths) {
        io::EnvironmentSpec spec = io::environment_from_json(io::load_json_file(path));
        if (out.names.empty()) {
            out.names = spec.names;
        } else {
            check_names_match(out.names, spec.names, "environment files");
        }
        if (reference) {
            check_names_match(reference->names, spec.names, "model and environment files");
            if (!(reference->model.space() == spec.space)) {
                throw InputError("model and environment cardinalities do not match");
            }
        }
        if (base) check_names_match(base_names, spec.names, "base model and environment files");
        Environment env = io::realize_environment(spec, base);
        if (need_distribution && !env.has_distribution()) {
            throw InputError("environment '" + env.label() + "' (" + path +
                             ") has no joint and no interventions applicable to a base model; "
                             "add a 'joint' or pass --base-model");
        }
        out.envs.push_back(std::move(env));
    }
    return out;
}

void print_decomposition(const std::string& label, const Environment& env,
                         const KlDecomposition& dec, const std::vector<std::string>& names) {
    std::cout << "environment " << label << " (targets:";
    if (env.targets().empty()) std::cout << " none";
    for (int t : env.targets()) std::cout << " " << names[static_cast<std::size_t>(t)];
    std::cout << ")\n";
    for (const auto& [i, t] : dec.intervened_terms) {
        std::cout << "  intervened    " << names[static_cast<std::size_t>(i)] << "  "
                  << fmt_val(t) << "  (excluded from IKL)\n";
    }
    for (const auto& [i, t] : dec.unintervened_terms) {
        std::cout << "  unintervened  " << names[static_cast<std::size_t>(i)] << "  "
                  << fmt_val(t) << "\n";
    }
    std::cout << "  residual      " << fmt_val(dec.residual) << "\n";
    std::cout << "  total         " << fmt_val(dec.total) << "\n";
    std::cout << "  ikl part      " << fmt_val(dec.ikl_contribution()) << "\n";
}

void print_ikl_report(const IklReport& report, const std::vector<Environment>& envs,
                      const std::vector<std::string>& names, const char* what) {
    for (const Environment& e : envs) {
        print_decomposition(e.label(), e, report.per_environment.at(e.label()), names);
    }
    std::cout << what << " = " << fmt_val(report.ikl_value) << "  over " << envs.size()
              << " environment(s)\n";
    std::cout << "verdict: " << (report.equivalent ? "interventionally equivalent"
                                                   : "not interventionally equivalent")
              << " (epsilon = " << fmt12(report.epsilon) << ")\n";
}

int cmd_ikl(const Options& opt) {
    io::NamedModel named = io::model_from_json(io::load_json_file(opt.model_path));
    LoadedEnvironments loaded = load_environments(opt, named, /*need_distribution=*/true);
    const EnvironmentSet envs(std::move(loaded.envs));
    const IklReport report = ikl(envs, named.model, opt.epsilon);
    if (opt.json_out) {
        std::cout << io::canonical_dump(io::report_to_json(report, named.names));
    } else {
        print_ikl_report(report, envs.environments(), named.names, "IKL");
    }
    return 0;
}

int cmd_decompose(const Options& opt) {
    io::NamedModel named = io::model_from_json(io::load_json_file(opt.model_path));
    LoadedEnvironments loaded = load_environments(opt, named, /*need_distribution=*/true);
    if (loaded.envs.size() != 1) throw InputError("decompose takes exactly one environment");
    const Environment& env = loaded.envs.front();
    const KlDecomposition dec = decompose_kl_general(env, named.model);
    if (opt.json_out) {
        std::cout << io::canonical_dump(io::decomposition_to_json(dec, named.names));
    } else {
        print_decomposition(env.label(), env, dec, named.names);
    }
    return 0;
}

int cmd_check_conditions(const Options& opt) {
    io::NamedModel named = io::model_from_json(io::load_json_file(opt.model_path));
    LoadedEnvironments loaded = load_environments(opt, named, /*need_distribution=*/false);
    const EnvironmentSet envs(std::move(loaded.envs));
    const ConditionReport report = check_sufficient_conditions(named.model.graph(), envs);
    if (opt.json_out) {
        std::cout << io::canonical_dump(io::report_to_json(report, named.names));
        return 0;
    }
    for (const auto& [edge, witness] : report.per_edge) {
        const std::string from = named.names[static_cast<std::size_t>(edge.first)];
        const std::string to = named.names[static_cast<std::size_t>(edge.second)];
        std::cout << "edge " << from << " -> " << to << ": ";
        if (witness.satisfied) {
            std::cout << "witnessed by " << witness.env_label << " via condition ("
                      << (witness.condition == 1 ? "i" : "ii") << "), path";
            for (int v : witness.path) {
                std::cout << " " << named.names[static_cast<std::size_t>(v)];
            }
            std::cout << "\n";
        } else {
            std::cout << "not witnessed\n";
        }
    }
    std::cout << "identified edges (E_E):";
    if (report.identified_edges.empty()) std::cout << " none";
    for (const auto& [a, b] : report.identified_edges.edges()) {
        std::cout << " " << named.names[static_cast<std::size_t>(a)] << "-"
                  << named.names[static_cast<std::size_t>(b)];
    }
    std::cout << "\nall edges witnessed: " << (report.all_satisfied ? "yes" : "no") << "\n";
    return 0;
}

int cmd_restricted(const Options& opt) {
    io::NamedModel named = io::model_from_json(io::load_json_file(opt.model_path));
    LoadedEnvironments loaded = load_environments(opt, named, /*need_distribution=*/true);
    const EnvironmentSet envs(std::move(loaded.envs));

    EdgeSet identified;
    for (const std::string& arg : opt.edge_args) {
        const auto dash = arg.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 >= arg.size()) {
            throw InputError("--edges entries must look like NAME-NAME, got '" + arg + "'");
        }
        identified.insert(io::name_index(named.names, arg.substr(0, dash)),
                          io::name_index(named.names, arg.substr(dash + 1)));
    }
    std::vector<int> observed;
    for (const std::string& name : opt.observed_args) {
        observed.push_back(io::name_index(named.names, name));
    }
    if (observed.empty()) {
        // Fall back to the union of the environments' observed lists.
        std::set<int> all;
        for (const Environment& e : envs.environments()) {
            if (e.observed()) all.insert(e.observed()->begin(), e.observed()->end());
        }
        observed.assign(all.begin(), all.end());
        if (observed.empty()) {
            throw InputError("no observed variables: pass --observed or mark them in the "
                             "environment files");
        }
    }

    const IklReport report = restricted_ikl(envs, named.model, identified, observed, opt.epsilon);
    if (opt.json_out) {
        std::cout << io::canonical_dump(io::report_to_json(report, named.names));
    } else {
        print_ikl_report(report, envs.environments(), named.names, "restricted IKL");
    }
    return 0;
}

int cmd_orient(const Options& opt) {
    io::NamedDistribution dist = io::distribution_from_json(io::load_json_file(opt.dist_path));
    io::NamedGraph graph = io::graph_from_json(io::load_json_file(opt.graph_path));
    check_names_match(dist.names, graph.names, "distribution and graph files");
    LoadedEnvironments loaded = load_environments(opt, std::nullopt, /*need_distribution=*/true);
    check_names_match(dist.names, loaded.names, "distribution and environment files");
    const EnvironmentSet envs(std::move(loaded.envs));
    const OrientationReport report =
        orient_edges(envs, dist.table, graph.graph, opt.epsilon);
    if (opt.json_out) {
        std::cout << io::canonical_dump(io::report_to_json(report, dist.names));
        return 0;
    }
    std::cout << "variables with mismatched parent sets under the candidate graph:";
    if (report.mismatched_parent_vars.empty()) std::cout << " none";
    for (int v : report.mismatched_parent_vars) {
        std::cout << " " << dist.names[static_cast<std::size_t>(v)];
    }
    std::cout << "\ncandidates in the Markov equivalence class (" << report.candidates.size()
              << "):\n";
    for (const OrientationCandidate& c : report.candidates) {
        std::cout << (c.survivor ? "  [survivor] " : "             ");
        bool first = true;
        for (const auto& [i, j] : c.dag.edges()) {
            if (!first) std::cout << ", ";
            first = false;
            std::cout << dist.names[static_cast<std::size_t>(i)] << "->"
                      << dist.names[static_cast<std::size_t>(j)];
        }
        std::cout << "  (total " << fmt12(c.total_term) << ", max " << fmt12(c.max_term) << ")\n";
    }
    std::cout << "survivors: " << report.survivors().size() << " of " << report.candidates.size()
              << "\n";
    return 0;
}

int cmd_project(const Options& opt) {
    io::NamedDistribution dist = io::distribution_from_json(io::load_json_file(opt.dist_path));
    io::NamedGraph graph = io::graph_from_json(io::load_json_file(opt.graph_path));
    check_names_match(dist.names, graph.names, "distribution and graph files");
    // The projection is exactly the product of the input's conditionals, so
    // emit those as a model file.
    std::vector<Mechanism> mechs;
    for (int i = 0; i < graph.graph.num_vars(); ++i) {
        mechs.push_back(conditional(dist.table, i, graph.graph.parents(i)));
    }
    const Cgm model(dist.table.space(), graph.graph, std::move(mechs));
    std::cout << io::canonical_dump(io::model_to_json(model, dist.names));
    return 0;
}

int cmd_validate_envs(const Options& opt) {
    LoadedEnvironments loaded = load_environments(opt, std::nullopt, /*need_distribution=*/false);
    const EnvironmentSet envs(std::move(loaded.envs));
    const ValidationReport report = validate_environment_set(envs);
    if (opt.json_out) {
        std::cout << io::canonical_dump(io::report_to_json(report, loaded.names));
        return 0;
    }
    std::cout << "intersection of targets empty: " << (report.intersection_empty ? "yes" : "no")
              << "\n";
    std::cout << "contains the empty intervention: "
              << (report.has_empty_intervention ? "yes" : "no") << "\n";
    std::cout << "per-variable coverage (environments where un-intervened):\n";
    for (std::size_t v = 0; v < report.coverage.size(); ++v) {
        std::cout << "  " << loaded.names[v] << ":";
        if (report.coverage[v].empty()) std::cout << " none";
        for (const std::string& l : report.coverage[v]) std::cout << " " << l;
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* limit = std::getenv("IKLKIT_LIMIT_CELLS")) {
        try {
            iklkit::config::set_cell_limit(std::stoull(limit));
        } catch (const std::exception&) {
            std::cerr << "error: IKLKIT_LIMIT_CELLS must be a positive integer\n";
            return 2;
        }
    }

    CLI::App app{"iklkit - interventional KL divergence between causal graphical models\n"
                 "The IKLKIT_LIMIT_CELLS environment variable overrides the joint-table cell "
                 "limit (default 2^20)."};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--epsilon", opt.epsilon, "Equality-to-zero threshold (default 1e-9)");
    app.add_flag("--json", opt.json_out, "Emit machine-readable JSON reports");
    app.add_option("--seed", opt.seed, "Reserved for instance-generating commands");

    auto add_envs = [&](CLI::App* sub, bool with_base) {
        sub->add_option("envs", opt.env_paths, "Environment file(s)")->required()->expected(-1);
        if (with_base) {
            sub->add_option("--base-model", opt.base_model_path,
                            "Model file used to materialize environments given as interventions");
        }
    };

    CLI::App* ikl_cmd = app.add_subcommand("ikl", "Interventional KL divergence of a model");
    ikl_cmd->add_option("model", opt.model_path, "Model file (Q)")->required();
    add_envs(ikl_cmd, true);

    CLI::App* dec_cmd =
        app.add_subcommand("decompose", "Per-variable KL decomposition for one environment");
    dec_cmd->add_option("model", opt.model_path, "Model file (Q)")->required();
    add_envs(dec_cmd, true);

    CLI::App* chk_cmd = app.add_subcommand("check-conditions",
                                           "Edge-identifiability conditions per model edge");
    chk_cmd->add_option("model", opt.model_path, "Model file (Q)")->required();
    add_envs(chk_cmd, false);

    CLI::App* res_cmd =
        app.add_subcommand("restricted", "Restricted IKL over identified edges");
    res_cmd->add_option("model", opt.model_path, "Model file (Q)")->required();
    add_envs(res_cmd, true);
    res_cmd->add_option("--edges", opt.edge_args, "Identified edges, e.g. X3-X5")
        ->delimiter(',');
    res_cmd->add_option("--observed", opt.observed_args, "Observed variable names")
        ->delimiter(',');

    CLI::App* ori_cmd = app.add_subcommand("orient", "Edge orientation over the MEC");
    ori_cmd->add_option("distribution", opt.dist_path, "Reference joint distribution file (P)")
        ->required();
    ori_cmd->add_option("graph", opt.graph_path, "Candidate graph file (G_Q)")->required();
    add_envs(ori_cmd, true);

    CLI::App* prj_cmd =
        app.add_subcommand("project", "Markov projection of a distribution onto a graph");
    prj_cmd->add_option("distribution", opt.dist_path, "Distribution file")->required();
    prj_cmd->add_option("graph", opt.graph_path, "Graph file")->required();

    CLI::App* val_cmd = app.add_subcommand("validate-envs", "Environment-set sanity report");
    add_envs(val_cmd, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ikl_cmd)) return cmd_ikl(opt);
        if (app.got_subcommand(dec_cmd)) return cmd_decompose(opt);
        if (app.got_subcommand(chk_cmd)) return cmd_check_conditions(opt);
        if (app.got_subcommand(res_cmd)) return cmd_restricted(opt);
        if (app.got_subcommand(ori_cmd)) return cmd_orient(opt);
        if (app.got_subcommand(prj_cmd)) return cmd_project(opt);
        if (app.got_subcommand(val_cmd)) return cmd_validate_envs(opt);
    } catch (const iklkit::CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
