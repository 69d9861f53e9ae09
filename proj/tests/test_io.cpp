#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "iklkit/io.hpp"
#include "iklkit/oracle.hpp"

using namespace iklkit;
using namespace testutil;

namespace {

std::string fixture(const std::string& rel) {
    return std::string(IKLKIT_FIXTURES_DIR) + "/" + rel;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("canonical dump formatting") {
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(1.0 / 3.0) == "0.33333333333333331");
    CHECK_THROWS_AS(io::format_double(std::numeric_limits<double>::infinity()), InputError);

    const io::json j = {{"b", 1}, {"a", {{"x", 0.25}}}, {"list", {1, 2, 3}}};
    const std::string dumped = io::canonical_dump(j);
    // Keys come out sorted and primitive arrays stay inline.
    CHECK(dumped.find("\"a\"") < dumped.find("\"b\""));
    CHECK(dumped.find("[1, 2, 3]") != std::string::npos);
    CHECK(io::to_json(NonNegReal::infinity()) == io::json("infinity"));
}

TEST_CASE("serialize(parse(file)) is byte-identical on every bundled fixture") {
    const char* files[] = {
        "example1/model.json",        "example1/model_perturbed.json",
        "example1/env_e1.json",       "example1/env_e2.json",
        "example2/model_p.json",      "example2/model_q.json",
        "example2/p_joint.json",      "example2/graph_right.json",
        "example2/env_e1.json",       "example2/env_e2.json",
        "example2/env_e2_x1.json",    "example2/env_shift_x1.json",
        "example2/env_shift_x3.json", "example2/env_shift_x5.json",
    };
    for (const char* f : files) {
        const std::string text = read_file(fixture(f));
        CHECK(io::canonical_dump(io::json::parse(text)) == text);
    }
}

TEST_CASE("model files round-trip through the domain types") {
    const io::NamedModel named = io::model_from_json(io::load_json_file(fixture("example1/model.json")));
    CHECK(named.names == std::vector<std::string>{"X1", "X2", "X3"});
    CHECK(named.model.graph() == fork3());
    CHECK(named.model.mechanism(1).row(0)[0] == 0.7);

    const std::string again = io::canonical_dump(io::model_to_json(named.model, named.names));
    CHECK(again == read_file(fixture("example1/model.json")));

    // Random models survive serialize -> parse exactly.
    oracle::OracleConfig cfg;
    cfg.seed = 1;
    const Cgm m = oracle::random_cgm(cfg);
    std::vector<std::string> names;
    for (int i = 0; i < m.space().num_vars(); ++i) names.push_back("V" + std::to_string(i));
    const io::NamedModel back =
        io::model_from_json(io::json::parse(io::canonical_dump(io::model_to_json(m, names))));
    CHECK(back.model.graph() == m.graph());
    for (int i = 0; i < m.space().num_vars(); ++i) {
        CHECK(back.model.mechanism(i) == m.mechanism(i));
    }
}

TEST_CASE("environment files parse to valid specifications") {
    const io::EnvironmentSpec spec =
        io::environment_from_json(io::load_json_file(fixture("example2/env_e1.json")));
    CHECK(spec.label == "e1");
    CHECK(spec.targets == std::vector<int>{4});
    REQUIRE(spec.observed.has_value());
    CHECK(*spec.observed == std::vector<int>{1, 2, 4});
    REQUIRE(spec.interventions.size() == 1);
    CHECK(spec.interventions[0].replacement->row(1)[0] == 0.95);
    CHECK_FALSE(spec.joint.has_value());

    // Without a base model the environment carries no distribution.
    const Environment structural = io::realize_environment(spec, std::nullopt);
    CHECK_FALSE(structural.has_distribution());

    // With the base model the joint is materialized.
    const io::NamedModel base =
        io::model_from_json(io::load_json_file(fixture("example2/model_p.json")));
    const Environment realized = io::realize_environment(spec, base.model);
    REQUIRE(realized.has_distribution());
    const Cgm shifted = apply_environment(
        base.model, {Intervention::replace(*spec.interventions[0].replacement)});
    CHECK(max_abs_diff(realized.distribution(), joint_from_model(shifted)) == 0.0);
}

TEST_CASE("environments with explicit joints win over interventions") {
    io::EnvironmentSpec spec =
        io::environment_from_json(io::load_json_file(fixture("example1/env_e1.json")));
    const VariableSpace space = spec.space;
    const std::size_t n = space.num_cells();
    spec.joint.emplace(space, std::vector<double>(n, 1.0 / double(n)));
    const Environment env = io::realize_environment(spec, std::nullopt);
    REQUIRE(env.has_distribution());
    CHECK(env.distribution()[0] == doctest::Approx(1.0 / double(n)));
}

TEST_CASE("malformed inputs are reported as input errors") {
    CHECK_THROWS_AS(io::load_json_file("/nonexistent/path.json"), InputError);

    io::json bad = io::load_json_file(fixture("example1/model.json"));
    bad["mechanisms"]["X2"]["table"] = {{0.5, 0.5}};  // wrong row count
    CHECK_THROWS_AS(io::model_from_json(bad), InputError);

    io::json dup = io::load_json_file(fixture("example1/model.json"));
    dup["variables"][1]["name"] = "X1";
    CHECK_THROWS_AS(io::model_from_json(dup), InputError);

    io::json env = io::load_json_file(fixture("example1/env_e1.json"));
    env["interventions"]["X3"]["kind"] = "mystery";
    CHECK_THROWS_AS(io::environment_from_json(env), InputError);
}

TEST_CASE("report serialization carries the numbers through") {
    const io::NamedModel named =
        io::model_from_json(io::load_json_file(fixture("example1/model.json")));
    const io::NamedModel perturbed =
        io::model_from_json(io::load_json_file(fixture("example1/model_perturbed.json")));
    const io::EnvironmentSpec e1 =
        io::environment_from_json(io::load_json_file(fixture("example1/env_e1.json")));
    const io::EnvironmentSpec e2 =
        io::environment_from_json(io::load_json_file(fixture("example1/env_e2.json")));
    const EnvironmentSet envs({io::realize_environment(e1, named.model),
                               io::realize_environment(e2, named.model)});

    const IklReport report = ikl(envs, perturbed.model);
    const io::json j = io::report_to_json(report, named.names);
    CHECK(j.at("equivalent") == false);
    CHECK(j.at("ikl").get<double>() == report.ikl_value.value());
    // The serialized report reparses to the same values.
    const io::json reparsed = io::json::parse(io::canonical_dump(j));
    CHECK(reparsed.at("ikl").get<double>() == report.ikl_value.value());
    CHECK(reparsed.at("environments").at("e1").at("unintervened").at("X2").get<double>() ==
          report.per_environment.at("e1").unintervened_terms.at(1).value());

    // Infinite values serialize as the string "infinity".
    const VariableSpace s2(std::vector<int>{2, 2});
    KlDecomposition dec;
    dec.unintervened_terms.emplace(0, NonNegReal::infinity());
    dec.total = NonNegReal::infinity();
    const io::json dj = io::decomposition_to_json(dec, {"A", "B"});
    CHECK(dj.at("unintervened").at("A") == io::json("infinity"));
}
