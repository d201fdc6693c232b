#include "doctest.h"

#include "polyberg/cli.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
using polyberg::cli::run_subcommand;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
    json report() const { return json::parse(out); }
    json error() const { return json::parse(err); }
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_subcommand(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string tmp_path(const std::string& name) { return (std::filesystem::path(POLYBERG_TEST_TMP) / name).string(); }

} // namespace

TEST_CASE("sha256") {
    CHECK(polyberg::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(polyberg::cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("classify") {
    const Run r = run({"classify", "--p", "5", "--alpha-max", "1.8"});
    REQUIRE(r.code == 0);
    const json j = r.report();
    CHECK(j.at("projection_bounded") == false);
    CHECK(j.at("main1_hypothesis") == false);
    CHECK(j.at("regime") == "p>4");
    CHECK(j.at("alpha_max") == "9/5");
    const json& prov = j.at("provenance");
    CHECK(prov.at("tool") == "polyberg");
    CHECK(prov.at("config_hash") == polyberg::cli::sha256_hex(prov.at("config").dump()));

    const Run again = run({"classify", "--p", "5", "--alpha-max", "1.8"});
    CHECK(again.out == r.out);

    const Run bounded = run({"classify", "--p", "3", "--alpha-max", "1.99"});
    CHECK(bounded.report().at("projection_bounded") == true);
}

TEST_CASE("configuration files and overrides") {
    const std::string config = tmp_path("cli_classify.json");
    const std::string output = tmp_path("cli_classify_out.json");
    {
        std::ofstream out(config);
        out << R"({"p": "6", "alpha_max": "1.8", "weighted": true})";
    }
    const Run r = run({"classify", "--config", config});
    REQUIRE(r.code == 0);
    CHECK(r.report().at("weighted_t_min") == "6/5");

    const Run o = run({"classify", "--config", config, "--p", "1.1", "--output", output});
    REQUIRE(o.code == 0);
    std::ifstream in(output);
    const json j = json::parse(in);
    CHECK(j.at("p") == "11/10");
    CHECK(j.at("weighted_t_min") == "13/25");
    CHECK(j.at("provenance").at("config").at("p") == "1.1");
    std::filesystem::remove(config);
    std::filesystem::remove(output);
}

TEST_CASE("whitney") {
    const Run r = run({"whitney", "--polygon", "unit-square", "--max-level", "4"});
    REQUIRE(r.code == 0);
    const json d = r.report().at("decomposition");
    CHECK(d.at("level_counts") == json::parse("[0, 0, 0, 16, 80]"));
    CHECK(d.at("count") == 96);

    const std::string csv = tmp_path("cli_whitney.csv");
    REQUIRE(run({"whitney", "--polygon", "l-shape", "--max-level", "3", "--csv", csv}).code == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "level,i,j,anchor_x,anchor_y,side");
    std::filesystem::remove(csv);
}

TEST_CASE("closed-form experiment") {
    const Run r = run({"experiment", "e2-closed-form"});
    REQUIRE(r.code == 0);
    const json j = r.report();
    CHECK(j.at("all_exact") == true);
    CHECK(j.at("expectation_met") == true);
    CHECK(j.at("rows").size() == 11);
    const Run one = run({"experiment", "e2-closed-form", "--n", "3"});
    REQUIRE(one.code == 0);
    CHECK(one.report().at("rows").size() == 1);
    CHECK(polyberg::cli::experiment_names().size() == 6);
}

TEST_CASE("errors are reported as JSON with distinct exit codes") {
    const Run none = run({});
    CHECK(none.code == polyberg::cli::kConfigError);
    CHECK(none.error().at("error").at("kind") == "usage");

    const Run bad_polygon = run({"whitney", "--polygon", "blob"});
    CHECK(bad_polygon.code == polyberg::cli::kConfigError);
    CHECK(bad_polygon.error().at("error").at("kind") == "config");
    CHECK(bad_polygon.out.empty());

    CHECK(run({"experiment", "nosuch"}).code == polyberg::cli::kConfigError);
    CHECK(run({"classify", "--p", "0.5", "--alpha-max", "1"}).code == polyberg::cli::kConfigError);
    CHECK(run({"classify", "--p", "x", "--alpha-max", "1"}).code == polyberg::cli::kConfigError);
    CHECK(run({"classify", "--config", tmp_path("missing.json")}).code == polyberg::cli::kConfigError);
    CHECK(run({"experiment", "e2-closed-form", "--csv", tmp_path("x.csv")}).code == polyberg::cli::kConfigError);
}
