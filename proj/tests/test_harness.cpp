#include "doctest.h"

#include "warpflow/errors.hpp"
#include "warpflow/harness.hpp"
#include "warpflow/registry.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

using namespace warpflow;
using nlohmann::json;

namespace {

json parallel_doc() {
    return json::parse(R"({
        "name": "t", "module": "parallel",
        "warping": {"family": "power_beta", "beta": 0.5, "a": -1.0},
        "initial": {"kind": "constant", "base": -3.0},
        "numerics": {"n": 1, "t_end": 1.0, "tol": 1e-10, "cadence": 0.25}
    })");
}

std::string error_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("config errors name the offending field") {
    auto doc = parallel_doc();
    doc["warping"].erase("beta");
    CHECK(error_of(doc).find("warping.beta") != std::string::npos);

    doc = parallel_doc();
    doc["numerics"]["toll"] = 1e-10;
    CHECK(error_of(doc) == "numerics.toll: unknown key");

    doc = parallel_doc();
    doc["numerics"]["t_end"] = "soon";
    CHECK(error_of(doc).find("numerics.t_end") != std::string::npos);

    doc = parallel_doc();
    doc["module"] = "fluids";
    CHECK(error_of(doc).find("module") != std::string::npos);

    doc = parallel_doc();
    doc["warping"]["family"] = "gaussian";
    CHECK(error_of(doc).find("warping.family") != std::string::npos);

    doc = parallel_doc();
    doc["initial"]["base"] = 0.5; // outside (-inf, -1)
    CHECK(error_of(doc).find("initial") != std::string::npos);

    CHECK(error_of(parallel_doc()).empty());
}

TEST_CASE("hash depends on content, not key order") {
    const auto a = parse_config(parallel_doc());
    const auto b = parse_config(json::parse(R"({
        "numerics": {"cadence": 0.25, "tol": 1e-10, "t_end": 1.0, "n": 1},
        "initial": {"base": -3.0, "kind": "constant"},
        "warping": {"a": -1.0, "beta": 0.5, "family": "power_beta"},
        "module": "parallel", "name": "t"
    })"));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash_hex(a).size() == 16);
    auto doc = parallel_doc();
    doc["seed"] = 1;
    CHECK(config_hash(parse_config(doc)) != config_hash(a));
}

TEST_CASE("format_double") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("parallel run writes t,z and its summary") {
    const auto out = execute(parse_config(parallel_doc()));
    const auto& csv = out.files.at("parallel.csv");
    CHECK(csv.rfind("t,z\n0,-3\n", 0) == 0);
    // every accepted step is a row; the cadence times are hit exactly
    std::istringstream in(csv);
    std::string line;
    std::set<std::string> times;
    while (std::getline(in, line)) times.insert(line.substr(0, line.find(',')));
    for (const char* t : {"0.25", "0.5", "0.75", "1"}) CHECK(times.count(t));
    CHECK(out.summary.at("terminal") == "ReachedTEnd");
}

TEST_CASE("identical configs produce identical bytes; outputs land in name-hash") {
    const auto cfg = registered_config("csf-flat-star");
    const auto a = execute(cfg);
    const auto b = execute(cfg);
    CHECK(a.files == b.files);
    const auto root = std::filesystem::temp_directory_path() / "warpflow_test_out";
    std::filesystem::remove_all(root);
    const auto dir = write_outputs(a, root);
    CHECK(dir.filename().string() == "csf-flat-star-" + a.hash);
    for (const char* f : {"csf.csv", "events.json", "config.json", "summary.json"})
        CHECK(std::filesystem::exists(dir / f));
    std::filesystem::remove_all(root);
}

TEST_CASE("output root resolution") {
    CHECK(resolve_output_root(std::string("x")) == "x");
    setenv("WARPFLOW_OUT", "/tmp/from_env", 1);
    CHECK(resolve_output_root(std::nullopt) == "/tmp/from_env");
    unsetenv("WARPFLOW_OUT");
    CHECK(resolve_output_root(std::nullopt) == "warpflow_out");
}

TEST_CASE("registry: one entry per acceptance criterion, every config parses") {
    const auto& reg = registry();
    CHECK(reg.size() == 12);
    std::set<int> crit;
    std::set<std::string> names;
    for (const auto& e : reg) {
        crit.insert(e.criterion);
        names.insert(e.name);
        for (const auto& c : e.configs) CHECK_NOTHROW(registered_config(c));
    }
    CHECK(crit.size() == 12);
    CHECK(*crit.begin() == 1);
    CHECK(*crit.rbegin() == 12);
    CHECK(names.size() == 12);
    CHECK(names.count("beta-half-decay"));
    CHECK(names.count("graph-loss-before-pinch"));
    CHECK_THROWS_AS(find_entry("nope"), ConfigError);
}

TEST_CASE("registered geometry configs with hypotheses pass check_conditions") {
    for (const char* name : {"conditions-beta-0.25", "conditions-beta-0.5", "conditions-beta-1", "contraction-beta-0.5"}) {
        const auto out = execute(registered_config(name));
        CHECK(std::get<GeometryResult>(out.result).report.rr2_margin >= 0.0);
    }
}

TEST_CASE("shipped configs/ match the registered documents") {
    const std::filesystem::path dir = WARPFLOW_SOURCE_DIR "/configs";
    std::size_t seen = 0;
    for (const auto& [name, doc] : registered_documents()) {
        const auto path = dir / (name + ".json");
        CAPTURE(path.string());
        REQUIRE(std::filesystem::exists(path));
        std::ifstream f(path);
        CHECK(json::parse(f) == doc);
        ++seen;
    }
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".json";
    CHECK(files == seen);
}

TEST_CASE("load_config reports unreadable and malformed files") {
    CHECK_THROWS_AS(load_config("/nonexistent/x.json"), ConfigError);
    const auto p = std::filesystem::temp_directory_path() / "warpflow_bad.json";
    std::ofstream(p) << "{ not json";
    CHECK_THROWS_AS(load_config(p), ConfigError);
    std::filesystem::remove(p);
}

}
