#pragma once

// Named experiments, one per claim checked by the acceptance suite. Each entry
// runs registered configs (shipped verbatim under configs/) and turns the
// results into a pass/fail verdict with the individual checks spelled out.

#include "warpflow/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace warpflow {

struct Check {
    std::string what;
    bool ok;
};

struct Verdict {
    std::string name;
    int criterion = 0;
    bool passed = false;
    std::vector<Check> checks;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    nlohmann::json data = nlohmann::json::object();
};

nlohmann::json to_json(const Verdict& v);

struct RegistryEntry {
    std::string name;
    int criterion;
    std::string claim;
    double budget_seconds;
    std::vector<std::string> configs; // registered config names it runs
};

const std::vector<RegistryEntry>& registry();
const RegistryEntry& find_entry(const std::string& name); // ConfigError

// Registered configs by name.
const std::map<std::string, nlohmann::json>& registered_documents();
ExperimentConfig registered_config(const std::string& name);

// Runs an entry. With an output root, every run and verdict.json are written
// under it (verdict in <root>/registry/<name>/).
Verdict run_entry(const RegistryEntry& entry, const std::optional<std::filesystem::path>& out_root = std::nullopt);

} // namespace warpflow
