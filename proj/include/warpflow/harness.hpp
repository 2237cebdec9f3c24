#pragma once

// Runs one experiment config and renders its artifacts (CSV with 17 significant
// digits, JSON summaries). Rendering is separate from writing so the same bytes
// can be compared in memory.

#include "warpflow/config.hpp"
#include "warpflow/csf.hpp"
#include "warpflow/mcf_sym.hpp"
#include "warpflow/neckpinch.hpp"
#include "warpflow/parallel.hpp"
#include "warpflow/residual.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace warpflow {

struct GeometryResult {
    ConditionReport report;
    std::vector<double> grid;
    std::vector<double> sample_z; // seeded uniform draws on [z_lo, z_hi]
    std::vector<double> sample_gauss;
};

using ModuleResult = std::variant<GeometryResult, ParallelTrajectory, CsfSeries, McfSeries,
                                  std::vector<ResidualReport>, NeckSeries, WitnessSearch>;

struct RunOutput {
    ExperimentConfig config;
    std::string hash;
    ModuleResult result;
    std::map<std::string, std::string> files; // file name -> contents
    nlohmann::json summary;
};

nlohmann::json to_json(const ConditionReport& r);

// Runs the config. For neckpinch configs with a search section, search = true
// runs the witness search instead of the single profile.
RunOutput execute(const ExperimentConfig& cfg, bool search = false);

// Same, memoized for the life of the process by config hash.
std::shared_ptr<const RunOutput> execute_cached(const ExperimentConfig& cfg, bool search = false);
void clear_run_cache();

// --out if given, else $WARPFLOW_OUT, else ./warpflow_out.
std::filesystem::path resolve_output_root(const std::optional<std::string>& cli_out);

// Writes every file plus config.json and summary.json into root/<name>-<hash>/.
std::filesystem::path write_outputs(const RunOutput& out, const std::filesystem::path& root);

// "{:.17g}", with nan and inf spelled out.
std::string format_double(double x);

// Initial states built from a config.
CurveState initial_curve(const ExperimentConfig& cfg, int N);
SymmetricGraphState initial_sym(const ExperimentConfig& cfg, int N);
ProfileState initial_profile(const ExperimentConfig& cfg);

Equation parse_equation(const std::string& s); // ConfigError

} // namespace warpflow
