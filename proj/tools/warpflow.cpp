#include "warpflow/errors.hpp"
#include "warpflow/harness.hpp"
#include "warpflow/registry.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <iostream>

using namespace warpflow;

namespace {

int run_config(const std::string& module, const std::string& path, const std::optional<std::string>& out,
               bool search) {
    const ExperimentConfig cfg = load_config(path);
    if (to_string(cfg.module) != module)
        throw ConfigError(fmt::format("module: config is for '{}', not '{}'", to_string(cfg.module), module));
    if (search && !cfg.search) throw ConfigError("search: missing");
    const RunOutput res = execute(cfg, search);
    const auto dir = write_outputs(res, resolve_output_root(out));
    std::cout << res.summary.dump(2) << "\n" << dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"warpflow: mean curvature flow in warped products"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> out;

    for (const char* module : {"geometry", "parallel", "csf", "mcf", "residual", "neckpinch"}) {
        auto* sub = app.add_subcommand(module, fmt::format("{} experiments", module));
        sub->require_subcommand(1);
        auto add_run = [&](const char* name, const char* help, bool search) {
            auto* cmd = sub->add_subcommand(name, help);
            cmd->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
            cmd->add_option("--out", out, "output root (default $WARPFLOW_OUT or ./warpflow_out)");
            cmd->callback([&, module, search] { std::exit(run_config(module, config, out, search)); });
        };
        add_run("run", "run the config and write its artifacts", false);
        if (std::string(module) == "residual") add_run("study", "same as run", false);
        if (std::string(module) == "neckpinch") add_run("search", "scan the search grid for a witness", true);
        if (std::string(module) == "geometry") {
            auto* cmd = sub->add_subcommand("check", "print the ConditionReport for the config's grid");
            cmd->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
            cmd->callback([&] {
                const ExperimentConfig cfg = load_config(config);
                if (cfg.module != ModuleKind::Geometry) throw ConfigError("module: expected 'geometry'");
                const RunOutput res = execute(cfg);
                std::cout << to_json(std::get<GeometryResult>(res.result).report).dump(2) << "\n";
                std::exit(0);
            });
        }
    }

    auto* reg = app.add_subcommand("registry", "named experiments");
    reg->require_subcommand(1);
    reg->add_subcommand("list", "list entries and the claim each checks")->callback([] {
        for (const auto& e : registry()) std::cout << fmt::format("{:2d}  {:<28}  {}\n", e.criterion, e.name, e.claim);
    });
    std::string entry_name;
    auto* rrun = reg->add_subcommand("run", "run one entry and print its verdict");
    rrun->add_option("name", entry_name, "entry name")->required();
    rrun->add_option("--out", out, "output root (default $WARPFLOW_OUT or ./warpflow_out)");
    rrun->callback([&] {
        const Verdict v = run_entry(find_entry(entry_name), resolve_output_root(out));
        std::cout << to_json(v).dump(2) << "\n";
        std::exit(v.passed ? 0 : 1);
    });
    std::string export_dir;
    auto* exp = reg->add_subcommand("export", "write every registered config as <dir>/<name>.json");
    exp->add_option("dir", export_dir, "target directory")->required();
    exp->callback([&] {
        std::filesystem::create_directories(export_dir);
        for (const auto& [name, doc] : registered_documents()) {
            std::ofstream f(std::filesystem::path(export_dir) / (name + ".json"));
            f << doc.dump(2) << "\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
