#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "bodycorr/config.hpp"
#include "bodycorr/pipeline.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset;
    long long seed = -1;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--config", options.config_path, "flat key = value configuration file");
    cmd->add_option("--preset", options.preset, "configuration preset (desk or paper)");
    cmd->add_option("--seed", options.seed, "global rng seed override");
    cmd->add_flag("--force", options.force, "recompute even when artifacts are current");
}

bodycorr::RunConfig build_config(const CommonOptions& options) {
    bodycorr::RunConfig config = options.preset.empty()
                                     ? bodycorr::RunConfig::preset_desk()
                                     : bodycorr::RunConfig::from_preset(options.preset);
    if (!options.config_path.empty()) config.apply_file(options.config_path);
    if (!options.preset.empty()) config.preset = options.preset;
    if (options.seed >= 0) config.seed = static_cast<std::uint64_t>(options.seed);
    config.finalize();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dense depth-scan correspondence pipeline"};
    app.require_subcommand(1);

    const std::vector<std::string> stages = {"synth",   "segment", "render", "train",
                                             "extract", "match",   "eval"};
    std::map<std::string, CommonOptions> options;
    for (const std::string& stage : stages) {
        CLI::App* cmd = app.add_subcommand(stage, "run the '" + stage + "' pipeline stage");
        add_common(cmd, options[stage]);
    }
    CLI::App* all_cmd = app.add_subcommand("all", "run every stage in order");
    add_common(all_cmd, options["all"]);
    CLI::App* report_cmd = app.add_subcommand("report", "print the evaluation report");
    add_common(report_cmd, options["report"]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const bodycorr::RunConfig config = build_config(options[command]);
        if (command == "all") {
            const int ran = bodycorr::run_all(config, options[command].force);
            std::printf("all: %d stage(s) executed, artifacts in %s\n", ran,
                        config.out_dir.c_str());
        } else if (command == "report") {
            std::fputs(bodycorr::report(config).c_str(), stdout);
        } else {
            const bodycorr::StageResult result =
                bodycorr::run_stage(command, config, options[command].force);
            std::printf("%s: %s\n", command.c_str(),
                        result.ran ? "completed" : "already up to date (use --force to redo)");
        }
    } catch (const bodycorr::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
