#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fastmusic/bench.hpp"
#include "fastmusic/version.hpp"

namespace fastmusic {

namespace {

void print_error(const std::string& kind, const std::string& message) {
    nlohmann::json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << std::endl;
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::int64_t seed = -1;
    std::int64_t grid_size = 0;
    int threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
    cmd->add_option("--config", flags->config_path, "experiment config file (key = value lines)");
    cmd->add_option("--out-dir", flags->out_dir, "output directory");
    cmd->add_option("--format", flags->format, "results format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", flags->seed,
                    "base seed; shifts the configured seed list to seed, seed+1, ...");
    cmd->add_option("--grid-size", flags->grid_size, "angle grid size L");
    cmd->add_option("--threads", flags->threads, "worker threads for Monte-Carlo seeds");
}

ExperimentConfig build_config(Experiment kind, const CommonFlags& flags) {
    ExperimentConfig cfg = ExperimentConfig::defaults(kind);
    if (!flags.config_path.empty()) {
        cfg = parse_config_file(flags.config_path, cfg);
    }
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (!flags.format.empty()) cfg.format = flags.format;
    if (flags.grid_size > 0) cfg.grid_size = flags.grid_size;
    if (flags.threads > 0) cfg.threads = flags.threads;
    if (flags.seed >= 0) {
        const std::size_t count = cfg.seeds.size();
        cfg.seeds.clear();
        for (std::size_t i = 0; i < count; ++i) {
            cfg.seeds.push_back(static_cast<std::uint64_t>(flags.seed) + i);
        }
    }
    return cfg;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"fast-MUSIC subspace estimators and benchmark experiments"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    struct Sub {
        Experiment kind;
        const char* name;
        const char* help;
    };
    const std::vector<Sub> subs = {
        {Experiment::RuntimeScaling, "runtime", "subspace runtime vs antenna count"},
        {Experiment::BoundScatter, "bounds", "bound verification scatter at the reference config"},
        {Experiment::RobustK, "robust-k", "sensitivity to a wrong target count"},
        {Experiment::Tune, "tune", "spectrum error vs oversampling p and iterations t"},
        {Experiment::SpectraCompare, "spectra", "normalized spectra of all estimators"},
        {Experiment::MseVsSnr, "mse-snr", "AoA mean squared error across SNR"},
        {Experiment::LemmaSuite, "lemmas", "statistical checks of the sketching lemmas"},
    };

    std::vector<CommonFlags> flags(subs.size());
    std::vector<CLI::App*> cmds;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common_flags(cmd, &flags[i]);
        cmds.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        print_error("usage", e.what());
        return 2;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!cmds[i]->parsed()) continue;
        try {
            const ExperimentConfig cfg = build_config(subs[i].kind, flags[i]);
            validate_config(cfg);  // before any output path is touched
            ExperimentSink sink(cfg.out_dir, cfg.format);
            const std::vector<ResultRow> rows = run_experiment(cfg, &sink);
            sink.write_rows(cfg, rows);
            const Index failures = static_cast<Index>(
                std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.failed; }));
            sink.write_manifest(cfg, failures);
            if (failures > 0) {
                print_error("completed_with_failures",
                            std::to_string(failures) + " result rows carry a failure flag");
                return 1;
            }
            return 0;
        } catch (const std::invalid_argument& e) {
            print_error("config", e.what());
            return 2;
        } catch (const std::exception& e) {
            print_error("runtime", e.what());
            return 1;
        }
    }
    print_error("usage", "no subcommand selected");
    return 2;
}

}  // namespace fastmusic
