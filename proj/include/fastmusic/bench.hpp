#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastmusic/scene.hpp"
#include "fastmusic/types.hpp"

namespace fastmusic {

enum class Experiment {
    RuntimeScaling,
    BoundScatter,
    RobustK,
    Tune,
    SpectraCompare,
    MseVsSnr,
    LemmaSuite,
};
const char* experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

/// Random-scene recipe. Angles are drawn from a sub-range of (0, 90) degrees
/// with a minimum separation enforced in sin(theta) (where the array actually
/// resolves) as well as in angle; per-sample beat phase increments are drawn
/// well apart so targets stay uncorrelated across the chirp.
struct SceneSpec {
    Index k = 1;
    double theta_lo_deg = 10.0;
    double theta_hi_deg = 85.0;
    double min_sin_separation = 0.025;
    double min_angle_separation_rad = 2.0 * 3.14159265358979323846 / 1800.0;  // 2 cells at L=1801
    double beat_lo_rad = 0.2 * 3.14159265358979323846;
    double beat_hi_rad = 0.9 * 3.14159265358979323846;
    double min_beat_separation_rad = 0.02 * 3.14159265358979323846;
};

TargetScene random_scene(std::uint64_t seed, const SceneSpec& spec, const FMCWConfig& config);

/// Fixed 9-target scene whose two rightmost targets sit 2 degrees apart in the
/// 80-85 degree range: resolvable by MUSIC-class spectra, not by the FFT
/// baseline, and hard for the propagator.
TargetScene close_pair_scene(const FMCWConfig& config);

/// Per-element noise variance for a target SNR: snr = sum_k |alpha_k|^2 / sigma_n^2.
double noise_variance_for_snr_db(const TargetScene& scene, double snr_db);

struct ExperimentConfig {
    Experiment kind = Experiment::Tune;
    Index m = 200;
    Index n = 200;
    Index k = 11;
    double snr_db = 0.0;
    Index grid_size = 1801;
    std::vector<std::uint64_t> seeds;
    Index fast1_p = 12;
    Index fast2_p = 12;
    int fast2_t = 2;
    double delta = 0.2;
    Index lanczos_block = 0;  // 0 selects K
    int lanczos_iters = 200;
    std::vector<Index> m_sweep;
    std::vector<Index> k_guess_sweep;
    std::vector<Index> p_sweep;
    std::vector<int> t_sweep;
    std::vector<double> snr_sweep_db;
    std::vector<Index> n_panels;
    std::vector<std::string> methods;
    int runtime_reps = 0;  // 0 selects a per-M default
    Index min_separation_cells = 3;
    bool scatter_all_seeds = false;
    std::string out_dir = "out";
    std::string format = "csv";  // csv | json
    int threads = 1;
    SceneSpec scene;

    static ExperimentConfig defaults(Experiment kind);
};

/// Parses the key = value experiment config format ('#' comments, comma lists,
/// "a..b" seed ranges) over a base config. Unknown keys are errors.
ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base);

/// One long-format result record.
struct ResultRow {
    std::string method;
    std::string params;  // "key=value;key=value"
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
    double wall_seconds = 0.0;
    bool failed = false;
};

/// Owns the output directory: results table, auxiliary files, manifest.
class ExperimentSink {
public:
    ExperimentSink(std::string out_dir, std::string format);

    const std::string& dir() const { return dir_; }
    std::string aux_path(const std::string& filename);  // registers the output
    void write_rows(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);
    void write_manifest(const ExperimentConfig& cfg, Index failure_count);

private:
    std::string dir_;
    std::string format_;
    std::vector<std::string> outputs_;
    std::string started_at_;
};

std::vector<ResultRow> run_runtime_scaling(const ExperimentConfig& cfg, ExperimentSink* sink);
std::vector<ResultRow> run_bound_scatter(const ExperimentConfig& cfg, ExperimentSink* sink);
std::vector<ResultRow> run_robust_k(const ExperimentConfig& cfg, ExperimentSink* sink);
std::vector<ResultRow> run_tuning(const ExperimentConfig& cfg, ExperimentSink* sink);
std::vector<ResultRow> run_spectra_compare(const ExperimentConfig& cfg, ExperimentSink* sink);
std::vector<ResultRow> run_mse_vs_snr(const ExperimentConfig& cfg, ExperimentSink* sink);
std::vector<ResultRow> run_lemma_suite(const ExperimentConfig& cfg, ExperimentSink* sink);

/// Rejects configs that reference unknown estimators, empty seed lists, or an
/// empty sweep for the selected experiment.
void validate_config(const ExperimentConfig& cfg);

/// Dispatch on cfg.kind; sink may be null (no files written).
/// Validates the config first.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, ExperimentSink* sink);

/// Full command-line entry point (subcommand per experiment). Returns the
/// process exit status: 0 success, 1 completed with estimator failures,
/// 2 usage or config error.
int cli_main(int argc, const char* const* argv);

}  // namespace fastmusic
