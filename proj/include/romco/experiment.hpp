#pragma once

#include "romco/core_model.hpp"
#include "romco/data_io.hpp"
#include "romco/eval.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace romco {

enum class EtaSchedule { Constant, Theory };

struct ExperimentConfig {
    std::optional<std::filesystem::path> data_path;
    DataFormat format = DataFormat::TaskSvm;
    std::optional<SyntheticSpec> synthetic;
    HyperParams params;
    /// Theory sets eta1 = eta2 = 1/sqrt(horizon).
    EtaSchedule eta_schedule = EtaSchedule::Constant;
    /// 0 means the number of rounds of each shuffle.
    std::size_t horizon = 0;
    double rho_growth = 1.0;
    std::size_t shuffles = 10;
    std::filesystem::path out_dir = ".";
    bool regret = false;
    /// Write measured wall time to summary.csv; otherwise runtime_sec is 0
    /// and outputs are byte-reproducible.
    bool record_timing = false;
    /// 0 means ROMCO_THREADS or the number of shuffles.
    std::size_t threads = 0;

    void validate() const;
};

struct SweepGrid {
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    /// Empty keeps the config's eta.
    std::vector<double> eta1;
    std::vector<double> eta2;

    /// Default decade grid {1e-6, ..., 1e0}.
    static std::vector<double> decades();
};

struct ShuffleRun {
    RunRecord record;
    WeightState state;
    std::optional<RegretReport> regret;
};

struct ExperimentResult {
    Dataset data;
    std::vector<ShuffleRun> runs;
    MetricSummary summary;
};

/// Loads or generates the data and runs every shuffle. Throws ConfigError,
/// DataError or NumericError. Nothing is written.
ExperimentResult run_experiment(const ExperimentConfig &config);

/// run: curve_<k>.csv, summary.csv and, with regret enabled, regret.csv.
/// Files appear only if every run succeeded.
void cmd_run(const ExperimentConfig &config);

struct SweepCell {
    HyperParams params;
    MetricSummary summary;
    bool best = false;
};

std::vector<SweepCell> run_sweep(const ExperimentConfig &config, const SweepGrid &grid);
/// Writes sweep.csv with one row per (eta1, eta2, lambda1, lambda2) cell.
void cmd_sweep(const ExperimentConfig &config, const SweepGrid &grid);

/// Writes data.tsvm and ground_truth.csv into out_dir.
void cmd_gen(const SyntheticSpec &spec, const std::filesystem::path &out_dir);

/// Maps an exception from the calls above to the CLI exit code:
/// 1 config, 2 data, 3 numeric.
int exit_code_for(const std::exception &e);

/// Formats with 17 significant digits.
std::string format_real(double x);

} // namespace romco
