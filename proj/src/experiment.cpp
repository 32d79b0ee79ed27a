#include "romco/experiment.hpp"

#include "romco/error.hpp"
#include "romco/learner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>
#include <unistd.h>

namespace romco {

namespace fs = std::filesystem;

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void ExperimentConfig::validate() const {
    if (data_path.has_value() == synthetic.has_value())
        throw ConfigError("exactly one of a data file or a synthetic spec is required");
    if (shuffles < 1)
        throw ConfigError("shuffle count must be at least 1");
    if (!(rho_growth >= 1.0) || !std::isfinite(rho_growth))
        throw ConfigError("rho growth must be a finite factor >= 1");
    if (regret && (params.variant == Variant::PaGlobal || params.variant == Variant::PaUnique))
        throw ConfigError("regret diagnostics need a ROMCO variant (nucl or logd)");
    try {
        if (eta_schedule == EtaSchedule::Constant)
            params.validate();
        if (synthetic)
            synthetic->validate();
    } catch (const ParameterError &e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> SweepGrid::decades() {
    return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0};
}

namespace {

Dataset load_data(const ExperimentConfig &config) {
    if (config.data_path)
        return load_dataset(*config.data_path, config.format);
    return generate_synthetic(*config.synthetic).data;
}

std::size_t thread_count(const ExperimentConfig &config, std::size_t jobs) {
    std::size_t n = config.threads;
    if (n == 0) {
        if (const char *env = std::getenv("ROMCO_THREADS")) {
            char *end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && v > 0)
                n = static_cast<std::size_t>(v);
        }
    }
    if (n == 0)
        n = jobs;
    return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs job(i) for i in [0, jobs) on a small pool; rethrows the failure with
// the lowest index so the outcome does not depend on scheduling.
template <class Job>
void parallel_for(std::size_t jobs, std::size_t threads, Job job) {
    std::vector<std::exception_ptr> failures(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                job(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &th : pool)
        th.join();
    for (auto &f : failures)
        if (f)
            std::rethrow_exception(f);
}

ShuffleRun run_shuffle(const ExperimentConfig &config, const Dataset &data, std::size_t k) {
    const auto rounds = shuffle_rounds(data, derive_seed(config.params.seed, k, SeedPurpose::Shuffle));
    HyperParams params = config.params;
    if (config.eta_schedule == EtaSchedule::Theory) {
        const std::size_t horizon = config.horizon ? config.horizon : rounds.size();
        params.eta1 = params.eta2 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(horizon, 1)));
    }
    RunOptions opts;
    opts.learner.rho_growth = config.rho_growth;
    opts.record_composite = config.regret;
    opts.provenance = data.provenance;

    RunResult r = run_sequence(params, data.dim, data.num_tasks, rounds, opts);
    if (r.record.failure == RunFailure::Structural)
        throw DataError("shuffle " + std::to_string(k) + ": " + r.record.error);
    if (r.record.failure == RunFailure::Numeric)
        throw NumericError("shuffle " + std::to_string(k) + ": " + r.record.error);

    ShuffleRun out;
    if (config.regret)
        out.regret = regret_curve(r.record, rounds, data.dim, data.num_tasks);
    out.record = std::move(r.record);
    out.state = std::move(r.state);
    return out;
}

std::vector<ShuffleRun> run_shuffles(const ExperimentConfig &config, const Dataset &data) {
    std::vector<ShuffleRun> runs(config.shuffles);
    parallel_for(config.shuffles, thread_count(config, config.shuffles),
                 [&](std::size_t k) { runs[k] = run_shuffle(config, data, k); });
    return runs;
}

MetricSummary summarize(const std::vector<ShuffleRun> &runs, std::size_t tasks) {
    std::vector<RunRecord> records;
    for (const auto &r : runs)
        records.push_back(r.record);
    return aggregate_shuffles(records, tasks);
}

// Collects output files in a staging directory and moves them into place only
// once all of them were written.
class StagedOutput {
  public:
    explicit StagedOutput(const fs::path &dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw ConfigError("cannot create output directory '" + dir_.string() + "'");
        stage_ = dir_ / (".romco-staging-" + std::to_string(::getpid()));
        fs::create_directories(stage_, ec);
        if (ec)
            throw ConfigError("output directory '" + dir_.string() + "' is not writable");
    }
    StagedOutput(const StagedOutput &) = delete;
    StagedOutput &operator=(const StagedOutput &) = delete;
    ~StagedOutput() {
        std::error_code ec;
        fs::remove_all(stage_, ec);
    }

    std::ofstream open(const std::string &name) {
        names_.push_back(name);
        std::ofstream out(stage_ / name, std::ios::binary);
        if (!out)
            throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
        return out;
    }

    void commit() {
        for (const auto &n : names_) {
            std::error_code ec;
            fs::rename(stage_ / n, dir_ / n, ec);
            if (ec)
                throw ConfigError("cannot move '" + n + "' into '" + dir_.string() + "'");
        }
    }

  private:
    fs::path dir_;
    fs::path stage_;
    std::vector<std::string> names_;
};

const char *label_text(Label y) { return y == Label::Positive ? "1" : "-1"; }

void write_curve(std::ostream &out, const RunRecord &rec) {
    out << "# schema=1\nround,instances_seen,task_id,truth,pred,loss,cum_err_rate\n";
    std::size_t seen = 0;
    for (const auto &e : rec.entries) {
        ++seen;
        out << e.round_id << ',' << seen << ',' << e.task_id << ',' << label_text(e.truth) << ','
            << label_text(e.prediction) << ',' << format_real(e.loss) << ','
            << format_real(static_cast<double>(e.cumulative_errors) / static_cast<double>(seen))
            << '\n';
    }
}

void write_summary_row(std::ostream &out, Variant v, const std::string &task,
                       const TaskSummary &s, double runtime) {
    out << variant_name(v) << ',' << task << ',' << format_real(s.error_rate.mean) << ','
        << format_real(s.error_rate.stddev) << ',' << format_real(s.f1_pos.mean) << ','
        << format_real(s.f1_pos.stddev) << ',' << format_real(s.f1_neg.mean) << ','
        << format_real(s.f1_neg.stddev) << ',' << format_real(runtime) << '\n';
}

void write_summary(std::ostream &out, const ExperimentConfig &config, const MetricSummary &s) {
    out << "# schema=1\n"
           "variant,task_id,error_rate_mean,error_rate_std,f1_pos_mean,f1_pos_std,"
           "f1_neg_mean,f1_neg_std,runtime_sec\n";
    const double runtime = config.record_timing ? s.runtime_sec.mean : 0.0;
    for (std::size_t i = 0; i < s.per_task.size(); ++i)
        write_summary_row(out, config.params.variant, std::to_string(i), s.per_task[i], runtime);
    write_summary_row(out, config.params.variant, "all", s.overall, runtime);
}

// Mean regret over shuffles at each doubling horizon.
void write_regret(std::ostream &out, const std::vector<ShuffleRun> &runs) {
    out << "# schema=1\n";
    double g = 0.0;
    for (const auto &r : runs)
        g = std::max(g, r.regret->max_grad_norm);
    out << "# max_grad_norm=" << format_real(g) << '\n';
    out << "T,regret,ratio\n";
    const auto &first = runs.front().regret->curve;
    double prev = 0.0;
    for (std::size_t j = 0; j < first.size(); ++j) {
        double mean = 0.0;
        for (const auto &r : runs)
            mean += r.regret->curve[j].regret;
        mean /= static_cast<double>(runs.size());
        out << first[j].horizon << ',' << format_real(mean) << ',';
        if (j > 0)
            out << (prev > 0.0 ? format_real(mean / prev) : std::string("inf"));
        out << '\n';
        prev = mean;
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig &config) {
    config.validate();
    ExperimentResult res;
    res.data = load_data(config);
    res.runs = run_shuffles(config, res.data);
    res.summary = summarize(res.runs, res.data.num_tasks);
    return res;
}

void cmd_run(const ExperimentConfig &config) {
    const ExperimentResult res = run_experiment(config);
    StagedOutput out(config.out_dir);
    for (std::size_t k = 0; k < res.runs.size(); ++k) {
        auto f = out.open("curve_" + std::to_string(k) + ".csv");
        write_curve(f, res.runs[k].record);
    }
    {
        auto f = out.open("summary.csv");
        write_summary(f, config, res.summary);
    }
    if (config.regret) {
        auto f = out.open("regret.csv");
        write_regret(f, res.runs);
    }
    out.commit();
}

std::vector<SweepCell> run_sweep(const ExperimentConfig &config, const SweepGrid &grid) {
    config.validate();
    if (grid.lambda1.empty() || grid.lambda2.empty())
        throw ConfigError("sweep grids must be nonempty");
    const Dataset data = load_data(config);
    const std::vector<double> eta1 = grid.eta1.empty() ? std::vector{config.params.eta1} : grid.eta1;
    const std::vector<double> eta2 = grid.eta2.empty() ? std::vector{config.params.eta2} : grid.eta2;

    std::vector<SweepCell> cells;
    for (double e1 : eta1)
        for (double e2 : eta2)
            for (double l1 : grid.lambda1)
                for (double l2 : grid.lambda2) {
                    ExperimentConfig cell = config;
                    cell.regret = false;
                    cell.params.eta1 = e1;
                    cell.params.eta2 = e2;
                    cell.params.lambda1 = l1;
                    cell.params.lambda2 = l2;
                    cell.validate();
                    SweepCell c;
                    c.params = cell.params;
                    c.summary = summarize(run_shuffles(cell, data), data.num_tasks);
                    cells.push_back(std::move(c));
                }
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i)
        if (cells[i].summary.overall.error_rate.mean < cells[best].summary.overall.error_rate.mean)
            best = i;
    cells[best].best = true;
    return cells;
}

void cmd_sweep(const ExperimentConfig &config, const SweepGrid &grid) {
    const auto cells = run_sweep(config, grid);
    StagedOutput out(config.out_dir);
    auto f = out.open("sweep.csv");
    f << "# schema=1\n"
         "variant,eta1,eta2,lambda1,lambda2,error_rate_mean,error_rate_std,f1_pos_mean,"
         "f1_neg_mean,runtime_sec,best\n";
    for (const auto &c : cells) {
        const auto &s = c.summary.overall;
        f << variant_name(c.params.variant) << ',' << format_real(c.params.eta1) << ','
          << format_real(c.params.eta2) << ',' << format_real(c.params.lambda1) << ','
          << format_real(c.params.lambda2) << ',' << format_real(s.error_rate.mean) << ','
          << format_real(s.error_rate.stddev) << ',' << format_real(s.f1_pos.mean) << ','
          << format_real(s.f1_neg.mean) << ','
          << format_real(config.record_timing ? c.summary.runtime_sec.mean : 0.0) << ','
          << (c.best ? 1 : 0) << '\n';
    }
    f.close();
    out.commit();
}

void cmd_gen(const SyntheticSpec &spec, const fs::path &out_dir) {
    const SyntheticData gen = generate_synthetic(spec);
    try {
        StagedOutput out(out_dir);
        {
            auto f = out.open("data.tsvm");
            write_task_svm(gen.data, f);
        }
        {
            auto f = out.open("ground_truth.csv");
            f << "# schema=1\nmatrix,row,col,value\n";
            auto dump = [&](const char *name, const Matrix &M) {
                for (Eigen::Index j = 0; j < M.cols(); ++j)
                    for (Eigen::Index i = 0; i < M.rows(); ++i)
                        f << name << ',' << i << ',' << j << ',' << format_real(M(i, j)) << '\n';
            };
            dump("U", gen.truth.U);
            dump("V", gen.truth.V);
        }
        out.commit();
    } catch (const ConfigError &e) {
        throw DataError(e.what());
    }
}

int exit_code_for(const std::exception &e) {
    if (dynamic_cast<const NumericError *>(&e))
        return 3;
    if (dynamic_cast<const DataError *>(&e) || dynamic_cast<const StructuralError *>(&e))
        return 2;
    return 1;
}

} // namespace romco
