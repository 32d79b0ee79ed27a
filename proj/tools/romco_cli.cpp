// Command-line front end: run, sweep and gen, all through the C API.

#include "romco/romco.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct RunFlags {
    std::string data;
    std::string format = "task-svm";
    std::string synthetic;
    std::string algo = "nucl";
    double eta1 = 0.1, eta2 = 0.1, lambda1 = 0.01, lambda2 = 0.01;
    std::size_t shuffles = 10;
    std::uint64_t seed = 0;
    std::string out = ".";
    bool regret = false;
    bool timing = false;
    std::string eta_schedule = "constant";
    std::size_t horizon = 0;
    double rho_growth = 1.0;
    std::size_t threads = 0;
};

void add_run_flags(CLI::App *cmd, RunFlags &f) {
    cmd->add_option("--data", f.data, "Dataset file");
    cmd->add_option("--format", f.format, "Dataset format")
        ->check(CLI::IsMember({"task-svm", "dense-csv"}));
    cmd->add_option("--synthetic", f.synthetic,
                    "Synthetic spec, e.g. d=20,m=5,T=200,k=2,outliers=1,noise=0.05");
    cmd->add_option("--algo", f.algo, "nucl | logd | pa-global | pa-unique");
    cmd->add_option("--eta1", f.eta1, "Learning rate of the low-rank part");
    cmd->add_option("--eta2", f.eta2, "Learning rate of the column-sparse part");
    cmd->add_option("--lambda1", f.lambda1, "Weight of the rank surrogate");
    cmd->add_option("--lambda2", f.lambda2, "Weight of the group lasso");
    cmd->add_option("--shuffles", f.shuffles, "Number of shuffled repetitions");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--eta-schedule", f.eta_schedule,
                    "constant, or theory for eta1 = eta2 = 1/sqrt(horizon)")
        ->check(CLI::IsMember({"constant", "theory"}));
    cmd->add_option("--horizon", f.horizon, "Horizon of the theory schedule (default: rounds)");
    cmd->add_option("--rho-growth", f.rho_growth,
                    "Factor applied to 1/rho after each log-det update (1 = off)");
    cmd->add_flag("--timing", f.timing, "Write measured wall time to runtime_sec");
    cmd->add_option("--threads", f.threads, "Parallel shuffle runs (overrides ROMCO_THREADS)");
}

int to_config(const RunFlags &f, romco_run_config &cfg) {
    romco_run_config_init(&cfg);
    if (romco_variant_parse(f.algo.c_str(), &cfg.params.variant) != ROMCO_OK) {
        std::fprintf(stderr, "error: %s\n", romco_last_error());
        return 1;
    }
    cfg.data_path = f.data.empty() ? nullptr : f.data.c_str();
    cfg.data_format = f.format.c_str();
    cfg.synthetic = f.synthetic.empty() ? nullptr : f.synthetic.c_str();
    cfg.params.eta1 = f.eta1;
    cfg.params.eta2 = f.eta2;
    cfg.params.lambda1 = f.lambda1;
    cfg.params.lambda2 = f.lambda2;
    cfg.params.seed = f.seed;
    cfg.shuffles = f.shuffles;
    cfg.out_dir = f.out.c_str();
    cfg.regret = f.regret;
    cfg.record_timing = f.timing;
    cfg.eta_schedule_theory = f.eta_schedule == "theory";
    cfg.horizon = f.horizon;
    cfg.rho_growth = f.rho_growth;
    cfg.threads = f.threads;
    return 0;
}

int report(romco_status s) {
    if (s != ROMCO_OK)
        std::fprintf(stderr, "error: %s\n", romco_last_error());
    return romco_exit_code(s);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Online multi-task learning with low-rank and column-sparse structure"};
    app.require_subcommand(1);

    RunFlags run;
    auto *run_cmd = app.add_subcommand("run", "Run shuffled experiments and write CSV results");
    add_run_flags(run_cmd, run);
    run_cmd->add_flag("--regret", run.regret, "Also write regret.csv");

    RunFlags sweep;
    std::vector<double> l1_grid, l2_grid, e1_grid, e2_grid;
    auto *sweep_cmd = app.add_subcommand("sweep", "Grid search over lambda1 x lambda2 (x eta)");
    add_run_flags(sweep_cmd, sweep);
    sweep_cmd->add_option("--lambda1-grid", l1_grid, "Comma list (default 1e-6..1e0)")->delimiter(',');
    sweep_cmd->add_option("--lambda2-grid", l2_grid, "Comma list (default 1e-6..1e0)")->delimiter(',');
    sweep_cmd->add_option("--eta1-grid", e1_grid, "Comma list (default: --eta1)")->delimiter(',');
    sweep_cmd->add_option("--eta2-grid", e2_grid, "Comma list (default: --eta2)")->delimiter(',');

    std::string gen_spec, gen_out = ".";
    std::uint64_t gen_seed = 0;
    auto *gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset and its ground truth");
    gen_cmd->add_option("--synthetic", gen_spec, "Synthetic spec")->required();
    gen_cmd->add_option("--seed", gen_seed, "Seed");
    gen_cmd->add_option("--out", gen_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*run_cmd) {
        romco_run_config cfg;
        if (to_config(run, cfg) != 0)
            return 1;
        return report(romco_cmd_run(&cfg));
    }
    if (*sweep_cmd) {
        romco_run_config cfg;
        if (to_config(sweep, cfg) != 0)
            return 1;
        const romco_sweep_grid grid{l1_grid.data(), l1_grid.size(), l2_grid.data(),
                                    l2_grid.size(), e1_grid.data(),  e1_grid.size(),
                                    e2_grid.data(), e2_grid.size()};
        return report(romco_cmd_sweep(&cfg, &grid));
    }
    return report(romco_cmd_gen(gen_spec.c_str(), gen_seed, gen_out.c_str()));
}
