#include "romco/romco.h"

#include "romco/data_io.hpp"
#include "romco/error.hpp"
#include "romco/experiment.hpp"
#include "romco/learner.hpp"
#include "romco/prox_ops.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

struct romco_learner {
    romco::Learner impl;
};

struct romco_dataset {
    romco::Dataset impl;
};

namespace {

thread_local std::string last_error;

romco_status fail(romco_status s, const char *msg) {
    last_error = msg;
    return s;
}

// Runs body and converts the library's exceptions to status codes.
template <class Body>
romco_status guarded(Body &&body) {
    try {
        body();
        return ROMCO_OK;
    } catch (const romco::ConfigError &e) {
        return fail(ROMCO_ERR_CONFIG, e.what());
    } catch (const romco::DataError &e) {
        return fail(ROMCO_ERR_DATA, e.what());
    } catch (const romco::NumericError &e) {
        return fail(ROMCO_ERR_NUMERIC, e.what());
    } catch (const romco::StructuralError &e) {
        return fail(ROMCO_ERR_STRUCTURAL, e.what());
    } catch (const romco::ParameterError &e) {
        return fail(ROMCO_ERR_PARAMETER, e.what());
    } catch (const std::exception &e) {
        return fail(ROMCO_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(ROMCO_ERR_INTERNAL, "unknown error");
    }
}

void require(bool cond, const char *what) {
    if (!cond)
        throw romco::ParameterError(what);
}

romco::HyperParams to_params(const romco_params &p) {
    romco::HyperParams h;
    h.eta1 = p.eta1;
    h.eta2 = p.eta2;
    h.lambda1 = p.lambda1;
    h.lambda2 = p.lambda2;
    h.seed = p.seed;
    switch (p.variant) {
    case ROMCO_NUCL: h.variant = romco::Variant::NuCl; break;
    case ROMCO_LOGD: h.variant = romco::Variant::LogD; break;
    case ROMCO_PA_GLOBAL: h.variant = romco::Variant::PaGlobal; break;
    case ROMCO_PA_UNIQUE: h.variant = romco::Variant::PaUnique; break;
    default: throw romco::ParameterError("unknown variant");
    }
    return h;
}

romco::TaskInstance to_instance(const romco_instance &in, std::size_t dim) {
    romco::TaskInstance inst;
    inst.task_id = in.task_id;
    if (in.label == 1)
        inst.label = romco::Label::Positive;
    else if (in.label == -1)
        inst.label = romco::Label::Negative;
    else
        throw romco::StructuralError("label must be +1 or -1");
    require(in.nnz == 0 || (in.index && in.value), "instance arrays must not be NULL");
    inst.features.dim = dim;
    inst.features.index.assign(in.index, in.index + in.nnz);
    inst.features.value.assign(in.value, in.value + in.nnz);
    return inst;
}

Eigen::Map<const romco::Matrix> view(const double *data, std::size_t rows, std::size_t cols) {
    return {data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

void store(const romco::Matrix &M, double *out) {
    std::copy(M.data(), M.data() + M.size(), out);
}

romco::SyntheticSpec parse_synthetic(const char *text, std::uint64_t seed) {
    const std::string s = text;
    romco::SyntheticSpec spec = romco::SyntheticSpec::parse(s);
    if (s.find("seed=") == std::string::npos)
        spec.seed = seed;
    return spec;
}

romco::ExperimentConfig to_config(const romco_run_config &c) {
    romco::ExperimentConfig cfg;
    try {
        cfg.params = to_params(c.params);
        if (c.data_path)
            cfg.data_path = c.data_path;
        if (c.synthetic)
            cfg.synthetic = parse_synthetic(c.synthetic, c.params.seed);
        if (c.data_format)
            cfg.format = romco::parse_format(c.data_format);
    } catch (const romco::ParameterError &e) {
        throw romco::ConfigError(e.what());
    }
    cfg.eta_schedule = c.eta_schedule_theory ? romco::EtaSchedule::Theory
                                             : romco::EtaSchedule::Constant;
    cfg.horizon = c.horizon;
    cfg.rho_growth = c.rho_growth;
    cfg.shuffles = c.shuffles;
    cfg.out_dir = c.out_dir ? c.out_dir : ".";
    cfg.regret = c.regret != 0;
    cfg.record_timing = c.record_timing != 0;
    cfg.threads = c.threads;
    return cfg;
}

std::vector<double> list(const double *xs, std::size_t n) {
    return xs ? std::vector<double>(xs, xs + n) : std::vector<double>{};
}

} // namespace

extern "C" {

const char *romco_version(void) { return "1.0.0"; }

const char *romco_last_error(void) { return last_error.c_str(); }

int romco_exit_code(romco_status status) {
    switch (status) {
    case ROMCO_OK: return 0;
    case ROMCO_ERR_DATA:
    case ROMCO_ERR_STRUCTURAL: return 2;
    case ROMCO_ERR_NUMERIC: return 3;
    default: return 1;
    }
}

void romco_params_init(romco_params *params) {
    if (!params)
        return;
    const romco::HyperParams h;
    *params = {h.eta1, h.eta2, h.lambda1, h.lambda2, ROMCO_NUCL, h.seed};
}

romco_status romco_variant_parse(const char *name, romco_variant *out) {
    return guarded([&] {
        require(name && out, "NULL argument");
        switch (romco::parse_variant(name)) {
        case romco::Variant::NuCl: *out = ROMCO_NUCL; break;
        case romco::Variant::LogD: *out = ROMCO_LOGD; break;
        case romco::Variant::PaGlobal: *out = ROMCO_PA_GLOBAL; break;
        case romco::Variant::PaUnique: *out = ROMCO_PA_UNIQUE; break;
        }
    });
}

romco_status romco_learner_create(const romco_params *params, size_t dim, size_t tasks,
                                  double rho_growth, romco_learner **out) {
    return guarded([&] {
        require(params && out, "NULL argument");
        romco::LearnerOptions opts;
        opts.rho_growth = rho_growth;
        *out = new romco_learner{romco::Learner(to_params(*params), dim, tasks, opts)};
    });
}

void romco_learner_destroy(romco_learner *learner) { delete learner; }

romco_status romco_learner_step(romco_learner *learner, const romco_instance *instances,
                                size_t count, int *predictions, int *updated) {
    return guarded([&] {
        require(learner && (count == 0 || (instances && predictions)), "NULL argument");
        romco::Round round;
        round.round_id = learner->impl.rounds_seen() + 1;
        for (std::size_t k = 0; k < count; ++k)
            round.instances.push_back(to_instance(instances[k], learner->impl.state().dim()));
        const romco::StepResult r = learner->impl.step(round);
        for (std::size_t k = 0; k < count; ++k) {
            const auto it = std::find_if(r.outcomes.begin(), r.outcomes.end(),
                                         [&](const romco::TaskOutcome &o) {
                                             return o.task_id == instances[k].task_id;
                                         });
            predictions[k] = static_cast<int>(it->prediction);
        }
        if (updated)
            *updated = r.updated ? 1 : 0;
    });
}

romco_status romco_learner_predict(const romco_learner *learner, const romco_instance *instance,
                                   double *score, int *label) {
    return guarded([&] {
        require(learner && instance, "NULL argument");
        const auto p = romco::predict(learner->impl.state(),
                                      to_instance(*instance, learner->impl.state().dim()));
        if (score)
            *score = p.score;
        if (label)
            *label = static_cast<int>(p.label);
    });
}

romco_status romco_learner_weights(const romco_learner *learner, double *U, double *V) {
    return guarded([&] {
        require(learner != nullptr, "NULL argument");
        if (U)
            store(learner->impl.state().U, U);
        if (V)
            store(learner->impl.state().V, V);
    });
}

romco_status romco_learner_shape(const romco_learner *learner, size_t *dim, size_t *tasks) {
    return guarded([&] {
        require(learner != nullptr, "NULL argument");
        if (dim)
            *dim = learner->impl.state().dim();
        if (tasks)
            *tasks = learner->impl.state().tasks();
    });
}

romco_status romco_learner_counters(const romco_learner *learner, size_t *rounds,
                                    size_t *updates) {
    return guarded([&] {
        require(learner != nullptr, "NULL argument");
        if (rounds)
            *rounds = learner->impl.rounds_seen();
        if (updates)
            *updates = learner->impl.updates();
    });
}

romco_status romco_prox_nuclear(const double *in, size_t rows, size_t cols, double threshold,
                                double *out) {
    return guarded([&] {
        require(in && out, "NULL argument");
        store(romco::prox_nuclear(view(in, rows, cols), threshold), out);
    });
}

romco_status romco_prox_group_lasso(const double *in, size_t rows, size_t cols,
                                    double threshold, double *out) {
    return guarded([&] {
        require(in && out, "NULL argument");
        store(romco::prox_group_lasso(view(in, rows, cols), threshold), out);
    });
}

romco_status romco_prox_logdet(const double *in, size_t rows, size_t cols, double eta1,
                               double lambda1, double *out) {
    return guarded([&] {
        require(in && out, "NULL argument");
        store(romco::prox_logdet(view(in, rows, cols), eta1, lambda1), out);
    });
}

romco_status romco_logdet_scalar_prox(double sigma_hat, double rho, double *out) {
    return guarded([&] {
        require(out != nullptr, "NULL argument");
        *out = romco::logdet_scalar_prox(sigma_hat, rho);
    });
}

romco_status romco_solve_cubic(double a, double b, double c, double d, double *roots,
                               size_t *count) {
    return guarded([&] {
        require(roots && count, "NULL argument");
        const auto r = romco::solve_cubic({a, b, c, d});
        std::copy(r.begin(), r.end(), roots);
        *count = r.size();
    });
}

romco_status romco_dataset_load(const char *path, const char *format, romco_dataset **out) {
    return guarded([&] {
        require(path && out, "NULL argument");
        romco::DataFormat f = romco::DataFormat::TaskSvm;
        if (format)
            f = romco::parse_format(format);
        *out = new romco_dataset{romco::load_dataset(path, f)};
    });
}

romco_status romco_dataset_generate(const char *spec, uint64_t seed, romco_dataset **out) {
    return guarded([&] {
        require(spec && out, "NULL argument");
        *out = new romco_dataset{romco::generate_synthetic(parse_synthetic(spec, seed)).data};
    });
}

romco_status romco_dataset_write(const romco_dataset *data, const char *path) {
    return guarded([&] {
        require(data && path, "NULL argument");
        romco::write_task_svm(data->impl, std::filesystem::path(path));
    });
}

romco_status romco_dataset_shape(const romco_dataset *data, size_t *tasks, size_t *dim,
                                 size_t *instances) {
    return guarded([&] {
        require(data != nullptr, "NULL argument");
        if (tasks)
            *tasks = data->impl.num_tasks;
        if (dim)
            *dim = data->impl.dim;
        if (instances)
            *instances = data->impl.size();
    });
}

void romco_dataset_destroy(romco_dataset *data) { delete data; }

void romco_run_config_init(romco_run_config *config) {
    if (!config)
        return;
    std::memset(config, 0, sizeof *config);
    romco_params_init(&config->params);
    config->data_format = "task-svm";
    config->rho_growth = 1.0;
    config->shuffles = 10;
    config->out_dir = ".";
}

romco_status romco_cmd_run(const romco_run_config *config) {
    return guarded([&] {
        if (!config)
            throw romco::ConfigError("NULL config");
        romco::cmd_run(to_config(*config));
    });
}

romco_status romco_cmd_sweep(const romco_run_config *config, const romco_sweep_grid *grid) {
    return guarded([&] {
        if (!config)
            throw romco::ConfigError("NULL config");
        romco::SweepGrid g;
        if (grid) {
            g.lambda1 = list(grid->lambda1, grid->lambda1_count);
            g.lambda2 = list(grid->lambda2, grid->lambda2_count);
            g.eta1 = list(grid->eta1, grid->eta1_count);
            g.eta2 = list(grid->eta2, grid->eta2_count);
        }
        if (g.lambda1.empty())
            g.lambda1 = romco::SweepGrid::decades();
        if (g.lambda2.empty())
            g.lambda2 = romco::SweepGrid::decades();
        romco::cmd_sweep(to_config(*config), g);
    });
}

romco_status romco_cmd_gen(const char *synthetic, uint64_t seed, const char *out_dir) {
    return guarded([&] {
        if (!synthetic || !out_dir)
            throw romco::ConfigError("synthetic spec and output directory are required");
        romco::SyntheticSpec spec;
        try {
            spec = parse_synthetic(synthetic, seed);
        } catch (const romco::ParameterError &e) {
            throw romco::ConfigError(e.what());
        }
        romco::cmd_gen(spec, out_dir);
    });
}

} // extern "C"
