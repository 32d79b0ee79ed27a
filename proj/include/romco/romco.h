/*
 * C interface of the romco online multi-task learning library.
 *
 * Objects are opaque handles created by romco_*_create / romco_*_load and
 * released by the matching *_destroy. Every fallible call returns a
 * romco_status; on failure romco_last_error() describes the problem (the
 * message is thread-local and valid until the next failing call on the same
 * thread). Matrices are dense, column-major, rows x cols doubles.
 */
#ifndef ROMCO_H
#define ROMCO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ROMCO_BUILDING_LIBRARY)
#define ROMCO_API __declspec(dllexport)
#else
#define ROMCO_API __declspec(dllimport)
#endif
#else
#define ROMCO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum romco_status {
    ROMCO_OK = 0,
    ROMCO_ERR_CONFIG = 1,
    ROMCO_ERR_DATA = 2,
    ROMCO_ERR_NUMERIC = 3,
    ROMCO_ERR_STRUCTURAL = 4,
    ROMCO_ERR_PARAMETER = 5,
    ROMCO_ERR_INTERNAL = 6
} romco_status;

typedef enum romco_variant {
    ROMCO_NUCL = 0,
    ROMCO_LOGD = 1,
    ROMCO_PA_GLOBAL = 2,
    ROMCO_PA_UNIQUE = 3
} romco_variant;

typedef struct romco_params {
    double eta1;
    double eta2;
    double lambda1;
    double lambda2;
    romco_variant variant;
    uint64_t seed;
} romco_params;

/* One labeled sparse instance; label is +1 or -1, indices strictly
 * increasing and below the learner dimension. */
typedef struct romco_instance {
    size_t task_id;
    int label;
    size_t nnz;
    const size_t *index;
    const double *value;
} romco_instance;

typedef struct romco_learner romco_learner;
typedef struct romco_dataset romco_dataset;

ROMCO_API const char *romco_version(void);
ROMCO_API const char *romco_last_error(void);
/* Process exit code for a status: 0 ok, 1 config, 2 data, 3 numeric. */
ROMCO_API int romco_exit_code(romco_status status);

ROMCO_API void romco_params_init(romco_params *params);
/* "nucl", "logd", "pa-global" or "pa-unique". */
ROMCO_API romco_status romco_variant_parse(const char *name, romco_variant *out);

/* Learner ---------------------------------------------------------------- */

/* rho_growth multiplies 1/rho after each log-det update; pass 1.0 to keep it
 * fixed. */
ROMCO_API romco_status romco_learner_create(const romco_params *params, size_t dim,
                                            size_t tasks, double rho_growth,
                                            romco_learner **out);
ROMCO_API void romco_learner_destroy(romco_learner *learner);

/* Processes one round. predictions[k] receives the +1/-1 prediction for
 * instances[k], made before the update. updated may be NULL. */
ROMCO_API romco_status romco_learner_step(romco_learner *learner,
                                          const romco_instance *instances, size_t count,
                                          int *predictions, int *updated);
ROMCO_API romco_status romco_learner_predict(const romco_learner *learner,
                                             const romco_instance *instance, double *score,
                                             int *label);
/* U and V each receive dim * tasks doubles; either may be NULL. */
ROMCO_API romco_status romco_learner_weights(const romco_learner *learner, double *U,
                                             double *V);
ROMCO_API romco_status romco_learner_shape(const romco_learner *learner, size_t *dim,
                                           size_t *tasks);
ROMCO_API romco_status romco_learner_counters(const romco_learner *learner, size_t *rounds,
                                              size_t *updates);

/* Proximal operators ------------------------------------------------------ */

ROMCO_API romco_status romco_prox_nuclear(const double *in, size_t rows, size_t cols,
                                          double threshold, double *out);
ROMCO_API romco_status romco_prox_group_lasso(const double *in, size_t rows, size_t cols,
                                              double threshold, double *out);
ROMCO_API romco_status romco_prox_logdet(const double *in, size_t rows, size_t cols,
                                         double eta1, double lambda1, double *out);
ROMCO_API romco_status romco_logdet_scalar_prox(double sigma_hat, double rho, double *out);
/* Real roots of a s^3 + b s^2 + c s + d in increasing order; roots must hold
 * three doubles. */
ROMCO_API romco_status romco_solve_cubic(double a, double b, double c, double d,
                                         double *roots, size_t *count);

/* Datasets ---------------------------------------------------------------- */

/* format: "task-svm" or "dense-csv". */
ROMCO_API romco_status romco_dataset_load(const char *path, const char *format,
                                          romco_dataset **out);
/* spec: "d=20,m=5,T=200,k=2,outliers=1,noise=0.05"; seed applies unless the
 * spec carries its own seed=. */
ROMCO_API romco_status romco_dataset_generate(const char *spec, uint64_t seed,
                                              romco_dataset **out);
ROMCO_API romco_status romco_dataset_write(const romco_dataset *data, const char *path);
ROMCO_API romco_status romco_dataset_shape(const romco_dataset *data, size_t *tasks,
                                           size_t *dim, size_t *instances);
ROMCO_API void romco_dataset_destroy(romco_dataset *data);

/* Experiments ------------------------------------------------------------- */

typedef struct romco_run_config {
    const char *data_path;   /* NULL when synthetic is set */
    const char *data_format; /* default "task-svm" */
    const char *synthetic;   /* NULL when data_path is set */
    romco_params params;
    int eta_schedule_theory; /* eta1 = eta2 = 1/sqrt(horizon) */
    size_t horizon;          /* 0: number of rounds */
    double rho_growth;       /* 1.0: fixed rho */
    size_t shuffles;         /* default 10 */
    const char *out_dir;     /* default "." */
    int regret;
    int record_timing;
    size_t threads; /* 0: ROMCO_THREADS or number of shuffles */
} romco_run_config;

typedef struct romco_sweep_grid {
    const double *lambda1;
    size_t lambda1_count;
    const double *lambda2;
    size_t lambda2_count;
    const double *eta1; /* may be NULL: keep params.eta1 */
    size_t eta1_count;
    const double *eta2;
    size_t eta2_count;
} romco_sweep_grid;

ROMCO_API void romco_run_config_init(romco_run_config *config);
ROMCO_API romco_status romco_cmd_run(const romco_run_config *config);
/* A NULL grid, or an empty lambda list, uses the decade grid 1e-6 .. 1e0. */
ROMCO_API romco_status romco_cmd_sweep(const romco_run_config *config,
                                       const romco_sweep_grid *grid);
ROMCO_API romco_status romco_cmd_gen(const char *synthetic, uint64_t seed,
                                     const char *out_dir);

#ifdef __cplusplus
}
#endif

#endif /* ROMCO_H */
