#pragma once

#include "romco/core_model.hpp"
#include "romco/run_record.hpp"

#include <span>
#include <vector>

namespace romco {

struct LearnerOptions {
    /// Multiplicative growth applied to 1/rho after every log-det update.
    /// 1.0 keeps rho fixed at eta1 * lambda1.
    double rho_growth = 1.0;
    /// Aggressiveness C of the passive-aggressive baselines.
    double pa_aggressiveness = 1.0;
};

struct TaskOutcome {
    std::size_t task_id = 0;
    double score = 0.0;
    Label prediction = Label::Positive;
    Label truth = Label::Positive;
    double loss = 0.0;
};

struct StepResult {
    /// One outcome per round instance, sorted by task id. Computed from the
    /// state before this round's update.
    std::vector<TaskOutcome> outcomes;
    bool updated = false;
    double total_loss = 0.0;
    double grad_norm = 0.0;
};

/// Passive-aggressive update w <- w + tau y x with tau = min(C, loss/||x||^2).
/// Returns false on the passive branch or when ||x|| == 0.
bool pa_update(Eigen::Ref<Vector> w, const SparseVector &x, Label y, double C);

/// Online multi-task learner. ROMCO variants keep W = U + V with a low-rank
/// U and a column-sparse V and update only on rounds with a positive loss.
/// PA-Unique keeps one independent PA model per task in the columns of U;
/// PA-Global keeps a single shared model replicated across those columns.
class Learner {
  public:
    Learner(const HyperParams &params, std::size_t dim, std::size_t tasks,
            LearnerOptions options = {});

    /// Predicts every instance with the current state, then applies at most
    /// one update. On error the state is left untouched.
    StepResult step(const Round &round);

    const WeightState &state() const { return state_; }
    const HyperParams &params() const { return params_; }
    std::size_t rounds_seen() const { return rounds_; }
    std::size_t updates() const { return updates_; }
    /// rho used by the next log-det update.
    double current_rho() const;

  private:
    bool update_romco(const Round &round, StepResult &result);
    bool update_pa(const Round &round, StepResult &result);

    HyperParams params_;
    LearnerOptions options_;
    WeightState state_;
    std::size_t rounds_ = 0;
    std::size_t updates_ = 0;
    double inv_rho_scale_ = 1.0;
};

struct RunOptions {
    LearnerOptions learner;
    /// Record L_t(W_t) + r(W_t) per round for the regret diagnostic.
    bool record_composite = false;
    std::string provenance;
};

struct RunResult {
    RunRecord record;
    WeightState state;
};

/// Drives a fresh learner over the rounds. A structural or numeric failure
/// stops the run and returns the partial record with valid == false.
RunResult run_sequence(const HyperParams &params, std::size_t dim,
                       std::size_t tasks, std::span<const Round> rounds,
                       const RunOptions &options = {});

/// lambda1 r(U) + lambda2 ||V||_{2,1} where r is the nuclear norm for NuCl
/// and the log-det penalty for LogD. Zero for the PA variants.
double composite_regularizer(const WeightState &state, const HyperParams &params);

} // namespace romco
