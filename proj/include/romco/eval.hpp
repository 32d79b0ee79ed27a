#pragma once

#include "romco/core_model.hpp"
#include "romco/run_record.hpp"

#include <optional>
#include <span>
#include <vector>

namespace romco {

struct CurvePoint {
    std::size_t instances_seen = 0;
    double error_rate = 0.0;
};

/// Error rate over the first n entries (optionally one task only), for each n.
std::vector<CurvePoint> cumulative_error_curve(const RunRecord &rec,
                                               std::optional<std::size_t> task = {});

/// Final cumulative error rate; 0 for an empty selection.
double final_error_rate(const RunRecord &rec, std::optional<std::size_t> task = {});

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision, recall and F1 for one class. Empty denominators give 0.
ClassScores f1_per_class(const RunRecord &rec, Label cls,
                         std::optional<std::size_t> task = {});

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Mean and population standard deviation.
MeanStd mean_std(std::span<const double> xs);

struct TaskSummary {
    MeanStd error_rate;
    MeanStd f1_pos;
    MeanStd f1_neg;
};

struct MetricSummary {
    std::vector<TaskSummary> per_task;
    /// Pooled over all tasks.
    TaskSummary overall;
    /// Mean over tasks of the per-task error rate, per shuffle, then averaged.
    MeanStd macro_error_rate;
    MeanStd runtime_sec;
    std::size_t shuffles = 0;
    bool single_shuffle = false;
};

/// Aggregates shuffles of one configuration. Throws ParameterError on an
/// empty list, an invalid record or records from different data/params.
MetricSummary aggregate_shuffles(std::span<const RunRecord> records,
                                 std::size_t num_tasks);

struct ComparatorOptions {
    std::size_t max_iterations = 500;
    double relative_tolerance = 1e-8;
};

struct ComparatorResult {
    WeightState state;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Objective after every accepted iteration, starting at W = 0.
    std::vector<double> trace;
};

/// sum_t [L_t(W) + r(W)] for a fixed W over the rounds.
double hindsight_objective(const WeightState &state, std::span<const Round> rounds,
                           const HyperParams &params);

/// Batch minimizer of the hindsight objective using the same prox pair as the
/// online learner: accelerated proximal gradient on a Huber-smoothed hinge
/// whose width shrinks toward 1e-5, starting at zero with step floor
/// 1/(T max ||x||^2). Keeps the best iterate under the exact objective.
ComparatorResult hindsight_comparator(std::span<const Round> rounds,
                                      std::size_t dim, std::size_t tasks,
                                      const HyperParams &params,
                                      const ComparatorOptions &options = {});

struct RegretPoint {
    std::size_t horizon = 0;
    double regret = 0.0;
    double comparator_objective = 0.0;
    /// regret(horizon) / regret(horizon / 2); NaN for the shortest horizon.
    double ratio = 0.0;
};

struct RegretReport {
    std::vector<RegretPoint> curve;
    /// regret(T) / regret(T/2).
    double ratio = 0.0;
    double max_grad_norm = 0.0;
    /// False if any comparator undercut the online trajectory by more than
    /// its 1e-3 relative optimization gap allowance.
    bool comparator_ok = true;
};

/// regret(T') = sum_{t <= T'} composite_t - comparator objective on the
/// first T' rounds.
double regret_value(std::span<const double> composite, std::size_t horizon,
                    double comparator_objective);

/// Regret at the doubling horizons T >> (levels - 1), ..., T/4, T/2, T in
/// increasing order. Requires rec.composite to be recorded.
RegretReport regret_curve(const RunRecord &rec, std::span<const Round> rounds,
                          std::size_t dim, std::size_t tasks,
                          std::size_t levels = 6,
                          const ComparatorOptions &options = {});

} // namespace romco
