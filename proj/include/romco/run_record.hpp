#pragma once

#include "romco/core_model.hpp"

#include <string>
#include <vector>

namespace romco {

struct RecordEntry {
    std::size_t round_id = 0;
    std::size_t task_id = 0;
    Label truth = Label::Positive;
    Label prediction = Label::Positive;
    double loss = 0.0;
    /// Mistakes over all entries up to and including this one.
    std::size_t cumulative_errors = 0;
};

enum class RunFailure { None, Structural, Numeric };

/// Prequential trace of one run. Entries are ordered by (round_id, task_id).
struct RunRecord {
    std::vector<RecordEntry> entries;
    /// Wall time of each processed round, in seconds.
    std::vector<double> round_seconds;
    /// L_t(W_t) + r(W_t) per round, evaluated before the update. Only filled
    /// when composite recording is requested.
    std::vector<double> composite;
    double wall_seconds = 0.0;
    /// Largest Frobenius norm of the stacked round subgradient [dU; dV].
    double max_grad_norm = 0.0;
    std::size_t rounds = 0;
    std::size_t updates = 0;
    HyperParams params;
    std::string provenance;
    bool valid = true;
    RunFailure failure = RunFailure::None;
    std::string error;

    std::size_t errors() const {
        return entries.empty() ? 0 : entries.back().cumulative_errors;
    }
};

} // namespace romco
