#include "romco/learner.hpp"

#include "romco/error.hpp"
#include "romco/prox_ops.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace romco {

bool pa_update(Eigen::Ref<Vector> w, const SparseVector &x, Label y, double C) {
    const double loss = hinge_loss(x.dot(w), y);
    if (loss <= 0.0)
        return false;
    const double sq = x.squared_norm();
    if (sq == 0.0)
        return false;
    const double tau = std::min(C, loss / sq);
    const double step = tau * to_real(y);
    for (std::size_t k = 0; k < x.index.size(); ++k)
        w[static_cast<Eigen::Index>(x.index[k])] += step * x.value[k];
    return true;
}

Learner::Learner(const HyperParams &params, std::size_t dim, std::size_t tasks,
                 LearnerOptions options)
    : params_(params), options_(options), state_(dim, tasks) {
    params_.validate();
    if (!(options_.rho_growth >= 1.0) || !std::isfinite(options_.rho_growth))
        throw ParameterError("rho growth factor must be >= 1");
    if (!(options_.pa_aggressiveness > 0.0))
        throw ParameterError("PA aggressiveness must be positive");
}

double Learner::current_rho() const { return params_.rho() / inv_rho_scale_; }

StepResult Learner::step(const Round &round) {
    check_round(state_, round);

    StepResult result;
    result.outcomes.reserve(round.instances.size());
    for (const auto &inst : round.instances) {
        const auto col = static_cast<Eigen::Index>(inst.task_id);
        const double score =
            inst.features.dot(state_.U.col(col)) + inst.features.dot(state_.V.col(col));
        const double loss = hinge_loss(score, inst.label);
        result.outcomes.push_back({inst.task_id, score, sign_label(score), inst.label, loss});
        result.total_loss += loss;
    }
    std::sort(result.outcomes.begin(), result.outcomes.end(),
              [](const TaskOutcome &a, const TaskOutcome &b) { return a.task_id < b.task_id; });

    const bool any_loss = std::any_of(result.outcomes.begin(), result.outcomes.end(),
                                      [](const TaskOutcome &o) { return o.loss > 0.0; });
    if (any_loss) {
        const bool pa = params_.variant == Variant::PaGlobal ||
                        params_.variant == Variant::PaUnique;
        result.updated = pa ? update_pa(round, result) : update_romco(round, result);
    }
    ++rounds_;
    if (result.updated)
        ++updates_;
    return result;
}

bool Learner::update_romco(const Round &round, StepResult &result) {
    const RoundGradient g = round_loss_and_subgradient(state_, round);
    result.grad_norm = std::sqrt(g.grad_U.squaredNorm() + g.grad_V.squaredNorm());

    const Matrix U_hat = state_.U - params_.eta1 * g.grad_U;
    const Matrix V_hat = state_.V - params_.eta2 * g.grad_V;
    if (!U_hat.allFinite() || !V_hat.allFinite())
        throw NumericError("gradient step overflowed in round " + std::to_string(round.round_id));
    WeightState next;
    if (params_.variant == Variant::LogD)
        next.U = prox_logdet_rho(U_hat, current_rho());
    else
        next.U = prox_nuclear(U_hat, params_.eta1 * params_.lambda1);
    next.V = prox_group_lasso(V_hat, params_.eta2 * params_.lambda2);
    if (!next.all_finite())
        throw NumericError("non-finite weights after update in round " +
                           std::to_string(round.round_id));
    state_ = std::move(next);
    if (params_.variant == Variant::LogD)
        inv_rho_scale_ *= options_.rho_growth;
    return true;
}

bool Learner::update_pa(const Round &round, StepResult &result) {
    const double C = options_.pa_aggressiveness;
    double sq = 0.0;
    for (const auto &o : result.outcomes)
        if (o.loss > 0.0)
            for (const auto &inst : round.instances)
                if (inst.task_id == o.task_id)
                    sq += inst.features.squared_norm();
    result.grad_norm = std::sqrt(sq);

    std::vector<const TaskInstance *> ordered;
    for (const auto &inst : round.instances)
        ordered.push_back(&inst);
    std::sort(ordered.begin(), ordered.end(),
              [](const TaskInstance *a, const TaskInstance *b) { return a->task_id < b->task_id; });

    Matrix next = state_.U;
    bool changed = false;
    if (params_.variant == Variant::PaUnique) {
        for (const TaskInstance *inst : ordered)
            changed |= pa_update(next.col(static_cast<Eigen::Index>(inst->task_id)),
                                 inst->features, inst->label, C);
    } else {
        if (next.cols() == 0)
            return false;
        Vector w = next.col(0);
        for (const TaskInstance *inst : ordered)
            changed |= pa_update(w, inst->features, inst->label, C);
        next.colwise() = w;
    }
    if (!next.allFinite())
        throw NumericError("non-finite weights after update in round " +
                           std::to_string(round.round_id));
    state_.U = std::move(next);
    return changed;
}

double composite_regularizer(const WeightState &state, const HyperParams &params) {
    double r = 0.0;
    switch (params.variant) {
    case Variant::NuCl:
        if (params.lambda1 > 0.0)
            r += params.lambda1 * nuclear_norm(state.U);
        break;
    case Variant::LogD:
        if (params.lambda1 > 0.0)
            r += params.lambda1 * logdet_penalty(state.U);
        break;
    default:
        return 0.0;
    }
    if (params.lambda2 > 0.0)
        r += params.lambda2 * group_lasso_norm(state.V);
    return r;
}

RunResult run_sequence(const HyperParams &params, std::size_t dim, std::size_t tasks,
                       std::span<const Round> rounds, const RunOptions &options) {
    using Clock = std::chrono::steady_clock;
    RunResult out;
    RunRecord &rec = out.record;
    rec.params = params;
    rec.provenance = options.provenance;

    Learner learner(params, dim, tasks, options.learner);
    std::size_t errors = 0;
    double regularizer = 0.0;
    bool regularizer_stale = true;
    const auto run_start = Clock::now();

    for (const Round &round : rounds) {
        const auto t0 = Clock::now();
        try {
            check_round(learner.state(), round);
            double composite = 0.0;
            if (options.record_composite) {
                if (regularizer_stale) {
                    regularizer = composite_regularizer(learner.state(), params);
                    regularizer_stale = false;
                }
                composite = round_loss(learner.state(), round) + regularizer;
            }
            const StepResult step = learner.step(round);
            if (options.record_composite)
                rec.composite.push_back(composite);
            regularizer_stale = regularizer_stale || step.updated;
            rec.max_grad_norm = std::max(rec.max_grad_norm, step.grad_norm);
            for (const auto &o : step.outcomes) {
                if (o.prediction != o.truth)
                    ++errors;
                rec.entries.push_back(
                    {round.round_id, o.task_id, o.truth, o.prediction, o.loss, errors});
            }
        } catch (const StructuralError &e) {
            rec.valid = false;
            rec.failure = RunFailure::Structural;
            rec.error = e.what();
            break;
        } catch (const NumericError &e) {
            rec.valid = false;
            rec.failure = RunFailure::Numeric;
            rec.error = e.what();
            break;
        }
        rec.round_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    }

    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
    rec.rounds = learner.rounds_seen();
    rec.updates = learner.updates();
    out.state = learner.state();
    return out;
}

} // namespace romco
