#include "romco/eval.hpp"

#include "romco/error.hpp"
#include "romco/learner.hpp"
#include "romco/prox_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <set>

namespace romco {

namespace {

bool selected(const RecordEntry &e, std::optional<std::size_t> task) {
    return !task || e.task_id == *task;
}

bool same_params(const HyperParams &a, const HyperParams &b) {
    return a.eta1 == b.eta1 && a.eta2 == b.eta2 && a.lambda1 == b.lambda1 &&
           a.lambda2 == b.lambda2 && a.variant == b.variant;
}

} // namespace

std::vector<CurvePoint> cumulative_error_curve(const RunRecord &rec,
                                               std::optional<std::size_t> task) {
    std::vector<CurvePoint> curve;
    std::size_t n = 0, errors = 0;
    for (const auto &e : rec.entries) {
        if (!selected(e, task))
            continue;
        ++n;
        if (e.prediction != e.truth)
            ++errors;
        curve.push_back({n, static_cast<double>(errors) / static_cast<double>(n)});
    }
    return curve;
}

double final_error_rate(const RunRecord &rec, std::optional<std::size_t> task) {
    std::size_t n = 0, errors = 0;
    for (const auto &e : rec.entries) {
        if (!selected(e, task))
            continue;
        ++n;
        errors += e.prediction != e.truth;
    }
    return n ? static_cast<double>(errors) / static_cast<double>(n) : 0.0;
}

ClassScores f1_per_class(const RunRecord &rec, Label cls, std::optional<std::size_t> task) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto &e : rec.entries) {
        if (!selected(e, task))
            continue;
        const bool predicted = e.prediction == cls;
        const bool actual = e.truth == cls;
        tp += predicted && actual;
        fp += predicted && !actual;
        fn += !predicted && actual;
    }
    ClassScores s;
    if (tp + fp > 0)
        s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0)
        s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (s.precision + s.recall > 0.0)
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

MeanStd mean_std(std::span<const double> xs) {
    MeanStd out;
    if (xs.empty())
        return out;
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs)
        sq += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
    return out;
}

MetricSummary aggregate_shuffles(std::span<const RunRecord> records, std::size_t num_tasks) {
    if (records.empty())
        throw ParameterError("aggregate_shuffles: no records");
    for (const auto &r : records) {
        if (!r.valid)
            throw ParameterError("aggregate_shuffles: invalid record: " + r.error);
        if (r.provenance != records.front().provenance ||
            !same_params(r.params, records.front().params))
            throw ParameterError("aggregate_shuffles: records come from different "
                                 "datasets or parameters");
    }

    auto summarize = [&](std::optional<std::size_t> task) {
        std::vector<double> err, pos, neg;
        for (const auto &r : records) {
            err.push_back(final_error_rate(r, task));
            pos.push_back(f1_per_class(r, Label::Positive, task).f1);
            neg.push_back(f1_per_class(r, Label::Negative, task).f1);
        }
        return TaskSummary{mean_std(err), mean_std(pos), mean_std(neg)};
    };

    MetricSummary s;
    s.shuffles = records.size();
    s.single_shuffle = records.size() == 1;
    for (std::size_t i = 0; i < num_tasks; ++i)
        s.per_task.push_back(summarize(i));
    s.overall = summarize(std::nullopt);

    std::vector<double> macro, runtime;
    for (const auto &r : records) {
        std::set<std::size_t> present;
        for (const auto &e : r.entries)
            present.insert(e.task_id);
        double total = 0.0;
        for (std::size_t t : present)
            total += final_error_rate(r, t);
        macro.push_back(present.empty() ? 0.0 : total / static_cast<double>(present.size()));
        runtime.push_back(r.wall_seconds);
    }
    s.macro_error_rate = mean_std(macro);
    s.runtime_sec = mean_std(runtime);
    return s;
}

namespace {

// Hinge loss summed over all rounds.
double total_loss(const WeightState &W, std::span<const Round> rounds) {
    const Matrix Z = W.combined();
    double total = 0.0;
    for (const Round &round : rounds)
        for (const auto &inst : round.instances)
            total += hinge_loss(inst.features.dot(Z.col(static_cast<Eigen::Index>(inst.task_id))),
                                inst.label);
    return total;
}

// All instances of the rounds, one sparse row-major block per task.
class TaskBlocks {
  public:
    TaskBlocks(std::span<const Round> rounds, std::size_t dim, std::size_t tasks)
        : X_(tasks), dense_(tasks), y_(tasks) {
        std::vector<std::vector<Eigen::Triplet<double>>> trip(tasks);
        std::vector<std::vector<double>> labels(tasks);
        for (const Round &r : rounds)
            for (const auto &inst : r.instances) {
                const auto row = static_cast<int>(labels[inst.task_id].size());
                for (std::size_t k = 0; k < inst.features.index.size(); ++k)
                    trip[inst.task_id].emplace_back(row, static_cast<int>(inst.features.index[k]),
                                                    inst.features.value[k]);
                labels[inst.task_id].push_back(to_real(inst.label));
            }
        for (std::size_t i = 0; i < tasks; ++i) {
            const auto rows = static_cast<Eigen::Index>(labels[i].size());
            X_[i].resize(rows, static_cast<Eigen::Index>(dim));
            X_[i].setFromTriplets(trip[i].begin(), trip[i].end());
            y_[i] = Eigen::Map<const Vector>(labels[i].data(), rows);
            // Mostly-filled blocks are faster as dense products.
            if (static_cast<double>(trip[i].size()) > 0.25 * static_cast<double>(rows) * static_cast<double>(dim)) {
                dense_[i] = Matrix(X_[i]);
                X_[i] = {};
            }
        }
    }

    struct Loss {
        double smooth = 0.0;
        double exact = 0.0;
    };

    // Exact hinge total and its Huber smoothing of width mu (which lies within
    // mu/2 below it), with the gradient of the smoothed total in grad.
    Loss evaluate(const WeightState &W, double mu, Matrix *grad) const {
        Loss out;
        if (grad)
            grad->setZero(W.U.rows(), W.U.cols());
        const Matrix Z = W.combined();
        for (std::size_t i = 0; i < X_.size(); ++i) {
            const bool dense = dense_[i].size() > 0;
            if (!dense && X_[i].rows() == 0)
                continue;
            const auto col = static_cast<Eigen::Index>(i);
            const Vector scores = dense ? Vector(dense_[i] * Z.col(col)) : Vector(X_[i] * Z.col(col));
            const Vector gap = 1.0 - y_[i].cwiseProduct(scores).array();
            Vector coef = Vector::Zero(gap.size());
            for (Eigen::Index k = 0; k < gap.size(); ++k) {
                const double g = gap[k];
                if (g <= 0.0)
                    continue;
                out.exact += g;
                if (g < mu) {
                    out.smooth += g * g / (2.0 * mu);
                    coef[k] = -y_[i][k] * g / mu;
                } else {
                    out.smooth += g - 0.5 * mu;
                    coef[k] = -y_[i][k];
                }
            }
            if (grad)
                grad->col(col) = dense ? Vector(dense_[i].transpose() * coef)
                                       : Vector(X_[i].transpose() * coef);
        }
        return out;
    }

  private:
    std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> X_;
    std::vector<Matrix> dense_;
    std::vector<Vector> y_;
};

} // namespace

double hindsight_objective(const WeightState &state, std::span<const Round> rounds,
                           const HyperParams &params) {
    return total_loss(state, rounds) +
           static_cast<double>(rounds.size()) * composite_regularizer(state, params);
}

ComparatorResult hindsight_comparator(std::span<const Round> rounds, std::size_t dim,
                                      std::size_t tasks, const HyperParams &params,
                                      const ComparatorOptions &options) {
    ComparatorResult res;
    res.state = WeightState(dim, tasks);
    for (const Round &r : rounds)
        check_round(res.state, r);
    if (rounds.empty()) {
        res.converged = true;
        res.trace.push_back(0.0);
        return res;
    }

    const double T = static_cast<double>(rounds.size());
    double max_sq = 0.0;
    for (const Round &r : rounds)
        for (const auto &inst : r.instances)
            max_sq = std::max(max_sq, inst.features.squared_norm());

    const double loss = total_loss(res.state, rounds);
    res.objective = loss + T * composite_regularizer(res.state, params);
    res.trace.push_back(res.objective);
    if (max_sq == 0.0) {
        res.converged = true;
        return res;
    }
    const double base_step = 1.0 / (T * max_sq);
    const TaskBlocks blocks(rounds, dim, tasks);

    auto prox_pair = [&](const WeightState &from, const Matrix &g, double step) {
        WeightState next;
        const Matrix U_hat = from.U - step * g;
        const Matrix V_hat = from.V - step * g;
        if (params.variant == Variant::LogD)
            next.U = prox_logdet_rho(U_hat, step * T * params.lambda1);
        else
            next.U = prox_nuclear(U_hat, step * T * params.lambda1);
        next.V = prox_group_lasso(V_hat, step * T * params.lambda2);
        return next;
    };

    // Accelerated proximal gradient on the Huber-smoothed loss with
    // backtracking on the step. The smoothing width halves once a stage stalls
    // or after kSmoothingStage iterations; the best iterate under the true
    // objective is kept, so the reported trace never increases.
    constexpr std::size_t kSmoothingStage = 100;
    constexpr double kMinSmoothing = 1e-5;
    constexpr double kStall = 1e-5;
    double mu = 1.0;
    double step = base_step;
    WeightState x = res.state, y = res.state;
    double t = 1.0;
    double prev_smooth = std::numeric_limits<double>::infinity();
    std::size_t stage_len = 0;
    bool stalled = false;
    while (res.iterations < options.max_iterations) {
        ++res.iterations;
        if (mu > kMinSmoothing && (stage_len >= kSmoothingStage || stalled)) {
            mu = std::max(0.5 * mu, kMinSmoothing);
            stage_len = 0;
            prev_smooth = std::numeric_limits<double>::infinity();
        }
        ++stage_len;
        Matrix g;
        const double fy = blocks.evaluate(y, mu, &g).smooth;
        WeightState next;
        TaskBlocks::Loss ln;
        for (step = std::max(step * 2.0, base_step);; step *= 0.5) {
            next = prox_pair(y, g, step);
            ln = blocks.evaluate(next, mu, nullptr);
            const double fn = ln.smooth;
            const Matrix dU = next.U - y.U, dV = next.V - y.V;
            const double model = fy + g.cwiseProduct(dU + dV).sum() +
                                 (dU.squaredNorm() + dV.squaredNorm()) / (2.0 * step);
            if (fn <= model + 1e-12 * std::abs(fy) || step <= base_step * 1e-12)
                break;
        }
        const double reg = T * composite_regularizer(next, params);
        const double smooth_obj = ln.smooth + reg;
        double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        if (smooth_obj > prev_smooth) {
            // Restart momentum.
            t = 1.0;
            t_next = 1.0;
        }
        y.U = next.U + ((t - 1.0) / t_next) * (next.U - x.U);
        y.V = next.V + ((t - 1.0) / t_next) * (next.V - x.V);
        x = next;
        t = t_next;

        const double true_obj = ln.exact + reg;
        if (true_obj < res.objective) {
            res.objective = true_obj;
            res.state = next;
        }
        res.trace.push_back(res.objective);

        const double change = std::abs(prev_smooth - smooth_obj) /
                              std::max(std::abs(smooth_obj), 1e-300);
        prev_smooth = smooth_obj;
        stalled = change < kStall;
        if (mu <= kMinSmoothing && change < options.relative_tolerance) {
            res.converged = true;
            break;
        }
    }
    return res;
}

double regret_value(std::span<const double> composite, std::size_t horizon,
                    double comparator_objective) {
    if (horizon > composite.size())
        throw ParameterError("regret horizon exceeds recorded rounds");
    double online = 0.0;
    for (std::size_t t = 0; t < horizon; ++t)
        online += composite[t];
    return online - comparator_objective;
}

RegretReport regret_curve(const RunRecord &rec, std::span<const Round> rounds,
                          std::size_t dim, std::size_t tasks, std::size_t levels,
                          const ComparatorOptions &options) {
    const std::size_t T = rec.composite.size();
    if (T > rounds.size())
        throw ParameterError("regret_curve: record covers more rounds than supplied");
    RegretReport report;
    report.max_grad_norm = rec.max_grad_norm;
    if (T == 0)
        return report;

    std::vector<std::size_t> horizons;
    for (std::size_t j = 0; j < std::max<std::size_t>(levels, 2) && (T >> j) > 0; ++j)
        horizons.push_back(T >> j);
    std::reverse(horizons.begin(), horizons.end());

    for (std::size_t h : horizons) {
        const ComparatorResult cmp =
            hindsight_comparator(rounds.first(h), dim, tasks, rec.params, options);
        RegretPoint p;
        p.horizon = h;
        p.comparator_objective = cmp.objective;
        p.regret = regret_value(rec.composite, h, cmp.objective);
        p.ratio = std::numeric_limits<double>::quiet_NaN();
        if (!report.curve.empty()) {
            const double prev = report.curve.back().regret;
            p.ratio = prev > 0.0 ? p.regret / prev : std::numeric_limits<double>::infinity();
        }
        report.curve.push_back(p);
    }
    const RegretPoint &last = report.curve.back();
    report.ratio = report.curve.size() > 1 ? last.ratio
                                           : std::numeric_limits<double>::quiet_NaN();
    report.comparator_ok = last.regret >= -1e-3 * std::abs(last.comparator_objective);
    return report;
}

} // namespace romco
