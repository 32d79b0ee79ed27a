#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace romco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Label : int { Negative = -1, Positive = 1 };

inline double to_real(Label y) { return static_cast<int>(y); }

/// Parses "+1", "1" or "-1". Throws StructuralError otherwise.
Label parse_label(std::string_view token);

/// Sparse feature vector of a fixed dimension. Indices are strictly
/// increasing and lie in [0, dim).
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::size_t> index;
    std::vector<double> value;

    static SparseVector from_dense(const Vector &x);
    Vector to_dense() const;
    double dot(const Eigen::Ref<const Vector> &w) const;
    double squared_norm() const;
    /// Throws StructuralError when the invariants do not hold.
    void validate() const;

    bool operator==(const SparseVector &) const = default;
};

struct TaskInstance {
    std::size_t task_id = 0;
    SparseVector features;
    Label label = Label::Positive;

    bool operator==(const TaskInstance &) const = default;
};

/// Instances presented at one time step; at most one per task.
struct Round {
    std::size_t round_id = 1;
    std::vector<TaskInstance> instances;
};

/// Learner state W = [U; V]. Task i predicts with u_i + v_i.
struct WeightState {
    Matrix U;
    Matrix V;

    WeightState() = default;
    WeightState(std::size_t dim, std::size_t tasks)
        : U(Matrix::Zero(dim, tasks)), V(Matrix::Zero(dim, tasks)) {}

    std::size_t dim() const { return static_cast<std::size_t>(U.rows()); }
    std::size_t tasks() const { return static_cast<std::size_t>(U.cols()); }
    Matrix combined() const { return U + V; }
    bool all_finite() const { return U.allFinite() && V.allFinite(); }

    bool operator==(const WeightState &o) const {
        return U.rows() == o.U.rows() && U.cols() == o.U.cols() && U == o.U &&
               V == o.V;
    }
};

enum class Variant { NuCl, LogD, PaGlobal, PaUnique };

std::string_view variant_name(Variant v);
/// Accepts "nucl", "logd", "pa-global", "pa-unique" (case-insensitive).
Variant parse_variant(std::string_view name);

struct HyperParams {
    double eta1 = 0.1;
    double eta2 = 0.1;
    double lambda1 = 0.01;
    double lambda2 = 0.01;
    Variant variant = Variant::NuCl;
    std::uint64_t seed = 0;

    /// Product eta1 * lambda1 used by the log-det prox.
    double rho() const { return eta1 * lambda1; }
    /// Throws ParameterError on eta <= 0, lambda < 0 or non-finite values.
    void validate() const;
};

struct Prediction {
    double score = 0.0;
    Label label = Label::Positive;
};

/// Throws StructuralError if the instance does not fit the state shape.
void check_instance(const WeightState &state, const TaskInstance &inst);
/// Checks every instance plus distinct task ids.
void check_round(const WeightState &state, const Round &round);

/// score = (u_i + v_i) . x, label = sign(score) with sign(0) = +1.
Prediction predict(const WeightState &state, const TaskInstance &inst);

inline Label sign_label(double score) {
    return score >= 0.0 ? Label::Positive : Label::Negative;
}

/// [1 - y * score]_+
inline double hinge_loss(double score, Label label) {
    const double margin = 1.0 - to_real(label) * score;
    return margin > 0.0 ? margin : 0.0;
}

struct RoundGradient {
    double total_loss = 0.0;
    Matrix grad_U;
    Matrix grad_V;
    std::map<std::size_t, double> per_task_loss;
};

/// Sum of per-task hinge losses of a round and its subgradient with respect
/// to U and V. Active tasks contribute -y x to their column in both blocks;
/// tasks at or beyond the margin contribute zero.
RoundGradient round_loss_and_subgradient(const WeightState &state,
                                         const Round &round);

/// Loss-only variant of the above, without allocating gradients.
double round_loss(const WeightState &state, const Round &round);

} // namespace romco
