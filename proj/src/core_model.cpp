#include "romco/core_model.hpp"

#include "romco/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>

namespace romco {

Label parse_label(std::string_view token) {
    if (token == "+1" || token == "1")
        return Label::Positive;
    if (token == "-1")
        return Label::Negative;
    throw StructuralError("label must be +1 or -1, got '" + std::string(token) + "'");
}

SparseVector SparseVector::from_dense(const Vector &x) {
    SparseVector out;
    out.dim = static_cast<std::size_t>(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] != 0.0) {
            out.index.push_back(static_cast<std::size_t>(j));
            out.value.push_back(x[j]);
        }
    }
    return out;
}

Vector SparseVector::to_dense() const {
    Vector x = Vector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < index.size(); ++k)
        x[static_cast<Eigen::Index>(index[k])] = value[k];
    return x;
}

double SparseVector::dot(const Eigen::Ref<const Vector> &w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k)
        s += value[k] * w[static_cast<Eigen::Index>(index[k])];
    return s;
}

double SparseVector::squared_norm() const {
    double s = 0.0;
    for (double v : value)
        s += v * v;
    return s;
}

void SparseVector::validate() const {
    if (index.size() != value.size())
        throw StructuralError("sparse vector index/value length mismatch");
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= dim)
            throw StructuralError("feature index " + std::to_string(index[k]) +
                                  " out of range for dimension " + std::to_string(dim));
        if (k > 0 && index[k] <= index[k - 1])
            throw StructuralError("feature indices must be strictly increasing");
        if (!std::isfinite(value[k]))
            throw StructuralError("non-finite feature value");
    }
}

std::string_view variant_name(Variant v) {
    switch (v) {
    case Variant::NuCl: return "nucl";
    case Variant::LogD: return "logd";
    case Variant::PaGlobal: return "pa-global";
    case Variant::PaUnique: return "pa-unique";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "nucl") return Variant::NuCl;
    if (s == "logd") return Variant::LogD;
    if (s == "pa-global") return Variant::PaGlobal;
    if (s == "pa-unique") return Variant::PaUnique;
    throw ParameterError("unknown algorithm '" + std::string(name) + "'");
}

void HyperParams::validate() const {
    if (!(eta1 > 0.0) || !(eta2 > 0.0) || !std::isfinite(eta1) || !std::isfinite(eta2))
        throw ParameterError("learning rates must be positive and finite");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) ||
        !std::isfinite(lambda2))
        throw ParameterError("regularization weights must be nonnegative and finite");
}

void check_instance(const WeightState &state, const TaskInstance &inst) {
    if (inst.task_id >= state.tasks())
        throw StructuralError("task id " + std::to_string(inst.task_id) +
                              " out of range for " + std::to_string(state.tasks()) +
                              " tasks");
    if (inst.features.dim != state.dim())
        throw StructuralError("feature dimension " + std::to_string(inst.features.dim) +
                              " does not match model dimension " +
                              std::to_string(state.dim()));
    inst.features.validate();
}

void check_round(const WeightState &state, const Round &round) {
    std::set<std::size_t> seen;
    for (const auto &inst : round.instances) {
        check_instance(state, inst);
        if (!seen.insert(inst.task_id).second)
            throw StructuralError("task " + std::to_string(inst.task_id) +
                                  " appears twice in round " +
                                  std::to_string(round.round_id));
    }
}

Prediction predict(const WeightState &state, const TaskInstance &inst) {
    check_instance(state, inst);
    const auto col = static_cast<Eigen::Index>(inst.task_id);
    const double score = inst.features.dot(state.U.col(col)) + inst.features.dot(state.V.col(col));
    return {score, sign_label(score)};
}

RoundGradient round_loss_and_subgradient(const WeightState &state, const Round &round) {
    check_round(state, round);
    RoundGradient g;
    g.grad_U = Matrix::Zero(state.U.rows(), state.U.cols());
    for (const auto &inst : round.instances) {
        const auto col = static_cast<Eigen::Index>(inst.task_id);
        const double score =
            inst.features.dot(state.U.col(col)) + inst.features.dot(state.V.col(col));
        const double loss = hinge_loss(score, inst.label);
        g.per_task_loss[inst.task_id] = loss;
        g.total_loss += loss;
        if (loss > 0.0) {
            const double y = to_real(inst.label);
            for (std::size_t k = 0; k < inst.features.index.size(); ++k)
                g.grad_U(static_cast<Eigen::Index>(inst.features.index[k]), col) -=
                    y * inst.features.value[k];
        }
    }
    g.grad_V = g.grad_U;
    return g;
}

double round_loss(const WeightState &state, const Round &round) {
    double total = 0.0;
    for (const auto &inst : round.instances) {
        const auto col = static_cast<Eigen::Index>(inst.task_id);
        const double score =
            inst.features.dot(state.U.col(col)) + inst.features.dot(state.V.col(col));
        total += hinge_loss(score, inst.label);
    }
    return total;
}

} // namespace romco
