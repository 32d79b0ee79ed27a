#include "oracles.hpp"

#include "romco/core_model.hpp"
#include "romco/error.hpp"

#include <doctest.h>

#include <random>

using namespace romco;

namespace {

TaskInstance dense_instance(std::size_t task, const Vector &x, Label y) {
    return {task, SparseVector::from_dense(x), y};
}

Vector unit(Eigen::Index d, Eigen::Index k) { return Vector::Unit(d, k); }

} // namespace

TEST_CASE("predict at the zero state returns score 0 and label +1") {
    WeightState s(3, 2);
    Vector x(3);
    x << 1.0, -2.0, 0.5;
    const auto p = predict(s, dense_instance(1, x, Label::Negative));
    CHECK(p.score == 0.0);
    CHECK(p.label == Label::Positive);
}

TEST_CASE("predict uses u_i + v_i") {
    WeightState s(2, 1);
    s.U.col(0) = unit(2, 0);
    s.V.col(0) = unit(2, 0);
    auto p = predict(s, dense_instance(0, 3.0 * unit(2, 0), Label::Positive));
    CHECK(p.score == doctest::Approx(6.0));
    CHECK(p.label == Label::Positive);

    s.U.col(0) << 1.0, 0.0;
    s.V.col(0) << 0.0, -2.0;
    p = predict(s, dense_instance(0, Vector::Ones(2), Label::Positive));
    CHECK(p.score == doctest::Approx(-1.0));
    CHECK(p.label == Label::Negative);
}

TEST_CASE("predict rejects shape mismatches") {
    WeightState s(3, 2);
    CHECK_THROWS_AS(predict(s, dense_instance(2, Vector::Ones(3), Label::Positive)), StructuralError);
    CHECK_THROWS_AS(predict(s, dense_instance(0, Vector::Ones(4), Label::Positive)), StructuralError);
    TaskInstance bad = dense_instance(0, Vector::Ones(3), Label::Positive);
    bad.features.index = {0, 2, 1};
    CHECK_THROWS_AS(predict(s, bad), StructuralError);
}

TEST_CASE("hinge loss") {
    CHECK(hinge_loss(2.0, Label::Positive) == 0.0);
    CHECK(hinge_loss(0.0, Label::Positive) == 1.0);
    CHECK(hinge_loss(-0.5, Label::Positive) == 1.5);
    CHECK(hinge_loss(-3.0, Label::Negative) == 0.0);
    CHECK(hinge_loss(1.0, Label::Positive) == 0.0);
}

TEST_CASE("labels parse strictly") {
    CHECK(parse_label("+1") == Label::Positive);
    CHECK(parse_label("1") == Label::Positive);
    CHECK(parse_label("-1") == Label::Negative);
    CHECK_THROWS_AS(parse_label("0"), StructuralError);
    CHECK_THROWS_AS(parse_label("2"), StructuralError);
}

TEST_CASE("subgradient of an inactive round is zero") {
    WeightState s(2, 2);
    s.U.col(0) << 2.0, 0.0;
    s.U.col(1) << 0.0, -2.0;
    Round r{1, {dense_instance(0, unit(2, 0), Label::Positive),
                dense_instance(1, unit(2, 1), Label::Negative)}};
    const auto g = round_loss_and_subgradient(s, r);
    CHECK(g.total_loss == 0.0);
    CHECK(g.grad_U.isZero(0.0));
    CHECK(g.grad_V.isZero(0.0));
}

TEST_CASE("single violating task puts -y x in its column") {
    WeightState s(3, 3);
    Round r{1, {dense_instance(1, unit(3, 1), Label::Positive)}};
    const auto g = round_loss_and_subgradient(s, r);
    Matrix expected = Matrix::Zero(3, 3);
    expected(1, 1) = -1.0;
    CHECK(g.total_loss == 1.0);
    CHECK(g.grad_U == expected);
    CHECK(g.grad_V == expected);
    CHECK(g.per_task_loss.at(1) == 1.0);
}

TEST_CASE("two violating tasks add up") {
    WeightState s(3, 3);
    Vector x0(3), x2(3);
    x0 << 0.5, -1.0, 2.0;
    x2 << -0.3, 0.4, 0.1;
    const auto a = round_loss_and_subgradient(s, {1, {dense_instance(0, x0, Label::Positive)}});
    const auto b = round_loss_and_subgradient(s, {1, {dense_instance(2, x2, Label::Negative)}});
    const auto both = round_loss_and_subgradient(
        s, {1, {dense_instance(0, x0, Label::Positive), dense_instance(2, x2, Label::Negative)}});
    CHECK((both.grad_U - (a.grad_U + b.grad_U)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(both.total_loss == doctest::Approx(a.total_loss + b.total_loss));
}

TEST_CASE("duplicate tasks in a round are structural errors") {
    WeightState s(2, 2);
    Round r{1, {dense_instance(0, unit(2, 0), Label::Positive),
                dense_instance(0, unit(2, 1), Label::Positive)}};
    CHECK_THROWS_AS(round_loss_and_subgradient(s, r), StructuralError);
}

TEST_CASE("property: prediction only depends on U + V") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        WeightState s(6, 4);
        s.U = oracle::gaussian(6, 4, rng);
        s.V = oracle::gaussian(6, 4, rng);
        const Matrix A = oracle::gaussian(6, 4, rng);
        WeightState t{};
        t.U = s.U + A;
        t.V = s.V - A;
        const auto inst = dense_instance(trial % 4, oracle::gaussian(6, 1, rng), Label::Positive);
        CHECK(predict(s, inst).score == doctest::Approx(predict(t, inst).score).epsilon(1e-12));
    }
}

TEST_CASE("property: gradient blocks agree and match central differences") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dims(1, 10), tasks(1, 5);
    int checked = 0;
    while (checked < 40) {
        const int d = dims(rng), m = tasks(rng);
        WeightState s(d, m);
        s.U = oracle::gaussian(d, m, rng);
        s.V = oracle::gaussian(d, m, rng);
        Round r{1, {}};
        for (int i = 0; i < m; ++i)
            r.instances.push_back(dense_instance(i, oracle::gaussian(d, 1, rng),
                                                 (rng() & 1) ? Label::Positive : Label::Negative));
        const auto g = round_loss_and_subgradient(s, r);
        bool near_kink = false;
        for (const auto &inst : r.instances) {
            const double margin = to_real(inst.label) * predict(s, inst).score;
            near_kink |= std::abs(1.0 - margin) < 1e-3;
        }
        if (near_kink)
            continue;
        CHECK(g.grad_U == g.grad_V);
        auto loss_of_U = [&](const Matrix &U) {
            WeightState t = s;
            t.U = U;
            return round_loss_and_subgradient(t, r).total_loss;
        };
        const Matrix fd = oracle::finite_difference(loss_of_U, s.U, 1e-6);
        CHECK((fd - g.grad_U).cwiseAbs().maxCoeff() <= 1e-4);
        ++checked;
    }
}
