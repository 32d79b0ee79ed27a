#include "romco/data_io.hpp"
#include "romco/error.hpp"
#include "romco/eval.hpp"
#include "romco/learner.hpp"

#include <doctest.h>

#include <cmath>

using namespace romco;

namespace {

RunRecord make_record(const std::vector<std::pair<int, int>> &truth_pred, std::size_t task = 0) {
    RunRecord rec;
    std::size_t errs = 0, round = 1;
    for (auto [t, p] : truth_pred) {
        RecordEntry e;
        e.round_id = round++;
        e.task_id = task;
        e.truth = t > 0 ? Label::Positive : Label::Negative;
        e.prediction = p > 0 ? Label::Positive : Label::Negative;
        errs += e.truth != e.prediction;
        e.cumulative_errors = errs;
        rec.entries.push_back(e);
    }
    rec.rounds = rec.entries.size();
    rec.provenance = "test";
    return rec;
}

SyntheticData small_synthetic(std::uint64_t seed, double noise = 0.0) {
    SyntheticSpec spec;
    spec.dim = 20;
    spec.tasks = 5;
    spec.rounds = 200;
    spec.rank = 2;
    spec.noise = noise;
    spec.seed = seed;
    return generate_synthetic(spec);
}

} // namespace

TEST_CASE("cumulative error curve") {
    const auto ok = make_record({{1, 1}, {-1, -1}, {1, 1}});
    for (const auto &p : cumulative_error_curve(ok))
        CHECK(p.error_rate == 0.0);

    const auto alt = make_record({{1, -1}, {1, 1}, {-1, 1}});
    const auto c = cumulative_error_curve(alt);
    REQUIRE(c.size() == 3);
    CHECK(c[0].instances_seen == 1);
    CHECK(c[0].error_rate == doctest::Approx(1.0));
    CHECK(c[1].error_rate == doctest::Approx(0.5));
    CHECK(c[2].error_rate == doctest::Approx(2.0 / 3.0));
    CHECK(final_error_rate(alt) == doctest::Approx(2.0 / 3.0));
    CHECK(final_error_rate(alt, 4) == 0.0);
    CHECK(cumulative_error_curve(RunRecord{}).empty());
}

TEST_CASE("per-task curve filters entries") {
    auto rec = make_record({{1, -1}, {1, 1}});
    rec.entries[1].task_id = 1;
    CHECK(final_error_rate(rec, 0) == 1.0);
    CHECK(final_error_rate(rec, 1) == 0.0);
    CHECK(final_error_rate(rec) == 0.5);
}

TEST_CASE("F1 per class") {
    // TP=2, FP=1, FN=1 for the positive class.
    const auto rec = make_record({{1, 1}, {1, 1}, {-1, 1}, {1, -1}});
    const auto s = f1_per_class(rec, Label::Positive);
    CHECK(s.precision == doctest::Approx(2.0 / 3.0));
    CHECK(s.recall == doctest::Approx(2.0 / 3.0));
    CHECK(s.f1 == doctest::Approx(2.0 / 3.0));

    const auto none = make_record({{1, 1}, {1, 1}});
    const auto n = f1_per_class(none, Label::Negative);
    CHECK(n.precision == 0.0);
    CHECK(n.recall == 0.0);
    CHECK(n.f1 == 0.0);
}

TEST_CASE("mean and population stddev") {
    const std::vector<double> xs{0.1, 0.3};
    const auto m = mean_std(xs);
    CHECK(m.mean == doctest::Approx(0.2));
    CHECK(m.stddev == doctest::Approx(0.1));
}

TEST_CASE("aggregate_shuffles") {
    auto a = make_record({{1, -1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}});
    auto b = make_record({{1, -1}, {1, -1}, {1, -1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}});
    const std::vector<RunRecord> two{a, b};
    const auto s = aggregate_shuffles(two, 1);
    CHECK(s.shuffles == 2);
    CHECK_FALSE(s.single_shuffle);
    CHECK(s.overall.error_rate.mean == doctest::Approx(0.2));
    CHECK(s.overall.error_rate.stddev == doctest::Approx(0.1));
    CHECK(s.per_task[0].error_rate.mean == doctest::Approx(0.2));

    const std::vector<RunRecord> one{a};
    const auto single = aggregate_shuffles(one, 1);
    CHECK(single.single_shuffle);
    CHECK(single.overall.error_rate.stddev == 0.0);

    CHECK_THROWS_AS(aggregate_shuffles(std::span<const RunRecord>{}, 1), ParameterError);
    auto c = b;
    c.provenance = "other";
    const std::vector<RunRecord> mixed{a, c};
    CHECK_THROWS_AS(aggregate_shuffles(mixed, 1), ParameterError);
    auto d = b;
    d.params.lambda1 = 0.5;
    const std::vector<RunRecord> mixed_params{a, d};
    CHECK_THROWS_AS(aggregate_shuffles(mixed_params, 1), ParameterError);
    auto e = b;
    e.valid = false;
    const std::vector<RunRecord> invalid{a, e};
    CHECK_THROWS_AS(aggregate_shuffles(invalid, 1), ParameterError);
}

TEST_CASE("comparator on an empty stream") {
    HyperParams p;
    const auto r = hindsight_comparator({}, 4, 2, p);
    CHECK(r.objective == 0.0);
    CHECK(r.state == WeightState(4, 2));
}

TEST_CASE("comparator trace is monotone") {
    const auto g = small_synthetic(1, 0.1);
    const auto rounds = shuffle_rounds(g.data, 1);
    for (Variant v : {Variant::NuCl, Variant::LogD}) {
        HyperParams p;
        p.variant = v;
        p.lambda1 = 0.05;
        p.lambda2 = 0.05;
        const auto r = hindsight_comparator(rounds, 20, 5, p);
        REQUIRE(r.trace.size() >= 2);
        for (std::size_t k = 1; k < r.trace.size(); ++k)
            CHECK(r.trace[k] <= r.trace[k - 1]);
        CHECK(r.objective == doctest::Approx(hindsight_objective(r.state, rounds, p)));
        CHECK(r.objective < r.trace.front());
    }
}

TEST_CASE("comparator fits separable data") {
    const auto g = small_synthetic(0);
    const auto rounds = shuffle_rounds(g.data, 0);
    HyperParams p;
    p.lambda1 = 1e-6;
    p.lambda2 = 1e-6;
    const auto r = hindsight_comparator(rounds, 20, 5, p);
    double loss = 0.0;
    for (const auto &round : rounds)
        loss += round_loss(r.state, round);
    CHECK(loss <= 1e-3 * rounds.size());
}

TEST_CASE("regret") {
    const std::vector<double> comp{1.0, 2.0, 3.0};
    CHECK(regret_value(comp, 2, 1.0) == doctest::Approx(2.0));
    CHECK(regret_value(comp, 3, 6.0) == doctest::Approx(0.0));

    const auto g = small_synthetic(3, 0.05);
    const auto rounds = shuffle_rounds(g.data, 3);
    HyperParams p;
    RunOptions opts;
    opts.record_composite = true;
    const auto run = run_sequence(p, 20, 5, rounds, opts);
    const auto rep = regret_curve(run.record, rounds, 20, 5, 4);
    REQUIRE(rep.curve.size() == 4);
    CHECK(rep.curve.back().horizon == rounds.size());
    CHECK(std::isnan(rep.curve.front().ratio));
    for (const auto &pt : rep.curve)
        CHECK(pt.regret >= 0.0);
    CHECK(rep.comparator_ok);
    CHECK(rep.max_grad_norm > 0.0);
}

TEST_CASE("regret of a stream with zero loss everywhere") {
    std::vector<Round> rounds;
    for (std::size_t t = 1; t <= 8; ++t) {
        Round r;
        r.round_id = t;
        TaskInstance inst;
        inst.task_id = 0;
        inst.features = SparseVector::from_dense(Vector::Constant(2, 0.0));
        inst.label = Label::Positive;
        r.instances.push_back(inst);
        rounds.push_back(r);
    }
    // x = 0: loss is 1 for every W and the learner stays at zero.
    HyperParams p;
    RunOptions opts;
    opts.record_composite = true;
    const auto run = run_sequence(p, 2, 1, rounds, opts);
    const auto rep = regret_curve(run.record, rounds, 2, 1, 3);
    for (const auto &pt : rep.curve)
        CHECK(pt.regret <= 1e-12);
}
