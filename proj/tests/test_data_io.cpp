#include "romco/data_io.hpp"
#include "romco/error.hpp"
#include "romco/prox_ops.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace romco;

namespace {

Dataset parse(const std::string &text) {
    std::istringstream in(text);
    return parse_task_svm(in, "mem");
}

std::string error_of(const std::string &text) {
    try {
        parse(text);
    } catch (const DataError &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("task-svm basic line") {
    const auto d = parse("0\t+1\t0:1.5 3:2.0\n");
    CHECK(d.num_tasks == 1);
    CHECK(d.dim == 4);
    REQUIRE(d.per_task[0].size() == 1);
    const auto &x = d.per_task[0][0].features;
    CHECK(x.dim == 4);
    CHECK(x.index == std::vector<std::size_t>{0, 3});
    CHECK(x.value == std::vector<double>{1.5, 2.0});
    CHECK(d.per_task[0][0].label == Label::Positive);
}

TEST_CASE("task-svm empty input") {
    const auto d = parse("");
    CHECK(d.num_tasks == 0);
    CHECK(d.size() == 0);
    CHECK(shuffle_rounds(d, 1).empty());
}

TEST_CASE("task-svm validation errors carry line numbers") {
    CHECK(error_of("2\t0\t0:1\n").find("mem:1:") != std::string::npos);
    CHECK(error_of("2\t0\t0:1\n").find("label") != std::string::npos);
    CHECK(error_of("0\t+1\t0:1\n0\t-1\t1:nan\n").find("mem:2:") != std::string::npos);
    CHECK(error_of("0\t+1\t3:1 1:2\n").find("increasing") != std::string::npos);
    CHECK(error_of("#d=2\n0\t+1\t5:1\n").find("out of range") != std::string::npos);
    CHECK(error_of("#m=1\n3\t+1\t0:1\n").find("unknown task") != std::string::npos);
    CHECK(error_of("x\t+1\t0:1\n").find("unknown task") != std::string::npos);
    CHECK(error_of("0\t+1\t0-1\n").find("malformed") != std::string::npos);
    CHECK(error_of("0 +1 0:1\n").find("expected") != std::string::npos);
}

TEST_CASE("task-svm headers pin the shape") {
    const auto d = parse("#d=10\n#m=3\n1\t-1\t2:1\n");
    CHECK(d.dim == 10);
    CHECK(d.num_tasks == 3);
    CHECK(d.per_task[0].empty());
    CHECK(d.per_task[1].size() == 1);
}

TEST_CASE("dense-csv") {
    std::istringstream in("task,label,f0,f1,f2\n1,-1,0,2.5,1\n0,+1,1,0,0\n");
    const auto d = parse_dense_csv(in, "mem");
    CHECK(d.num_tasks == 2);
    CHECK(d.dim == 3);
    CHECK(d.per_task[1][0].features.index == std::vector<std::size_t>{1, 2});
    std::istringstream bad("task,label,f0\n0,1,2,3\n");
    CHECK_THROWS_AS(parse_dense_csv(bad, "mem"), DataError);
}

TEST_CASE("load_dataset on a missing file") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.tsvm", DataFormat::TaskSvm), DataError);
}

TEST_CASE("property: task-svm write then parse is the identity") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticSpec spec;
        spec.dim = 7;
        spec.tasks = 3 + seed;
        spec.rounds = 10 + seed;
        spec.rank = 2;
        spec.outliers = seed % 3;
        spec.noise = 0.1;
        spec.seed = seed;
        const auto data = generate_synthetic(spec).data;
        std::ostringstream out;
        write_task_svm(data, out);
        CHECK(parse(out.str()) == data);
    }
    // Sparse data with empty trailing tasks and an empty feature list.
    const auto sparse = parse("#d=9\n#m=4\n1\t-1\t2:0.125 8:-3\n1\t+1\t\n");
    std::ostringstream out;
    write_task_svm(sparse, out);
    CHECK(parse(out.str()) == sparse);
}

TEST_CASE("shuffle_rounds") {
    const auto d = parse("0\t+1\t0:1\n0\t+1\t0:2\n0\t-1\t0:3\n1\t+1\t1:1\n");
    const auto rounds = shuffle_rounds(d, 42);
    REQUIRE(rounds.size() == 3);
    CHECK(rounds[0].round_id == 1);
    CHECK(rounds[0].instances.size() == 2);
    CHECK(rounds[1].instances.size() == 1);
    CHECK(rounds[1].instances[0].task_id == 0);
    CHECK(rounds[2].instances.size() == 1);
    CHECK(rounds[2].instances[0].task_id == 0);

    const auto again = shuffle_rounds(d, 42);
    for (std::size_t t = 0; t < rounds.size(); ++t)
        CHECK(rounds[t].instances == again[t].instances);

    // Each task's multiset of instances is preserved.
    std::vector<double> seen;
    for (const auto &r : rounds)
        for (const auto &i : r.instances)
            if (i.task_id == 0)
                seen.push_back(i.features.value[0]);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<double>{1, 2, 3});
}

TEST_CASE("shuffle permutes and depends on the seed") {
    SyntheticSpec spec;
    spec.dim = 3;
    spec.tasks = 2;
    spec.rounds = 30;
    const auto data = generate_synthetic(spec).data;
    const auto a = shuffle_rounds(data, 1), b = shuffle_rounds(data, 2);
    bool differ = false;
    for (std::size_t t = 0; t < a.size(); ++t)
        differ |= !(a[t].instances == b[t].instances);
    CHECK(differ);
}

TEST_CASE("synthetic spec parsing and validation") {
    const auto s = SyntheticSpec::parse("d=20,m=5,T=200,k=2,outliers=1,noise=0.05");
    CHECK(s.dim == 20);
    CHECK(s.tasks == 5);
    CHECK(s.rounds == 200);
    CHECK(s.rank == 2);
    CHECK(s.outliers == 1);
    CHECK(s.noise == 0.05);
    CHECK_THROWS_AS(SyntheticSpec::parse("d=3,m=3,k=4"), ParameterError);
    CHECK_THROWS_AS(SyntheticSpec::parse("m=3,outliers=4"), ParameterError);
    CHECK_THROWS_AS(SyntheticSpec::parse("noise=0.5"), ParameterError);
    CHECK_THROWS_AS(SyntheticSpec::parse("q=1"), ParameterError);
}

TEST_CASE("synthetic ground truth structure") {
    SyntheticSpec spec;
    spec.dim = 12;
    spec.tasks = 6;
    spec.rounds = 40;
    spec.rank = 1;
    spec.outliers = 0;
    spec.noise = 0.0;
    spec.seed = 3;
    const auto g = generate_synthetic(spec);
    CHECK(g.truth.V.isZero(0.0));
    // Rank one: every column is parallel to the first.
    const Vector u0 = g.truth.U.col(0).normalized();
    for (Eigen::Index j = 1; j < 6; ++j)
        CHECK(std::abs(std::abs(u0.dot(g.truth.U.col(j).normalized())) - 1.0) <= 1e-12);
    // Noise-free labels are separable by the ground truth.
    for (std::size_t i = 0; i < spec.tasks; ++i)
        for (const auto &inst : g.data.per_task[i])
            CHECK(sign_label(inst.features.dot(g.truth.combined().col(i))) == inst.label);

    for (std::size_t k = 1; k <= 4; ++k) {
        spec.rank = k;
        spec.outliers = 2;
        const auto h = generate_synthetic(spec);
        CHECK(svd_thin(h.truth.U).rank() == k);
        std::size_t nonzero = 0;
        for (Eigen::Index j = 0; j < 6; ++j)
            if (h.truth.V.col(j).norm() > 0.0) {
                ++nonzero;
                CHECK(h.truth.V.col(j).norm() == doctest::Approx(5.0));
            }
        CHECK(nonzero == 2);
    }
}

TEST_CASE("seed derivation separates streams") {
    CHECK(derive_seed(1, 0, SeedPurpose::Data) != derive_seed(1, 0, SeedPurpose::Shuffle));
    CHECK(derive_seed(1, 0, SeedPurpose::Shuffle) != derive_seed(1, 1, SeedPurpose::Shuffle));
    CHECK(derive_seed(1, 0, SeedPurpose::Shuffle) == derive_seed(1, 0, SeedPurpose::Shuffle));
}
