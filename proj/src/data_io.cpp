#include "romco/data_io.hpp"

#include "romco/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace romco {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    if (s.empty())
        return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars rejects a leading '+'.
        if (s.front() == '+')
            s.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return value;
}

std::string where(const std::string &source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

// Sizes the per-task lists and stamps the final dimension on every instance.
Dataset finish(std::vector<TaskInstance> &&instances, std::size_t tasks, std::size_t dim,
               const std::string &source) {
    Dataset data;
    data.num_tasks = tasks;
    data.dim = dim;
    data.provenance = source;
    data.per_task.resize(tasks);
    for (auto &inst : instances) {
        inst.features.dim = dim;
        data.per_task[inst.task_id].push_back(std::move(inst));
    }
    return data;
}

} // namespace

std::size_t Dataset::size() const {
    std::size_t n = 0;
    for (const auto &t : per_task)
        n += t.size();
    return n;
}

DataFormat parse_format(std::string_view name) {
    if (name == "task-svm")
        return DataFormat::TaskSvm;
    if (name == "dense-csv")
        return DataFormat::DenseCsv;
    throw ConfigError("unknown data format '" + std::string(name) + "'");
}

Dataset parse_task_svm(std::istream &in, const std::string &source) {
    std::vector<TaskInstance> instances;
    std::optional<std::size_t> pinned_dim, pinned_tasks;
    std::size_t max_task = 0, max_index = 0;
    bool any_index = false;
    std::string raw;
    std::vector<std::size_t> line_of;

    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
        std::string_view line(raw);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            if (line.starts_with("#d=") || line.starts_with("#m=")) {
                const auto n = parse_number<std::size_t>(line.substr(3));
                if (!n)
                    throw DataError(where(source, line_no) + "bad header '" + std::string(line) + "'");
                (line[1] == 'd' ? pinned_dim : pinned_tasks) = *n;
            }
            continue;
        }

        const auto fields = split(line, '\t');
        if (fields.size() < 2 || fields.size() > 3)
            throw DataError(where(source, line_no) +
                            "expected task<TAB>label<TAB>features");
        TaskInstance inst;
        const auto task = parse_number<std::size_t>(fields[0]);
        if (!task)
            throw DataError(where(source, line_no) + "unknown task id '" +
                            std::string(fields[0]) + "'");
        inst.task_id = *task;
        try {
            inst.label = parse_label(fields[1]);
        } catch (const StructuralError &e) {
            throw DataError(where(source, line_no) + e.what());
        }
        if (fields.size() == 3 && !fields[2].empty()) {
            for (std::string_view tok : split(fields[2], ' ')) {
                if (tok.empty())
                    continue;
                const auto colon = tok.find(':');
                if (colon == std::string_view::npos)
                    throw DataError(where(source, line_no) + "malformed feature '" +
                                    std::string(tok) + "'");
                const auto idx = parse_number<std::size_t>(tok.substr(0, colon));
                const auto val = parse_number<double>(tok.substr(colon + 1));
                if (!idx)
                    throw DataError(where(source, line_no) + "bad feature index '" +
                                    std::string(tok) + "'");
                if (!val || !std::isfinite(*val))
                    throw DataError(where(source, line_no) + "non-finite or malformed value '" +
                                    std::string(tok) + "'");
                if (!inst.features.index.empty() && *idx <= inst.features.index.back())
                    throw DataError(where(source, line_no) +
                                    "feature indices must be strictly increasing");
                inst.features.index.push_back(*idx);
                inst.features.value.push_back(*val);
                max_index = std::max(max_index, *idx);
                any_index = true;
            }
        }
        max_task = std::max(max_task, inst.task_id);
        instances.push_back(std::move(inst));
        line_of.push_back(line_no);
    }

    const std::size_t tasks = pinned_tasks.value_or(instances.empty() ? 0 : max_task + 1);
    const std::size_t dim = pinned_dim.value_or(any_index ? max_index + 1 : 0);
    for (std::size_t k = 0; k < instances.size(); ++k) {
        if (instances[k].task_id >= tasks)
            throw DataError(where(source, line_of[k]) + "unknown task id " +
                            std::to_string(instances[k].task_id));
        if (!instances[k].features.index.empty() && instances[k].features.index.back() >= dim)
            throw DataError(where(source, line_of[k]) + "feature index " +
                            std::to_string(instances[k].features.index.back()) +
                            " out of range for d=" + std::to_string(dim));
    }
    return finish(std::move(instances), tasks, dim, source);
}

Dataset parse_dense_csv(std::istream &in, const std::string &source) {
    std::string raw;
    std::size_t line_no = 1;
    if (!std::getline(in, raw))
        return finish({}, 0, 0, source);
    if (!raw.empty() && raw.back() == '\r')
        raw.pop_back();
    const auto header = split(raw, ',');
    if (header.size() < 2 || header[0] != "task" || header[1] != "label")
        throw DataError(where(source, line_no) + "header must start with task,label");
    const std::size_t dim = header.size() - 2;
    for (std::size_t j = 0; j < dim; ++j)
        if (header[j + 2] != "f" + std::to_string(j))
            throw DataError(where(source, line_no) + "expected column f" + std::to_string(j));

    std::vector<TaskInstance> instances;
    std::size_t max_task = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        const auto fields = split(line, ',');
        if (fields.size() != dim + 2)
            throw DataError(where(source, line_no) + "expected " + std::to_string(dim + 2) +
                            " columns, got " + std::to_string(fields.size()));
        TaskInstance inst;
        const auto task = parse_number<std::size_t>(fields[0]);
        if (!task)
            throw DataError(where(source, line_no) + "unknown task id '" +
                            std::string(fields[0]) + "'");
        inst.task_id = *task;
        try {
            inst.label = parse_label(fields[1]);
        } catch (const StructuralError &e) {
            throw DataError(where(source, line_no) + e.what());
        }
        for (std::size_t j = 0; j < dim; ++j) {
            const auto val = parse_number<double>(fields[j + 2]);
            if (!val || !std::isfinite(*val))
                throw DataError(where(source, line_no) + "non-finite or malformed value '" +
                                std::string(fields[j + 2]) + "'");
            if (*val != 0.0) {
                inst.features.index.push_back(j);
                inst.features.value.push_back(*val);
            }
        }
        max_task = std::max(max_task, inst.task_id);
        instances.push_back(std::move(inst));
    }
    const std::size_t tasks = instances.empty() ? 0 : max_task + 1;
    return finish(std::move(instances), tasks, dim, source);
}

Dataset load_dataset(const std::filesystem::path &path, DataFormat format) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open data file '" + path.string() + "'");
    const std::string source = path.string();
    Dataset data = format == DataFormat::TaskSvm ? parse_task_svm(in, source)
                                                 : parse_dense_csv(in, source);
    data.provenance = "file:" + source;
    return data;
}

void write_task_svm(const Dataset &data, std::ostream &out) {
    char buf[64];
    out << "#d=" << data.dim << '\n' << "#m=" << data.num_tasks << '\n';
    for (const auto &task : data.per_task) {
        for (const auto &inst : task) {
            out << inst.task_id << '\t' << (inst.label == Label::Positive ? "+1" : "-1") << '\t';
            for (std::size_t k = 0; k < inst.features.index.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.17g", inst.features.value[k]);
                out << (k ? " " : "") << inst.features.index[k] << ':' << buf;
            }
            out << '\n';
        }
    }
}

void write_task_svm(const Dataset &data, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    write_task_svm(data, out);
    if (!out)
        throw ConfigError("write failed for '" + path.string() + "'");
}

namespace {

std::vector<Round> bundle(const std::vector<std::vector<const TaskInstance *>> &order) {
    std::size_t longest = 0;
    for (const auto &t : order)
        longest = std::max(longest, t.size());
    std::vector<Round> rounds(longest);
    for (std::size_t r = 0; r < longest; ++r) {
        rounds[r].round_id = r + 1;
        for (const auto &t : order)
            if (r < t.size())
                rounds[r].instances.push_back(*t[r]);
    }
    return rounds;
}

} // namespace

std::vector<Round> assemble_rounds(const Dataset &data) {
    std::vector<std::vector<const TaskInstance *>> order(data.per_task.size());
    for (std::size_t i = 0; i < data.per_task.size(); ++i)
        for (const auto &inst : data.per_task[i])
            order[i].push_back(&inst);
    return bundle(order);
}

std::vector<Round> shuffle_rounds(const Dataset &data, std::uint64_t seed) {
    std::vector<std::vector<const TaskInstance *>> order(data.per_task.size());
    for (std::size_t i = 0; i < data.per_task.size(); ++i) {
        for (const auto &inst : data.per_task[i])
            order[i].push_back(&inst);
        std::mt19937_64 rng(derive_seed(seed, i, SeedPurpose::Shuffle));
        std::shuffle(order[i].begin(), order[i].end(), rng);
    }
    return bundle(order);
}

void SyntheticSpec::validate() const {
    if (dim == 0 || tasks == 0)
        throw ParameterError("synthetic: d and m must be positive");
    if (rank < 1 || rank > std::min(dim, tasks))
        throw ParameterError("synthetic: rank k must lie in [1, min(d, m)]");
    if (outliers > tasks)
        throw ParameterError("synthetic: outliers must lie in [0, m]");
    if (!(noise >= 0.0 && noise < 0.5))
        throw ParameterError("synthetic: noise must lie in [0, 0.5)");
}

SyntheticSpec SyntheticSpec::parse(std::string_view text) {
    SyntheticSpec spec;
    for (std::string_view item : split(text, ',')) {
        if (item.empty())
            continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ParameterError("synthetic: expected key=value, got '" + std::string(item) + "'");
        const std::string_view key = item.substr(0, eq);
        const std::string_view val = item.substr(eq + 1);
        auto need_size = [&](std::size_t &dst) {
            const auto n = parse_number<std::size_t>(val);
            if (!n)
                throw ParameterError("synthetic: bad value for " + std::string(key));
            dst = *n;
        };
        if (key == "d") need_size(spec.dim);
        else if (key == "m") need_size(spec.tasks);
        else if (key == "T") need_size(spec.rounds);
        else if (key == "k") need_size(spec.rank);
        else if (key == "outliers") need_size(spec.outliers);
        else if (key == "noise") {
            const auto x = parse_number<double>(val);
            if (!x)
                throw ParameterError("synthetic: bad value for noise");
            spec.noise = *x;
        } else if (key == "seed") {
            const auto n = parse_number<std::uint64_t>(val);
            if (!n)
                throw ParameterError("synthetic: bad value for seed");
            spec.seed = *n;
        } else {
            throw ParameterError("synthetic: unknown key '" + std::string(key) + "'");
        }
    }
    spec.validate();
    return spec;
}

SyntheticData generate_synthetic(const SyntheticSpec &spec) {
    spec.validate();
    std::mt19937_64 rng(derive_seed(spec.seed, 0, SeedPurpose::Data));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution flip(spec.noise);
    const auto d = static_cast<Eigen::Index>(spec.dim);
    const auto m = static_cast<Eigen::Index>(spec.tasks);
    const auto k = static_cast<Eigen::Index>(spec.rank);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.rank));

    auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
        Matrix M(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                M(i, j) = normal(rng);
        return M;
    };

    SyntheticData out;
    const Matrix A = gaussian(d, k) * scale;
    const Matrix B = gaussian(m, k) * scale;
    out.truth.U = A * B.transpose();
    out.truth.V = Matrix::Zero(d, m);

    std::vector<std::size_t> cols(spec.tasks);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize(spec.outliers);
    std::sort(cols.begin(), cols.end());
    for (std::size_t c : cols) {
        Vector v = gaussian(d, 1);
        out.truth.V.col(static_cast<Eigen::Index>(c)) = 5.0 * v / v.norm();
    }

    const Matrix W = out.truth.combined();
    Dataset &data = out.data;
    data.num_tasks = spec.tasks;
    data.dim = spec.dim;
    data.per_task.resize(spec.tasks);
    for (std::size_t i = 0; i < spec.tasks; ++i) {
        auto &list = data.per_task[i];
        list.reserve(spec.rounds);
        for (std::size_t t = 0; t < spec.rounds; ++t) {
            const Vector x = gaussian(d, 1);
            Label y = sign_label(W.col(static_cast<Eigen::Index>(i)).dot(x));
            if (flip(rng))
                y = y == Label::Positive ? Label::Negative : Label::Positive;
            TaskInstance inst;
            inst.task_id = i;
            inst.label = y;
            inst.features.dim = spec.dim;
            inst.features.index.resize(spec.dim);
            std::iota(inst.features.index.begin(), inst.features.index.end(), 0);
            inst.features.value.assign(x.data(), x.data() + x.size());
            list.push_back(std::move(inst));
        }
    }
    std::ostringstream prov;
    prov << "synthetic:d=" << spec.dim << ",m=" << spec.tasks << ",T=" << spec.rounds
         << ",k=" << spec.rank << ",outliers=" << spec.outliers << ",noise=" << spec.noise
         << ",seed=" << spec.seed;
    data.provenance = prov.str();
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, SeedPurpose purpose) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    return mix(mix(mix(seed) ^ index) ^ static_cast<std::uint64_t>(purpose));
}

} // namespace romco
