#pragma once

#include "romco/core_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace romco {

struct Dataset {
    std::size_t num_tasks = 0;
    std::size_t dim = 0;
    /// per_task[i] holds the instances of task i in file order.
    std::vector<std::vector<TaskInstance>> per_task;
    std::string provenance;

    std::size_t size() const;
    bool operator==(const Dataset &o) const {
        return num_tasks == o.num_tasks && dim == o.dim && per_task == o.per_task;
    }
};

enum class DataFormat { TaskSvm, DenseCsv };

DataFormat parse_format(std::string_view name);

/// Strict loader. task-svm lines are `task<TAB>label<TAB>idx:val idx:val ...`
/// with optional `#d=<n>` / `#m=<n>` headers; dense-csv has a
/// `task,label,f0,f1,...` header. Errors carry the offending line number.
Dataset load_dataset(const std::filesystem::path &path, DataFormat format);
Dataset parse_task_svm(std::istream &in, const std::string &source);
Dataset parse_dense_csv(std::istream &in, const std::string &source);

/// Writes task-svm with `#d=` and `#m=` headers so a reload is identical.
void write_task_svm(const Dataset &data, std::ostream &out);
void write_task_svm(const Dataset &data, const std::filesystem::path &path);

/// Independently permutes each task's instances and bundles the t-th
/// remaining instance of every task into round t.
std::vector<Round> shuffle_rounds(const Dataset &data, std::uint64_t seed);
/// Bundles rounds in file order without shuffling.
std::vector<Round> assemble_rounds(const Dataset &data);

struct SyntheticSpec {
    std::size_t dim = 20;
    std::size_t tasks = 5;
    /// Instances per task.
    std::size_t rounds = 200;
    std::size_t rank = 2;
    std::size_t outliers = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;

    /// Throws ParameterError on violated invariants.
    void validate() const;
    /// Parses "d=20,m=5,T=200,k=2,outliers=1,noise=0.05". Missing keys keep
    /// their defaults.
    static SyntheticSpec parse(std::string_view text);
};

struct SyntheticData {
    Dataset data;
    WeightState truth;
};

/// Planted low-rank plus column-sparse model: U = A B^T with A, B entries
/// N(0, 1/k), V with `outliers` nonzero columns of norm 5, standard normal
/// features and labels sign((u_i + v_i) . x) flipped with probability noise.
SyntheticData generate_synthetic(const SyntheticSpec &spec);

/// Purpose tags of the seed splitting scheme.
enum class SeedPurpose : std::uint64_t { Data = 1, Shuffle = 2, Model = 3 };

/// Derives an independent stream seed from (seed, index, purpose) with a
/// splitmix64 mix.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          SeedPurpose purpose);

} // namespace romco
