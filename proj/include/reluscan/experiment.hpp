#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reluscan/dataset.hpp"
#include "reluscan/enumerate.hpp"
#include "reluscan/network.hpp"
#include "reluscan/slice.hpp"
#include "reluscan/train.hpp"

namespace reluscan {

struct TaskSpec {
    enum class Kind { Memorize2D, Idx, CorruptedIdx };
    Kind kind = Kind::Memorize2D;
    int n_points = 1000;      ///< memorize2d size, or IDX subset size (0 = all)
    double corruption = 0.0;  ///< CorruptedIdx only
    std::string data_dir;     ///< IDX directory (train-images/labels files)
};

struct SlicePolicy {
    int k = 2;
    /// Slices per run. 2-D slices pass through the origin and two random
    /// training examples, 1-D lines through the origin and one example.
    int count = 5;
};

struct ExperimentConfig {
    int input_dim = 2;
    std::vector<int> hidden_widths = {32, 32, 32};
    /// seed is ignored; per-run seeds derive from `seed`
    InitSpec init{1.0, 1e-3, 0};
    TaskSpec task;
    TrainConfig train;
    SlicePolicy slices;
    int runs = 5;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool render_snapshots = false;
    /// 0 selects 3 x the max norm of slice-projected data points
    /// (3.0 for the synthetic 2-D task).
    double window_b = 0.0;
    bool count_linear = false;
    std::size_t cell_budget = 0;
    int jobs = 0; ///< worker threads across runs; 0 = hardware concurrency

    int n_neurons() const;
};

struct RunRecord {
    int run = 0;
    int slice = 0;
    int checkpoint = 0;
    double epoch = 0.0;
    long long count = 0;
    std::optional<long long> linear_count;
    double accuracy = 0.0;
};

struct CountSeries {
    std::vector<double> checkpoint_epochs;
    std::vector<double> mean_count;
    std::vector<double> std_count;
    std::vector<double> mean_accuracy;
    double predicted_count = 0.0; ///< depth-1 value for (#neurons, slice dim)
    std::vector<RunRecord> records;
    /// One message per failed run; failed runs are recorded, never dropped.
    std::vector<std::string> failures;

    bool all_ok() const { return failures.empty(); }
};

/// Mean and population standard deviation; the CSV writers and their
/// consistency checks share this.
std::pair<double, double> mean_and_std(const std::vector<double>& xs);

/// Runs `cfg.runs` seeded training runs, counting regions on the same slices
/// at every checkpoint, and aggregates mean/std across runs and slices.
/// When output_dir is set, writes series.csv, meta.json, runs/run_<i>.csv and
/// optional snapshots/*.svg.
CountSeries run_experiment(const ExperimentConfig& cfg);

ExperimentConfig experiment_config_from_json_file(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

} // namespace reluscan
