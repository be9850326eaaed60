#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dccamon/baselines.hpp"
#include "dccamon/monitor.hpp"
#include "dccamon/simgen.hpp"
#include "dccamon/windows.hpp"

namespace dccamon {

struct BenchmarkOptions {
    std::vector<double> deltas = {1.0, 1.5, 2.0};
    int window_size = 25;
    int dim = 6;
    double alpha = 0.05;
    int train_windows = 1000;
    int val_windows = 1000;
    int test_windows = 2000;  // per class
    int epochs = 500;
    double learning_rate = 0.1;
    double ridge_rel = 1e-4;
    double beta = 0.0;
    std::uint64_t seed = 7;
    int abnormal_train_samples = 250;  // available to the classifier only
    double pca_variance_target = 0.9;
    T2Kind t2_kind = T2Kind::mean_over_window;
    ClassifierOptions classifier;
    int workers = 1;  // noise levels evaluated concurrently; results identical

    std::vector<std::pair<std::string, std::string>> to_kv() const;
};

struct ExperimentReport {
    std::string method;
    double delta = 0.0;
    double fpr = 0.0, fnr = 0.0, f1 = 0.0;  // percent
    int window_count = 0;
    std::string config_hash;
    std::vector<double> normal_scores, abnormal_scores;
};

/// Label-partitioned views of one dataset split.
struct SplitView {
    Matrix train_normal_x, train_normal_y;
    Matrix train_abnormal_x;
    Matrix val_normal_x;
    Matrix test_normal_x, test_abnormal_x;
};

SplitView split_views(const SimDataset& dataset);

/// Flattened image columns for the given sample indices.
Matrix flatten_image_columns(const SimDataset& dataset, const std::vector<int>& indices);

/// Bootstrap windows (columns gathered) over a pool.
std::vector<Matrix> draw_window_matrices(const Matrix& pool, int n, int count,
                                         std::uint64_t seed);

/// Trains the correlation model on one dataset and calibrates its threshold.
MonitorModel fit_monitor(const SimDataset& dataset, const BenchmarkOptions& options,
                         std::uint64_t seed);

/// Proposed method plus the three chart/classifier baselines on a shared set
/// of evaluation windows, one report per (method, delta) cell.
std::vector<ExperimentReport> run_benchmark(const SimBase& base,
                                            const BenchmarkOptions& options);

std::string report_table(const std::vector<ExperimentReport>& reports);

}  // namespace dccamon
