#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/neural.hpp"

namespace dccamon {

enum class WindowLabel { normal, abnormal };

/// One grouped sample: n paired signal/quality columns.
struct DataWindow {
    Matrix x;  // d1 x n
    Matrix y;  // d2 x n
    WindowLabel label = WindowLabel::normal;
};

/// A set of windows stored as column indices into shared sample pools, so a
/// sample that appears in many overlapping windows is encoded (and later
/// forwarded through a network) exactly once.
struct WindowSet {
    Matrix x_pool;  // d1 x N
    Matrix y_pool;  // d2 x M (equals N and is column-paired unless cross_paired)
    std::vector<std::vector<int>> x_windows;
    std::vector<std::vector<int>> y_windows;
    bool cross_paired = false;

    int count() const { return static_cast<int>(x_windows.size()); }
    int window_size() const { return x_windows.empty() ? 0 : static_cast<int>(x_windows[0].size()); }
};

enum class WindowMode { disjoint, bootstrap };

/// Groups paired columns of signals/quality into windows of size n. Disjoint
/// mode partitions a seeded permutation; bootstrap mode samples indices
/// without replacement within each window, independently across windows.
/// Pairing is preserved: a window uses the same indices in both pools.
WindowSet make_windows(const Matrix& signals, const Matrix& quality, int n, int count,
                       std::uint64_t seed, WindowMode mode);

/// Windows pairing abnormal signal columns with normal quality columns (the
/// two sides are sampled independently; repairing per epoch is the trainer's
/// job).
WindowSet make_cross_windows(const Matrix& abnormal_signals, const Matrix& normal_quality,
                             int n, int count, std::uint64_t seed);

DataWindow materialize(const WindowSet& set, int index);
std::vector<DataWindow> materialize_all(const WindowSet& set);

struct TrainConfig {
    int window_size = 25;  // n
    int dim = 6;           // p
    int epochs = 500;
    double learning_rate = 0.1;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;
    double ridge_rel = 1e-4;
    double beta = 0.0;  // weight of the abnormal-score penalty, in [0,1]
    std::uint64_t seed = 0;
    int batch_windows = 0;  // 0 = full batch
    std::vector<int> f_hidden = {64, 32};
    std::vector<int> g_hidden = {256, 64};

    void validate() const;
};

/// The trained feature extractors: f maps signals to p dims, g maps quality.
struct EncoderPair {
    Mlp f;
    Mlp g;
    int p = 0;
    TrainConfig config;
};

struct LossGrads {
    double loss = 0.0;
    Mlp::Grads f;
    Mlp::Grads g;
    double mean_normal_score = 0.0;
    double mean_abnormal_score = 0.0;
};

/// Full-batch loss
///   -(1/N0) sum_normal H + beta*(1/N1) sum_abnormal H
/// and its parameter gradients, with each pool column forwarded once.
/// abnormal may be null when beta is 0.
LossGrads loss_and_grads(const EncoderPair& pair, const WindowSet& normal,
                         const WindowSet* abnormal, double beta, double ridge_rel,
                         const std::vector<int>* window_subset = nullptr);

struct TrainResult {
    EncoderPair pair;
    std::vector<double> loss_history;
};

/// RMSProp training loop. Abnormal windows, when present, are re-paired with
/// a seeded shuffle each epoch. Throws on divergence, reporting the epoch.
TrainResult train(const TrainConfig& config, const WindowSet& normal,
                  const WindowSet* abnormal = nullptr);

}  // namespace dccamon
