#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/windows.hpp"

namespace dccamon {

enum class DistanceKind { standardized_euclidean, feature_euclidean };

/// Normal reference pairs searched at serve time. Queries and stored signals
/// are compared either on per-coordinate z-scored raw vectors (training
/// statistics) or on encoder features.
struct ReferenceLibrary {
    Matrix x0;  // d1 x N normal process signals
    Matrix y0;  // d2 x N paired normal quality data
    DistanceKind distance = DistanceKind::standardized_euclidean;
    std::vector<double> mean, scale;  // z-score stats over x0 columns
    Matrix x_index;                   // the vectors actually scanned

    int size() const { return x0.cols(); }
};

ReferenceLibrary build_library(const Matrix& x0, const Matrix& y0, DistanceKind kind,
                               const Mlp* encoder = nullptr);

/// Index of the library column closest to x (ties break to the lowest
/// index) and a copy of the paired quality column.
std::pair<int, std::vector<double>> nearest_match(const ReferenceLibrary& library,
                                                  std::span<const double> x);

enum class VerdictDiag : int {
    ok = 0,
    degenerate_covariance = 1,
    collapsed_matches = 2,
};

struct WindowVerdict {
    double score = 0.0;
    bool alarm = false;
    std::vector<int> matched;
    VerdictDiag diag = VerdictDiag::ok;
};

/// Calibrated detector: encoders, reference library and the threshold tau.
struct MonitorModel {
    EncoderPair encoders;
    ReferenceLibrary library;
    double tau = 0.0;
    double alpha = 0.05;
    double ridge_rel = 1e-4;
    int window_size = 25;
    bool calibrated = false;

    Matrix y_features;  // g applied to y0, cached column-wise
    Matrix x_features;  // f applied to x0 (feature-space distance only)
};

MonitorModel make_monitor_model(EncoderPair encoders, const Matrix& x0, const Matrix& y0,
                                DistanceKind kind, double ridge_rel, int window_size);

/// Scores one incoming signal window: every column is matched to its nearest
/// normal reference, the paired quality features stand in for the unseen
/// quality data, and the correlation score is evaluated on the feature pair.
/// A collapsed match set or a degenerate covariance yields a forced-alarm
/// verdict with the corresponding diagnostic. The alarm flag is only
/// meaningful after calibration (detect fills it).
WindowVerdict window_score(const MonitorModel& model, const Matrix& x_star);

/// Largest tau whose flagged fraction on the validation scores stays at or
/// below alpha (empirical lower quantile), clamped to [0, p]. Sets
/// model.tau and returns it. Requires at least 20 windows.
double calibrate_threshold(MonitorModel& model, const std::vector<Matrix>& validation_windows,
                           double alpha);

/// Same quantile rule applied to precomputed scores.
double threshold_from_scores(std::vector<double> scores, double alpha, double dim_cap);

WindowVerdict detect(const MonitorModel& model, const Matrix& x_star);

/// Percentages; abnormal is the positive class. f1 is 0 when undefined.
struct MonitorMetrics {
    double fpr = 0.0;
    double fnr = 0.0;
    double f1 = 0.0;
};

MonitorMetrics evaluate(const std::vector<WindowVerdict>& verdicts,
                        const std::vector<int>& labels);
MonitorMetrics evaluate_alarms(const std::vector<bool>& alarms, const std::vector<int>& labels);

std::string verdict_line(int window_id, const WindowVerdict& verdict);

}  // namespace dccamon
