#pragma once

#include <cstdint>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/neural.hpp"

namespace dccamon {

/// Per-coordinate z-score transform fitted on training columns.
struct Standardizer {
    std::vector<double> mean, scale;

    static Standardizer fit(const Matrix& data);
    Matrix apply(const Matrix& data) const;
};

enum class T2Kind { mean_over_window, max_over_window };

/// Hotelling chart state on a k-dimensional feature vector.
struct T2Chart {
    std::vector<double> mean;
    Matrix cov_inv;
    T2Kind kind = T2Kind::mean_over_window;
    double limit = 0.0;  // upper control limit, calibrated empirically
};

/// Fits mean and inverse covariance of features (k x N). A singular feature
/// covariance falls back to a small ridge of 1e-8 * trace/k.
T2Chart fit_t2(const Matrix& features, T2Kind kind = T2Kind::mean_over_window);

/// Per-sample statistics z^T S^-1 z aggregated over the window's columns.
double t2_window_statistic(const T2Chart& chart, const Matrix& window_features);

/// Smallest limit whose (strict) exceedance fraction on the calibration
/// statistics stays at or below alpha.
double upper_limit_from_stats(std::vector<double> stats, double alpha);

struct PcaModel {
    Matrix components;  // d x k, orthonormal columns
    Standardizer scaler;
    int k = 0;
    double explained = 0.0;  // cumulative variance ratio at k
    T2Chart chart;
};

/// PCA on standardized normal training signals; k is the smallest count
/// reaching the variance target (default 0.9). The chart is fitted on the
/// training scores.
PcaModel pca_fit(const Matrix& train_signals, double variance_target = 0.9,
                 T2Kind kind = T2Kind::mean_over_window);
Matrix pca_project(const PcaModel& model, const Matrix& signals);
double pca_t2(const PcaModel& model, const Matrix& window);

struct PlsModel {
    Matrix weights;     // d x k
    Matrix loadings;    // d x k
    Matrix y_loadings;  // q x k
    Matrix rotation;    // d x k, maps standardized x to scores directly
    Standardizer x_scaler, y_scaler;
    int k = 0;
    T2Chart chart;
};

/// Iterative-deflation partial least squares with the flattened quality data
/// as the response block; the chart runs on the k signal scores.
PlsModel pls_fit(const Matrix& train_signals, const Matrix& train_responses, int k,
                 T2Kind kind = T2Kind::mean_over_window);
Matrix pls_scores(const PlsModel& model, const Matrix& signals);
double pls_t2(const PlsModel& model, const Matrix& window);

struct ClassifierOptions {
    std::vector<int> hidden = {64, 32, 16};
    int epochs = 500;
    int batch_size = 256;
    double learning_rate = 1e-3;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;
};

/// Sigmoid-output MLP trained on signals with the minority class randomly
/// oversampled to parity (binary cross entropy on logits).
struct WindowClassifier {
    Mlp net;
    Standardizer scaler;
};

WindowClassifier classifier_fit(const Matrix& signals, const std::vector<int>& labels,
                                std::uint64_t seed, const ClassifierOptions& options = {});

/// Number of columns of the window classified abnormal (probability >= 0.5).
int classifier_votes(const WindowClassifier& model, const Matrix& window);

/// Window alarm when the abnormal votes exceed vote_threshold (strict).
bool classifier_window_vote(const WindowClassifier& model, const Matrix& window,
                            int vote_threshold);

}  // namespace dccamon
