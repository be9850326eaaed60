#include "dccamon/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "dccamon/cca.hpp"

namespace dccamon {

ReferenceLibrary build_library(const Matrix& x0, const Matrix& y0, DistanceKind kind,
                               const Mlp* encoder) {
    if (x0.cols() != y0.cols())
        throw std::invalid_argument("build_library: x0 and y0 must be column-paired");
    if (x0.cols() == 0) throw std::invalid_argument("build_library: library is empty");

    ReferenceLibrary lib;
    lib.x0 = x0;
    lib.y0 = y0;
    lib.distance = kind;
    lib.mean.assign(x0.rows(), 0.0);
    lib.scale.assign(x0.rows(), 1.0);
    for (int i = 0; i < x0.rows(); ++i) {
        const double* r = x0.row(i);
        double sum = 0.0, sq = 0.0;
        for (int j = 0; j < x0.cols(); ++j) {
            sum += r[j];
            sq += r[j] * r[j];
        }
        const double mean = sum / x0.cols();
        const double var = std::max(0.0, sq / x0.cols() - mean * mean);
        lib.mean[i] = mean;
        lib.scale[i] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }

    if (kind == DistanceKind::standardized_euclidean) {
        lib.x_index = x0;
        for (int i = 0; i < x0.rows(); ++i) {
            double* r = lib.x_index.row(i);
            for (int j = 0; j < x0.cols(); ++j) r[j] = (r[j] - lib.mean[i]) / lib.scale[i];
        }
    } else {
        if (encoder == nullptr)
            throw std::invalid_argument("build_library: feature distance needs the encoder");
        lib.x_index = encoder->forward(x0);
    }
    return lib;
}

namespace {

int scan_nearest(const Matrix& index, std::span<const double> q) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    const int n = index.cols();
    for (int j = 0; j < n; ++j) {
        double d = 0.0;
        for (int i = 0; i < index.rows(); ++i) {
            const double diff = index(i, j) - q[i];
            d += diff * diff;
        }
        if (d < best_d) {  // strict: equidistant candidates keep the lowest index
            best_d = d;
            best = j;
        }
    }
    return best;
}

}  // namespace

std::pair<int, std::vector<double>> nearest_match(const ReferenceLibrary& library,
                                                  std::span<const double> x) {
    if (static_cast<int>(x.size()) != library.x0.rows())
        throw std::invalid_argument("nearest_match: query dimension mismatch");
    std::vector<double> q(x.begin(), x.end());
    if (library.distance == DistanceKind::standardized_euclidean) {
        for (std::size_t i = 0; i < q.size(); ++i)
            q[i] = (q[i] - library.mean[i]) / library.scale[i];
    }
    const int idx = scan_nearest(library.x_index, q);
    return {idx, library.y0.col(idx)};
}

MonitorModel make_monitor_model(EncoderPair encoders, const Matrix& x0, const Matrix& y0,
                                DistanceKind kind, double ridge_rel, int window_size) {
    MonitorModel model;
    model.encoders = std::move(encoders);
    model.library = build_library(x0, y0, kind,
                                  kind == DistanceKind::feature_euclidean
                                      ? &model.encoders.f
                                      : nullptr);
    model.ridge_rel = ridge_rel;
    model.window_size = window_size;
    model.y_features = model.encoders.g.forward(y0);
    if (kind == DistanceKind::feature_euclidean) model.x_features = model.library.x_index;
    return model;
}

WindowVerdict window_score(const MonitorModel& model, const Matrix& x_star) {
    const int n = x_star.cols();
    if (n != model.window_size)
        throw std::invalid_argument("window_score: window has " + std::to_string(n) +
                                    " columns, model expects " +
                                    std::to_string(model.window_size));
    if (n <= model.encoders.p)
        throw std::invalid_argument("window_score: window too small for the feature dim");

    WindowVerdict verdict;
    verdict.matched.resize(n);

    // match every column against the library
    Matrix queries = x_star;
    if (model.library.distance == DistanceKind::standardized_euclidean) {
        for (int i = 0; i < queries.rows(); ++i) {
            double* r = queries.row(i);
            for (int j = 0; j < n; ++j)
                r[j] = (r[j] - model.library.mean[i]) / model.library.scale[i];
        }
    } else {
        queries = model.encoders.f.forward(x_star);
    }
    for (int j = 0; j < n; ++j) {
        const auto q = queries.col(j);
        verdict.matched[j] = scan_nearest(model.library.x_index, q);
    }

    const bool collapsed =
        std::all_of(verdict.matched.begin(), verdict.matched.end(),
                    [&](int m) { return m == verdict.matched.front(); });
    if (collapsed) {
        verdict.score = 0.0;
        verdict.alarm = true;
        verdict.diag = VerdictDiag::collapsed_matches;
        return verdict;
    }

    // surrogate quality features come straight from the cached g(y0) columns
    Matrix v(model.y_features.rows(), n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < v.rows(); ++i) v(i, j) = model.y_features(i, verdict.matched[j]);
    const Matrix u = model.encoders.f.forward(x_star);

    try {
        verdict.score = cca_score_auto(u, v, model.ridge_rel).score;
    } catch (const DegenerateMatrixError&) {
        verdict.score = 0.0;
        verdict.alarm = true;
        verdict.diag = VerdictDiag::degenerate_covariance;
    }
    return verdict;
}

double threshold_from_scores(std::vector<double> scores, double alpha, double dim_cap) {
    if (scores.size() < 20)
        throw std::invalid_argument("threshold calibration needs at least 20 windows");
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("alpha must lie strictly inside (0, 1)");
    std::sort(scores.begin(), scores.end());
    // sup over tau with (strict) flagged fraction <= alpha: with k = floor(
    // alpha*m), at most k scores lie below the (k+1)-th smallest.
    const auto k = static_cast<std::size_t>(alpha * static_cast<double>(scores.size()));
    const double tau = scores[std::min(k, scores.size() - 1)];
    return std::clamp(tau, 0.0, dim_cap);
}

double calibrate_threshold(MonitorModel& model, const std::vector<Matrix>& validation_windows,
                           double alpha) {
    std::vector<double> scores;
    scores.reserve(validation_windows.size());
    for (const Matrix& w : validation_windows) scores.push_back(window_score(model, w).score);
    model.tau = threshold_from_scores(std::move(scores), alpha,
                                      static_cast<double>(model.encoders.p));
    model.alpha = alpha;
    model.calibrated = true;
    return model.tau;
}

WindowVerdict detect(const MonitorModel& model, const Matrix& x_star) {
    if (!model.calibrated)
        throw std::logic_error("detect: model has not been calibrated");
    WindowVerdict verdict = window_score(model, x_star);
    if (verdict.diag == VerdictDiag::ok)
        verdict.alarm = verdict.score < model.tau;  // strict by definition
    return verdict;
}

MonitorMetrics evaluate_alarms(const std::vector<bool>& alarms, const std::vector<int>& labels) {
    if (alarms.size() != labels.size())
        throw std::invalid_argument("evaluate: verdicts and labels differ in length");
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < alarms.size(); ++i) {
        const bool abnormal = labels[i] != 0;
        if (alarms[i])
            (abnormal ? tp : fp) += 1;
        else
            (abnormal ? fn : tn) += 1;
    }
    MonitorMetrics m;
    m.fpr = (fp + tn) > 0 ? 100.0 * fp / (fp + tn) : 0.0;
    m.fnr = (tp + fn) > 0 ? 100.0 * fn / (tp + fn) : 0.0;
    const double precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    const double recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = (precision + recall) > 0 ? 100.0 * 2.0 * precision * recall / (precision + recall)
                                    : 0.0;
    return m;
}

MonitorMetrics evaluate(const std::vector<WindowVerdict>& verdicts,
                        const std::vector<int>& labels) {
    std::vector<bool> alarms(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) alarms[i] = verdicts[i].alarm;
    return evaluate_alarms(alarms, labels);
}

std::string verdict_line(int window_id, const WindowVerdict& verdict) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d %.6f %d %d", window_id, verdict.score,
                  verdict.alarm ? 1 : 0, static_cast<int>(verdict.diag));
    return buf;
}

}  // namespace dccamon
