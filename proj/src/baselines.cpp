#include "dccamon/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dccamon/rng.hpp"

namespace dccamon {

Standardizer Standardizer::fit(const Matrix& data) {
    Standardizer s;
    s.mean.assign(data.rows(), 0.0);
    s.scale.assign(data.rows(), 1.0);
    for (int i = 0; i < data.rows(); ++i) {
        const double* r = data.row(i);
        double sum = 0.0, sq = 0.0;
        for (int j = 0; j < data.cols(); ++j) {
            sum += r[j];
            sq += r[j] * r[j];
        }
        const double mean = sum / data.cols();
        const double var = std::max(0.0, sq / data.cols() - mean * mean);
        s.mean[i] = mean;
        s.scale[i] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& data) const {
    if (data.rows() != static_cast<int>(mean.size()))
        throw std::invalid_argument("Standardizer: dimension mismatch");
    Matrix out = data;
    for (int i = 0; i < data.rows(); ++i) {
        double* r = out.row(i);
        for (int j = 0; j < data.cols(); ++j) r[j] = (r[j] - mean[i]) / scale[i];
    }
    return out;
}

T2Chart fit_t2(const Matrix& features, T2Kind kind) {
    T2Chart chart;
    chart.kind = kind;
    const int k = features.rows();
    chart.mean.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        const double* r = features.row(i);
        double sum = 0.0;
        for (int j = 0; j < features.cols(); ++j) sum += r[j];
        chart.mean[i] = sum / features.cols();
    }
    Matrix centered = features;
    for (int i = 0; i < k; ++i) {
        double* r = centered.row(i);
        for (int j = 0; j < features.cols(); ++j) r[j] -= chart.mean[i];
    }
    Matrix cov = centered_covariance(centered, centered, false);
    try {
        chart.cov_inv = invert_small(cov);
    } catch (const DegenerateMatrixError&) {
        double trace = 0.0;
        for (int i = 0; i < k; ++i) trace += cov(i, i);
        for (int i = 0; i < k; ++i) cov(i, i) += 1e-8 * trace / k;
        chart.cov_inv = invert_small(cov);
    }
    return chart;
}

double t2_window_statistic(const T2Chart& chart, const Matrix& window_features) {
    const int k = window_features.rows();
    if (k != static_cast<int>(chart.mean.size()))
        throw std::invalid_argument("t2_window_statistic: feature dimension mismatch");
    double agg = chart.kind == T2Kind::mean_over_window ? 0.0 : -1.0;
    std::vector<double> z(k);
    for (int j = 0; j < window_features.cols(); ++j) {
        for (int i = 0; i < k; ++i) z[i] = window_features(i, j) - chart.mean[i];
        double t2 = 0.0;
        for (int i = 0; i < k; ++i) {
            double acc = 0.0;
            for (int l = 0; l < k; ++l) acc += chart.cov_inv(i, l) * z[l];
            t2 += z[i] * acc;
        }
        if (chart.kind == T2Kind::mean_over_window)
            agg += t2;
        else
            agg = std::max(agg, t2);
    }
    if (chart.kind == T2Kind::mean_over_window) agg /= window_features.cols();
    return agg;
}

double upper_limit_from_stats(std::vector<double> stats, double alpha) {
    if (stats.size() < 20)
        throw std::invalid_argument("upper_limit_from_stats: need at least 20 windows");
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("upper_limit_from_stats: alpha must be in (0, 1)");
    std::sort(stats.begin(), stats.end());
    // mirror of the score-threshold rule, upper tail: at most k statistics
    // exceed the (k+1)-th largest.
    const auto k = static_cast<std::size_t>(alpha * static_cast<double>(stats.size()));
    const std::size_t idx = stats.size() - 1 - std::min(k, stats.size() - 1);
    return stats[idx];
}

PcaModel pca_fit(const Matrix& train_signals, double variance_target, T2Kind kind) {
    PcaModel model;
    model.scaler = Standardizer::fit(train_signals);
    const Matrix std_data = model.scaler.apply(train_signals);
    const Matrix cov = centered_covariance(std_data, std_data, true);
    const SymEig eig = sym_eig(cov);

    double total = 0.0;
    for (double l : eig.eigenvalues) total += std::max(l, 0.0);
    double acc = 0.0;
    int k = 0;
    while (k < static_cast<int>(eig.eigenvalues.size())) {
        acc += std::max(eig.eigenvalues[k], 0.0);
        ++k;
        if (acc >= variance_target * total) break;
    }
    model.k = k;
    model.explained = total > 0.0 ? acc / total : 1.0;
    model.components = Matrix(train_signals.rows(), k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < train_signals.rows(); ++i)
            model.components(i, j) = eig.eigenvectors(i, j);

    model.chart = fit_t2(pca_project(model, train_signals), kind);
    return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& signals) {
    return multiply_tn(model.components, model.scaler.apply(signals));
}

double pca_t2(const PcaModel& model, const Matrix& window) {
    return t2_window_statistic(model.chart, pca_project(model, window));
}

PlsModel pls_fit(const Matrix& train_signals, const Matrix& train_responses, int k,
                 T2Kind kind) {
    if (k < 1) throw std::invalid_argument("pls_fit: component count must be positive");
    if (train_signals.cols() != train_responses.cols())
        throw std::invalid_argument("pls_fit: signals and responses must be column-paired");

    PlsModel model;
    model.k = k;
    model.x_scaler = Standardizer::fit(train_signals);
    model.y_scaler = Standardizer::fit(train_responses);

    // near-constant response coordinates keep scale 1 from the standardizer;
    // an entirely constant response block cannot be regressed on
    {
        double var_sum = 0.0;
        const Matrix& y = train_responses;
        for (int i = 0; i < y.rows(); ++i) {
            const double* r = y.row(i);
            double sum = 0.0, sq = 0.0;
            for (int j = 0; j < y.cols(); ++j) {
                sum += r[j];
                sq += r[j] * r[j];
            }
            var_sum += std::max(0.0, sq / y.cols() - (sum / y.cols()) * (sum / y.cols()));
        }
        if (var_sum <= 0.0) throw std::invalid_argument("pls_fit: response has zero variance");
    }

    Matrix x = model.x_scaler.apply(train_signals);  // d x N, deflated in place
    Matrix y = model.y_scaler.apply(train_responses);
    const int d = x.rows();
    const int n = x.cols();

    model.weights = Matrix(d, k);
    model.loadings = Matrix(d, k);
    model.y_loadings = Matrix(y.rows(), k);

    std::vector<double> t(n), u(n), w(d), q(y.rows());
    for (int comp = 0; comp < k; ++comp) {
        // start from the response row with the largest residual variance
        int start = 0;
        double best = -1.0;
        for (int i = 0; i < y.rows(); ++i) {
            const double* r = y.row(i);
            double sq = 0.0;
            for (int j = 0; j < n; ++j) sq += r[j] * r[j];
            if (sq > best) {
                best = sq;
                start = i;
            }
        }
        for (int j = 0; j < n; ++j) u[j] = y(start, j);

        std::vector<double> t_old(n, 0.0);
        for (int iter = 0; iter < 500; ++iter) {
            // w ~ X u
            double norm = 0.0;
            for (int i = 0; i < d; ++i) {
                const double* xi = x.row(i);
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += xi[j] * u[j];
                w[i] = acc;
                norm += acc * acc;
            }
            norm = std::sqrt(norm);
            if (norm <= 1e-300) throw DegenerateMatrixError("pls_fit: vanished weight vector");
            for (int i = 0; i < d; ++i) w[i] /= norm;
            // t = X^T w
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < d; ++i) acc += x(i, j) * w[i];
                t[j] = acc;
            }
            double tt = 0.0;
            for (int j = 0; j < n; ++j) tt += t[j] * t[j];
            // q = Y t / (t^T t)
            for (int i = 0; i < y.rows(); ++i) {
                const double* yi = y.row(i);
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += yi[j] * t[j];
                q[i] = acc / tt;
            }
            double qq = 0.0;
            for (int i = 0; i < y.rows(); ++i) qq += q[i] * q[i];
            // u = Y^T q / (q^T q)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < y.rows(); ++i) acc += y(i, j) * q[i];
                u[j] = acc / qq;
            }
            double change = 0.0;
            for (int j = 0; j < n; ++j) change += (t[j] - t_old[j]) * (t[j] - t_old[j]);
            t_old.assign(t.begin(), t.end());
            if (change < 1e-20 * std::max(1.0, tt) && iter > 0) break;
        }

        double tt = 0.0;
        for (int j = 0; j < n; ++j) tt += t[j] * t[j];
        // loadings p = X t / (t^T t); deflate X <- X - p t^T, Y <- Y - q t^T
        for (int i = 0; i < d; ++i) {
            double* xi = x.row(i);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += xi[j] * t[j];
            const double p = acc / tt;
            model.loadings(i, comp) = p;
            model.weights(i, comp) = w[i];
            for (int j = 0; j < n; ++j) xi[j] -= p * t[j];
        }
        for (int i = 0; i < y.rows(); ++i) {
            double* yi = y.row(i);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += yi[j] * t[j];
            const double qi = acc / tt;
            model.y_loadings(i, comp) = qi;
            for (int j = 0; j < n; ++j) yi[j] -= qi * t[j];
        }
    }

    // rotation R = W (P^T W)^{-1} scores new data in one product
    model.rotation = model.weights * invert_small(multiply_tn(model.loadings, model.weights));
    model.chart = fit_t2(pls_scores(model, train_signals), kind);
    return model;
}

Matrix pls_scores(const PlsModel& model, const Matrix& signals) {
    return multiply_tn(model.rotation, model.x_scaler.apply(signals));
}

double pls_t2(const PlsModel& model, const Matrix& window) {
    return t2_window_statistic(model.chart, pls_scores(model, window));
}

WindowClassifier classifier_fit(const Matrix& signals, const std::vector<int>& labels,
                                std::uint64_t seed, const ClassifierOptions& options) {
    if (static_cast<int>(labels.size()) != signals.cols())
        throw std::invalid_argument("classifier_fit: label count mismatch");
    std::vector<int> normal_idx, abnormal_idx;
    for (int j = 0; j < signals.cols(); ++j)
        (labels[j] != 0 ? abnormal_idx : normal_idx).push_back(j);
    if (normal_idx.empty() || abnormal_idx.empty())
        throw std::invalid_argument("classifier_fit: training set has a single class");

    Rng rng(split_seed(seed, 0xC15));

    // oversample the minority class with replacement up to parity
    std::vector<int> order;
    std::vector<int>& minority = abnormal_idx.size() < normal_idx.size() ? abnormal_idx : normal_idx;
    std::vector<int>& majority = abnormal_idx.size() < normal_idx.size() ? normal_idx : abnormal_idx;
    order = majority;
    order.insert(order.end(), minority.begin(), minority.end());
    for (std::size_t i = minority.size(); i < majority.size(); ++i)
        order.push_back(minority[rng.uniform_int(0, static_cast<int>(minority.size()) - 1)]);

    WindowClassifier model;
    model.scaler = Standardizer::fit(signals);
    const Matrix std_signals = model.scaler.apply(signals);

    std::vector<int> widths{signals.rows()};
    for (int h : options.hidden) widths.push_back(h);
    widths.push_back(1);
    model.net = Mlp(widths, rng);
    RmsProp opt(options.learning_rate, options.rms_decay, options.rms_epsilon);

    const int total = static_cast<int>(order.size());
    const int batch = std::min(options.batch_size, total);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        // seeded reshuffle each epoch
        for (int i = total - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
        for (int off = 0; off < total; off += batch) {
            const int count = std::min(batch, total - off);
            Matrix xb(signals.rows(), count);
            Matrix target(1, count);
            for (int j = 0; j < count; ++j) {
                const int src = order[off + j];
                for (int i = 0; i < signals.rows(); ++i) xb(i, j) = std_signals(i, src);
                target(0, j) = labels[src] != 0 ? 1.0 : 0.0;
            }
            const Matrix logits = model.net.forward(xb);
            // binary cross entropy on logits: dL/dz = sigmoid(z) - y
            Matrix upstream(1, count);
            for (int j = 0; j < count; ++j) {
                const double s = 1.0 / (1.0 + std::exp(-logits(0, j)));
                upstream(0, j) = (s - target(0, j)) / count;
            }
            opt.step(model.net, model.net.backward(xb, upstream));
        }
    }
    return model;
}

int classifier_votes(const WindowClassifier& model, const Matrix& window) {
    const Matrix logits = model.net.forward(model.scaler.apply(window));
    int votes = 0;
    for (int j = 0; j < logits.cols(); ++j)
        if (logits(0, j) >= 0.0) ++votes;  // sigmoid(z) >= 0.5 iff z >= 0
    return votes;
}

bool classifier_window_vote(const WindowClassifier& model, const Matrix& window,
                            int vote_threshold) {
    return classifier_votes(model, window) > vote_threshold;
}

}  // namespace dccamon
