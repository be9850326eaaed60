#include "dccamon/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dccamon/io.hpp"
#include "dccamon/rng.hpp"

namespace dccamon {

std::vector<std::pair<std::string, std::string>> BenchmarkOptions::to_kv() const {
    std::ostringstream deltas_os, lr_os, alpha_os, ridge_os, beta_os;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (i) deltas_os << ",";
        deltas_os << deltas[i];
    }
    lr_os << learning_rate;
    alpha_os << alpha;
    ridge_os << ridge_rel;
    beta_os << beta;
    return {
        {"deltas", deltas_os.str()},
        {"window_size", std::to_string(window_size)},
        {"dim", std::to_string(dim)},
        {"alpha", alpha_os.str()},
        {"train_windows", std::to_string(train_windows)},
        {"val_windows", std::to_string(val_windows)},
        {"test_windows", std::to_string(test_windows)},
        {"epochs", std::to_string(epochs)},
        {"learning_rate", lr_os.str()},
        {"ridge_rel", ridge_os.str()},
        {"beta", beta_os.str()},
        {"seed", std::to_string(seed)},
        {"abnormal_train_samples", std::to_string(abnormal_train_samples)},
    };
}

Matrix flatten_image_columns(const SimDataset& dataset, const std::vector<int>& indices) {
    const std::size_t px = static_cast<std::size_t>(dataset.config.d0) * dataset.config.d0;
    Matrix out(static_cast<int>(px), static_cast<int>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const auto img = dataset.image(indices[j]);
        for (std::size_t k = 0; k < px; ++k) out(static_cast<int>(k), static_cast<int>(j)) = img[k];
    }
    return out;
}

namespace {

std::vector<int> filter_by_label(const SimDataset& ds, const std::vector<int>& indices,
                                 int label) {
    std::vector<int> out;
    for (int i : indices)
        if (ds.labels[i] == label) out.push_back(i);
    return out;
}

}  // namespace

SplitView split_views(const SimDataset& ds) {
    SplitView view;
    const auto train_normal = filter_by_label(ds, ds.train_indices, 0);
    const auto train_abnormal = filter_by_label(ds, ds.train_indices, 1);
    const auto val_normal = filter_by_label(ds, ds.val_indices, 0);
    const auto test_normal = filter_by_label(ds, ds.test_indices, 0);
    const auto test_abnormal = filter_by_label(ds, ds.test_indices, 1);

    view.train_normal_x = gather_columns(ds.signals, train_normal);
    view.train_normal_y = flatten_image_columns(ds, train_normal);
    view.train_abnormal_x = gather_columns(ds.signals, train_abnormal);
    view.val_normal_x = gather_columns(ds.signals, val_normal);
    view.test_normal_x = gather_columns(ds.signals, test_normal);
    view.test_abnormal_x = gather_columns(ds.signals, test_abnormal);
    return view;
}

std::vector<Matrix> draw_window_matrices(const Matrix& pool, int n, int count,
                                         std::uint64_t seed) {
    if (pool.cols() < n)
        throw std::invalid_argument("draw_window_matrices: pool smaller than the window");
    Rng rng(split_seed(seed, 0xd0));
    std::vector<Matrix> out;
    out.reserve(count);
    for (int w = 0; w < count; ++w)
        out.push_back(gather_columns(pool, rng.sample_without_replacement(pool.cols(), n)));
    return out;
}

MonitorModel fit_monitor(const SimDataset& dataset, const BenchmarkOptions& options,
                         std::uint64_t seed) {
    const SplitView view = split_views(dataset);

    TrainConfig config;
    config.window_size = options.window_size;
    config.dim = options.dim;
    config.epochs = options.epochs;
    config.learning_rate = options.learning_rate;
    config.ridge_rel = options.ridge_rel;
    config.beta = options.beta;
    config.seed = split_seed(seed, 0x7e);

    const WindowSet train_set =
        make_windows(view.train_normal_x, view.train_normal_y, options.window_size,
                     options.train_windows, split_seed(seed, 0x71), WindowMode::bootstrap);

    TrainResult trained;
    if (config.beta > 0.0) {
        const WindowSet abnormal = make_cross_windows(
            view.train_abnormal_x, view.train_normal_y, options.window_size,
            options.train_windows, split_seed(seed, 0x72));
        trained = train(config, train_set, &abnormal);
    } else {
        trained = train(config, train_set, nullptr);
    }

    MonitorModel model = make_monitor_model(
        std::move(trained.pair), view.train_normal_x, view.train_normal_y,
        DistanceKind::standardized_euclidean, options.ridge_rel, options.window_size);
    const auto val_windows = draw_window_matrices(view.val_normal_x, options.window_size,
                                                  options.val_windows, split_seed(seed, 0x73));
    calibrate_threshold(model, val_windows, options.alpha);
    return model;
}

namespace {

struct CellWindows {
    std::vector<Matrix> validation;  // normal only
    std::vector<Matrix> test;        // normal then abnormal
    std::vector<int> labels;
};

CellWindows shared_windows(const SplitView& view, const BenchmarkOptions& options,
                           std::uint64_t cell_seed) {
    CellWindows w;
    w.validation = draw_window_matrices(view.val_normal_x, options.window_size,
                                        options.val_windows, split_seed(cell_seed, 0x73));
    w.test = draw_window_matrices(view.test_normal_x, options.window_size,
                                  options.test_windows, split_seed(cell_seed, 0x74));
    auto abnormal = draw_window_matrices(view.test_abnormal_x, options.window_size,
                                         options.test_windows, split_seed(cell_seed, 0x75));
    w.labels.assign(w.test.size(), 0);
    for (auto& m : abnormal) {
        w.test.push_back(std::move(m));
        w.labels.push_back(1);
    }
    return w;
}

ExperimentReport make_report(const std::string& method, double delta,
                             const BenchmarkOptions& options, const MonitorMetrics& metrics,
                             int window_count) {
    ExperimentReport report;
    report.method = method;
    report.delta = delta;
    report.fpr = metrics.fpr;
    report.fnr = metrics.fnr;
    report.f1 = metrics.f1;
    report.window_count = window_count;
    auto kv = options.to_kv();
    kv.emplace_back("method", method);
    std::ostringstream d;
    d << delta;
    kv.emplace_back("cell_delta", d.str());
    report.config_hash = canonical_hash(kv);
    return report;
}

void collect_scores(ExperimentReport& report, const std::vector<double>& scores,
                    const std::vector<int>& labels) {
    for (std::size_t i = 0; i < scores.size(); ++i)
        (labels[i] ? report.abnormal_scores : report.normal_scores).push_back(scores[i]);
}

ExperimentReport run_proposed(const SimDataset& ds, const SplitView& view,
                              const CellWindows& windows, const BenchmarkOptions& options,
                              std::uint64_t cell_seed) {
    TrainConfig config;
    config.window_size = options.window_size;
    config.dim = options.dim;
    config.epochs = options.epochs;
    config.learning_rate = options.learning_rate;
    config.ridge_rel = options.ridge_rel;
    config.beta = options.beta;
    config.seed = split_seed(cell_seed, 0x7e);

    const WindowSet train_set = make_windows(
        view.train_normal_x, view.train_normal_y, options.window_size, options.train_windows,
        split_seed(cell_seed, 0x71), WindowMode::bootstrap);
    TrainResult trained = train(config, train_set, nullptr);

    MonitorModel model = make_monitor_model(
        std::move(trained.pair), view.train_normal_x, view.train_normal_y,
        DistanceKind::standardized_euclidean, options.ridge_rel, options.window_size);
    calibrate_threshold(model, windows.validation, options.alpha);

    std::vector<bool> alarms;
    std::vector<double> scores;
    for (const Matrix& w : windows.test) {
        const WindowVerdict verdict = detect(model, w);
        alarms.push_back(verdict.alarm);
        scores.push_back(verdict.score);
    }
    ExperimentReport report =
        make_report("dcca-nn", ds.config.delta, options,
                    evaluate_alarms(alarms, windows.labels),
                    static_cast<int>(windows.test.size()));
    collect_scores(report, scores, windows.labels);
    return report;
}

template <typename StatFn>
ExperimentReport run_chart(const std::string& method, const SimDataset& ds,
                           const CellWindows& windows, const BenchmarkOptions& options,
                           StatFn&& stat) {
    std::vector<double> val_stats;
    for (const Matrix& w : windows.validation) val_stats.push_back(stat(w));
    const double limit = upper_limit_from_stats(val_stats, options.alpha);

    std::vector<bool> alarms;
    std::vector<double> scores;
    for (const Matrix& w : windows.test) {
        const double s = stat(w);
        scores.push_back(s);
        alarms.push_back(s > limit);
    }
    ExperimentReport report = make_report(method, ds.config.delta, options,
                                          evaluate_alarms(alarms, windows.labels),
                                          static_cast<int>(windows.test.size()));
    collect_scores(report, scores, windows.labels);
    return report;
}

ExperimentReport run_classifier(const SimDataset& ds, const SplitView& view,
                                const CellWindows& windows, const BenchmarkOptions& options,
                                std::uint64_t cell_seed) {
    Rng pick(split_seed(cell_seed, 0x7c));
    const int available = view.train_abnormal_x.cols();
    const int take = std::min(options.abnormal_train_samples, available);
    const auto chosen = pick.sample_without_replacement(available, take);

    Matrix train_x(view.train_normal_x.rows(), view.train_normal_x.cols() + take);
    std::vector<int> labels(train_x.cols(), 0);
    for (int j = 0; j < view.train_normal_x.cols(); ++j)
        for (int i = 0; i < train_x.rows(); ++i) train_x(i, j) = view.train_normal_x(i, j);
    for (int j = 0; j < take; ++j) {
        for (int i = 0; i < train_x.rows(); ++i)
            train_x(i, view.train_normal_x.cols() + j) = view.train_abnormal_x(i, chosen[j]);
        labels[view.train_normal_x.cols() + j] = 1;
    }

    const WindowClassifier model =
        classifier_fit(train_x, labels, split_seed(cell_seed, 0x7d), options.classifier);

    std::vector<int> votes;
    votes.reserve(windows.test.size());
    for (const Matrix& w : windows.test) votes.push_back(classifier_votes(model, w));

    // no validation set for a vote threshold: average the metrics over every
    // threshold in 1..n
    const int n = options.window_size;
    MonitorMetrics avg;
    for (int threshold = 1; threshold <= n; ++threshold) {
        std::vector<bool> alarms(votes.size());
        for (std::size_t i = 0; i < votes.size(); ++i) alarms[i] = votes[i] > threshold;
        const MonitorMetrics m = evaluate_alarms(alarms, windows.labels);
        avg.fpr += m.fpr;
        avg.fnr += m.fnr;
        avg.f1 += m.f1;
    }
    avg.fpr /= n;
    avg.fnr /= n;
    avg.f1 /= n;

    ExperimentReport report = make_report("cls", ds.config.delta, options, avg,
                                          static_cast<int>(windows.test.size()));
    std::vector<double> vote_scores(votes.begin(), votes.end());
    collect_scores(report, vote_scores, windows.labels);
    return report;
}

}  // namespace

std::vector<ExperimentReport> run_benchmark(const SimBase& base,
                                            const BenchmarkOptions& options) {
    const std::size_t cells = options.deltas.size();
    std::vector<std::vector<ExperimentReport>> per_delta(cells);

    auto run_cell = [&](std::size_t di) {
        const double delta = options.deltas[di];
        const SimDataset ds = apply_noise(base, delta);
        const SplitView view = split_views(ds);
        // the cell seed depends only on (seed, delta index): any worker
        // layout produces identical reports
        const std::uint64_t cell_seed = split_seed(options.seed, 0xbe000 + di);
        const CellWindows windows = shared_windows(view, options, cell_seed);

        std::vector<ExperimentReport>& out = per_delta[di];
        out.push_back(run_proposed(ds, view, windows, options, cell_seed));

        const PcaModel pca =
            pca_fit(view.train_normal_x, options.pca_variance_target, options.t2_kind);
        out.push_back(run_chart("pca-t2", ds, windows, options,
                                [&](const Matrix& w) { return pca_t2(pca, w); }));

        const PlsModel pls =
            pls_fit(view.train_normal_x, view.train_normal_y, pca.k, options.t2_kind);
        out.push_back(run_chart("pls-t2", ds, windows, options,
                                [&](const Matrix& w) { return pls_t2(pls, w); }));

        out.push_back(run_classifier(ds, view, windows, options, cell_seed));
    };

    const int workers = std::max(1, options.workers);
    if (workers == 1 || cells <= 1) {
        for (std::size_t di = 0; di < cells; ++di) run_cell(di);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        const int spawn = std::min<std::size_t>(workers, cells);
        for (int t = 0; t < spawn; ++t)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t di = next.fetch_add(1);
                    if (di >= cells) return;
                    run_cell(di);
                }
            });
        for (auto& t : pool) t.join();
    }

    std::vector<ExperimentReport> reports;
    for (auto& cell : per_delta)
        for (auto& r : cell) reports.push_back(std::move(r));
    return reports;
}

std::string report_table(const std::vector<ExperimentReport>& reports) {
    std::ostringstream os;
    os << "method\tdelta\tFPR\tFNR\tF1\twindows\tconfig_hash\n";
    for (const ExperimentReport& r : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%s\t%g\t%.2f\t%.2f\t%.2f\t%d\t%s", r.method.c_str(),
                      r.delta, r.fpr, r.fnr, r.f1, r.window_count, r.config_hash.c_str());
        os << line << "\n";
    }
    return os.str();
}

}  // namespace dccamon
