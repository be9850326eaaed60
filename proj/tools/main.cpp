#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dccamon/bounds.hpp"
#include "dccamon/dimsel.hpp"
#include "dccamon/experiment.hpp"
#include "dccamon/io.hpp"
#include "dccamon/monitor.hpp"
#include "dccamon/rng.hpp"
#include "dccamon/simgen.hpp"
#include "dccamon/windows.hpp"

namespace fs = std::filesystem;
using namespace dccamon;

namespace {

// stable exit codes for scripting: 0 ok, 2 validation, 3 upstream artifact,
// 4 numerical failure
constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kArtifact = 3;
constexpr int kNumerical = 4;

int env_workers() {
    const char* env = std::getenv("DCCAMON_WORKERS");
    if (env == nullptr) return 1;
    const int v = std::atoi(env);
    return v > 0 ? v : 1;
}

struct TrainArgs {
    std::string data_dir, out_dir;
    int dim = 6;
    int window_size = 25;
    int epochs = 500;
    double learning_rate = 0.1;
    double beta = 0.0;
    double ridge = 1e-4;
    int window_count = 1000;
    std::uint64_t seed = 1;
};

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::uint64_t* seed_override, const double* noise_override) {
    SimConfig config = sim_config_from(ConfigFile::parse_file(config_path), "sim");
    if (seed_override != nullptr) config.seed = *seed_override;
    if (noise_override != nullptr) config.delta = *noise_override;
    config.validate();
    const SimDataset dataset = gen_dataset(config);
    write_dataset(out_dir, dataset);
    std::cout << "dataset " << out_dir << " samples " << config.n_samples << " hash "
              << sim_config_hash(config) << "\n";
    return kOk;
}

int cmd_select_dim(const std::string& data_dir, const std::string& out_path, int p_star,
                   double eps1, double eps2, std::uint64_t seed, int ae_epochs,
                   int max_samples) {
    const SimDataset ds = read_dataset(data_dir);

    // probe pool: train + validation samples, both labels
    std::vector<int> pool = ds.train_indices;
    pool.insert(pool.end(), ds.val_indices.begin(), ds.val_indices.end());
    if (static_cast<int>(pool.size()) > max_samples) {
        Rng rng(split_seed(seed, 0x5e1));
        const auto keep =
            rng.sample_without_replacement(static_cast<int>(pool.size()), max_samples);
        std::vector<int> subset;
        subset.reserve(max_samples);
        for (int k : keep) subset.push_back(pool[k]);
        pool = std::move(subset);
    }
    const Matrix signals = gather_columns(ds.signals, pool);
    const Matrix quality = flatten_image_columns(ds, pool);

    DimSelOptions options;
    options.signal_ae.hidden = {64};
    options.signal_ae.epochs = ae_epochs;
    options.signal_ae.learning_rate = 2e-3;
    options.quality_ae.hidden = {128};
    options.quality_ae.epochs = ae_epochs;
    options.quality_ae.learning_rate = 2e-3;

    const DimSelReport report =
        select_dimension(signals, quality, p_star, eps1, eps2, seed, options);
    std::ofstream os(out_path);
    if (!os) throw ArtifactError("cannot write " + out_path);
    os << report.to_text();
    std::cout << report.to_text();
    return kOk;
}

int cmd_train(const TrainArgs& args) {
    const SimDataset ds = read_dataset(args.data_dir);
    const SplitView view = split_views(ds);

    TrainConfig config;
    config.window_size = args.window_size;
    config.dim = args.dim;
    config.epochs = args.epochs;
    config.learning_rate = args.learning_rate;
    config.beta = args.beta;
    config.ridge_rel = args.ridge;
    config.seed = args.seed;

    const WindowSet train_set =
        make_windows(view.train_normal_x, view.train_normal_y, args.window_size,
                     args.window_count, split_seed(args.seed, 0x71), WindowMode::bootstrap);

    TrainResult result;
    if (config.beta > 0.0) {
        const WindowSet abnormal =
            make_cross_windows(view.train_abnormal_x, view.train_normal_y, args.window_size,
                               args.window_count, split_seed(args.seed, 0x72));
        result = train(config, train_set, &abnormal);
    } else {
        result = train(config, train_set, nullptr);
    }

    MonitorModel model = make_monitor_model(
        std::move(result.pair), view.train_normal_x, view.train_normal_y,
        DistanceKind::standardized_euclidean, args.ridge, args.window_size);
    save_monitor_model(args.out_dir, model, sim_config_hash(ds.config));

    std::ofstream history(fs::path(args.out_dir) / "loss_history.txt");
    history << "# epoch loss (ridge_rel " << args.ridge << ")\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i)
        history << i << " " << result.loss_history[i] << "\n";

    std::cout << "model " << args.out_dir << " final_loss "
              << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << "\n";
    return kOk;
}

int cmd_calibrate(const std::string& model_dir, const std::string& data_dir, double alpha,
                  int window_count, std::uint64_t seed) {
    StoredModel stored = load_monitor_model(model_dir);
    const SimDataset ds = read_dataset(data_dir);
    if (stored.dataset_hash != sim_config_hash(ds.config))
        throw ArtifactError("model was trained on a different dataset (hash mismatch)");

    const SplitView view = split_views(ds);
    const auto windows = draw_window_matrices(view.val_normal_x, stored.model.window_size,
                                              window_count, split_seed(seed, 0x73));
    const double tau = calibrate_threshold(stored.model, windows, alpha);
    save_monitor_model(model_dir, stored.model, stored.dataset_hash);

    int flagged = 0;
    for (const Matrix& w : windows)
        if (detect(stored.model, w).alarm) ++flagged;
    std::cout << "tau " << tau << " alpha " << alpha << " flagged_fraction "
              << static_cast<double>(flagged) / window_count << "\n";
    return kOk;
}

int cmd_monitor(const std::string& model_dir, const std::string& input,
                const std::string& output) {
    const StoredModel stored = load_monitor_model(model_dir);
    if (!stored.model.calibrated)
        throw ArtifactError("model has no calibrated threshold; run calibrate first");

    Matrix stream;
    std::map<std::string, std::string> meta;
    if (input.empty() || input == "-") {
        stream = read_tensor_stream(std::cin, "stdin", &meta);
    } else {
        stream = read_tensor(input, &meta);
    }

    const int n = stored.model.window_size;
    if (meta.count("window_size") && std::stoi(meta.at("window_size")) != n)
        throw std::invalid_argument("window stream uses window_size " +
                                    meta.at("window_size") + " but the model expects " +
                                    std::to_string(n));
    if (stream.rows() != stored.model.library.x0.rows())
        throw std::invalid_argument("window stream dimension mismatch");
    if (stream.cols() % n != 0)
        throw std::invalid_argument("window stream length is not a multiple of n=" +
                                    std::to_string(n));

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!output.empty() && output != "-") {
        file.open(output);
        if (!file) throw ArtifactError("cannot write " + output);
        os = &file;
    }

    const int count = stream.cols() / n;
    for (int w = 0; w < count; ++w) {
        Matrix window(stream.rows(), n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < stream.rows(); ++i) window(i, j) = stream(i, w * n + j);
        (*os) << verdict_line(w, detect(stored.model, window)) << "\n";
    }
    return kOk;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir,
                  const BenchmarkOptions& options) {
    const SimConfig config = sim_config_from(ConfigFile::parse_file(config_path), "sim");
    const SimBase base = gen_base(config);
    const auto reports = run_benchmark(base, options);

    fs::create_directories(out_dir);
    {
        std::ofstream os(fs::path(out_dir) / "reports.tsv");
        os << report_table(reports);
    }
    for (const ExperimentReport& r : reports) {
        std::ostringstream name;
        name << "scores_" << r.method << "_delta" << r.delta << ".csv";
        std::ofstream os(fs::path(out_dir) / name.str());
        os << "label,score\n";
        for (double s : r.normal_scores) os << "normal," << s << "\n";
        for (double s : r.abnormal_scores) os << "abnormal," << s << "\n";
    }
    std::cout << report_table(reports);
    return kOk;
}

int cmd_verify_bounds(const std::string& out_path, int dim,
                      const std::vector<double>& singulars, const std::vector<int>& n_grid,
                      int trials, double delta, std::uint64_t seed) {
    const GaussianCcaSpec spec = make_gaussian_spec(dim, singulars, split_seed(seed, 0xb0));
    const BoundExperiment exp = run_bound_experiment(spec, n_grid, trials, delta, seed);
    std::ofstream os(out_path);
    if (!os) throw ArtifactError("cannot write " + out_path);
    os << exp.to_table();
    std::cout << exp.to_table();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation-based in-situ process monitoring"};
    app.require_subcommand(1);

    std::string config_path, data_dir, model_dir, out_path, input_path;
    std::uint64_t seed = 1;
    double noise = 1.0;

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
    simulate->add_option("--config", config_path, "experiment config file")->required();
    simulate->add_option("--out", out_path, "output dataset directory")->required();
    auto* sim_seed = simulate->add_option("--seed", seed, "override the config seed");
    auto* sim_noise = simulate->add_option("--noise", noise, "override the config delta");

    int p_star = 10, ae_epochs = 120, max_samples = 2000;
    double eps1 = 0.0, eps2 = 0.0;
    std::uint64_t sd_seed = 1;
    std::string report_path;
    auto* select_dim = app.add_subcommand("select-dim", "probe the correlation dimension");
    select_dim->add_option("--data", data_dir)->required();
    select_dim->add_option("--out", report_path)->required();
    select_dim->add_option("--p-star", p_star);
    select_dim->add_option("--eps1", eps1)->required();
    select_dim->add_option("--eps2", eps2)->required();
    select_dim->add_option("--seed", sd_seed);
    select_dim->add_option("--ae-epochs", ae_epochs);
    select_dim->add_option("--max-samples", max_samples);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the paired feature extractors");
    train_cmd->add_option("--data", train_args.data_dir)->required();
    train_cmd->add_option("--out", train_args.out_dir)->required();
    train_cmd->add_option("--dim", train_args.dim);
    train_cmd->add_option("--window-size", train_args.window_size);
    train_cmd->add_option("--epochs", train_args.epochs);
    train_cmd->add_option("--lr", train_args.learning_rate);
    train_cmd->add_option("--beta", train_args.beta);
    train_cmd->add_option("--ridge", train_args.ridge);
    train_cmd->add_option("--windows", train_args.window_count);
    train_cmd->add_option("--seed", train_args.seed);

    double alpha = 0.05;
    int cal_windows = 1000;
    std::uint64_t cal_seed = 1;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "set the alarm threshold");
    calibrate_cmd->add_option("--model", model_dir)->required();
    calibrate_cmd->add_option("--data", data_dir)->required();
    calibrate_cmd->add_option("--alpha", alpha);
    calibrate_cmd->add_option("--windows", cal_windows);
    calibrate_cmd->add_option("--seed", cal_seed);

    std::string monitor_out;
    auto* monitor_cmd = app.add_subcommand("monitor", "score a window stream");
    monitor_cmd->add_option("--model", model_dir)->required();
    monitor_cmd->add_option("--input", input_path, "window tensor file, or - for stdin");
    monitor_cmd->add_option("--out", monitor_out, "verdict file, or - for stdout");

    BenchmarkOptions bench;
    bench.seed = 7;
    std::vector<double> noise_grid;
    std::string bench_out;
    auto* benchmark_cmd = app.add_subcommand("benchmark", "compare monitoring methods");
    benchmark_cmd->add_option("--config", config_path)->required();
    benchmark_cmd->add_option("--out", bench_out)->required();
    benchmark_cmd->add_option("--noise-grid", noise_grid)->delimiter(',');
    benchmark_cmd->add_option("--alpha", bench.alpha);
    benchmark_cmd->add_option("--beta", bench.beta);
    benchmark_cmd->add_option("--seed", bench.seed);
    benchmark_cmd->add_option("--epochs", bench.epochs);
    benchmark_cmd->add_option("--lr", bench.learning_rate);
    benchmark_cmd->add_option("--dim", bench.dim);
    benchmark_cmd->add_option("--window-size", bench.window_size);
    benchmark_cmd->add_option("--train-windows", bench.train_windows);
    benchmark_cmd->add_option("--val-windows", bench.val_windows);
    benchmark_cmd->add_option("--test-windows", bench.test_windows);

    std::vector<double> vb_singulars{0.7, 0.4};
    std::vector<int> vb_grid{64, 128, 256, 512, 1024, 2048};
    int vb_dim = 2, vb_trials = 200;
    double vb_delta = 0.1;
    std::uint64_t vb_seed = 11;
    std::string vb_out;
    auto* verify_cmd = app.add_subcommand("verify-bounds", "estimation error versus the bound");
    verify_cmd->add_option("--out", vb_out)->required();
    verify_cmd->add_option("--dim", vb_dim);
    verify_cmd->add_option("--singulars", vb_singulars)->delimiter(',');
    verify_cmd->add_option("--n-grid", vb_grid)->delimiter(',');
    verify_cmd->add_option("--trials", vb_trials);
    verify_cmd->add_option("--delta", vb_delta);
    verify_cmd->add_option("--seed", vb_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(config_path, out_path, sim_seed->count() ? &seed : nullptr,
                                sim_noise->count() ? &noise : nullptr);
        if (select_dim->parsed())
            return cmd_select_dim(data_dir, report_path, p_star, eps1, eps2, sd_seed,
                                  ae_epochs, max_samples);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (calibrate_cmd->parsed())
            return cmd_calibrate(model_dir, data_dir, alpha, cal_windows, cal_seed);
        if (monitor_cmd->parsed()) return cmd_monitor(model_dir, input_path, monitor_out);
        if (benchmark_cmd->parsed()) {
            if (!noise_grid.empty()) bench.deltas = noise_grid;
            bench.workers = env_workers();
            return cmd_benchmark(config_path, bench_out, bench);
        }
        if (verify_cmd->parsed())
            return cmd_verify_bounds(vb_out, vb_dim, vb_singulars, vb_grid, vb_trials,
                                     vb_delta, vb_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return kArtifact;
    } catch (const DegenerateMatrixError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kValidation;
}
