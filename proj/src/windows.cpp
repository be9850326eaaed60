#include "dccamon/windows.hpp"

#include <cmath>
#include <stdexcept>

#include "dccamon/cca.hpp"
#include "dccamon/rng.hpp"

namespace dccamon {

namespace {

std::vector<std::vector<int>> draw_windows(int pool_size, int n, int count,
                                           Rng& rng, WindowMode mode) {
    std::vector<std::vector<int>> windows;
    windows.reserve(count);
    if (mode == WindowMode::disjoint) {
        if (static_cast<long long>(count) * n > pool_size)
            throw std::invalid_argument("make_windows: disjoint mode needs count*n <= N");
        const auto perm = rng.permutation(pool_size);
        for (int w = 0; w < count; ++w)
            windows.emplace_back(perm.begin() + static_cast<std::size_t>(w) * n,
                                 perm.begin() + static_cast<std::size_t>(w + 1) * n);
    } else {
        if (n > pool_size)
            throw std::invalid_argument("make_windows: bootstrap mode needs n <= N");
        for (int w = 0; w < count; ++w)
            windows.push_back(rng.sample_without_replacement(pool_size, n));
    }
    return windows;
}

}  // namespace

WindowSet make_windows(const Matrix& signals, const Matrix& quality, int n, int count,
                       std::uint64_t seed, WindowMode mode) {
    if (signals.cols() != quality.cols())
        throw std::invalid_argument("make_windows: signals and quality must be column-paired");
    if (n < 1 || count < 1) throw std::invalid_argument("make_windows: n and count must be positive");
    Rng rng(split_seed(seed, 0x77));
    WindowSet set;
    set.x_pool = signals;
    set.y_pool = quality;
    set.x_windows = draw_windows(signals.cols(), n, count, rng, mode);
    set.y_windows = set.x_windows;
    set.cross_paired = false;
    return set;
}

WindowSet make_cross_windows(const Matrix& abnormal_signals, const Matrix& normal_quality,
                             int n, int count, std::uint64_t seed) {
    if (n < 1 || count < 1)
        throw std::invalid_argument("make_cross_windows: n and count must be positive");
    Rng rng(split_seed(seed, 0x78));
    WindowSet set;
    set.x_pool = abnormal_signals;
    set.y_pool = normal_quality;
    set.x_windows = draw_windows(abnormal_signals.cols(), n, count, rng, WindowMode::bootstrap);
    set.y_windows = draw_windows(normal_quality.cols(), n, count, rng, WindowMode::bootstrap);
    set.cross_paired = true;
    return set;
}

DataWindow materialize(const WindowSet& set, int index) {
    const auto& xi = set.x_windows.at(index);
    const auto& yi = set.y_windows.at(index);
    DataWindow w;
    w.x = Matrix(set.x_pool.rows(), static_cast<int>(xi.size()));
    w.y = Matrix(set.y_pool.rows(), static_cast<int>(yi.size()));
    for (int j = 0; j < w.x.cols(); ++j)
        for (int i = 0; i < w.x.rows(); ++i) w.x(i, j) = set.x_pool(i, xi[j]);
    for (int j = 0; j < w.y.cols(); ++j)
        for (int i = 0; i < w.y.rows(); ++i) w.y(i, j) = set.y_pool(i, yi[j]);
    w.label = set.cross_paired ? WindowLabel::abnormal : WindowLabel::normal;
    return w;
}

std::vector<DataWindow> materialize_all(const WindowSet& set) {
    std::vector<DataWindow> out;
    out.reserve(set.count());
    for (int i = 0; i < set.count(); ++i) out.push_back(materialize(set, i));
    return out;
}

void TrainConfig::validate() const {
    if (window_size <= dim)
        throw std::invalid_argument("TrainConfig: window size must exceed the correlation dim");
    if (dim < 1) throw std::invalid_argument("TrainConfig: dim must be positive");
    if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("TrainConfig: beta must lie in [0, 1]");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be nonnegative");
    if (ridge_rel < 0.0) throw std::invalid_argument("TrainConfig: ridge must be nonnegative");
}

namespace {

Matrix gather_cols(const Matrix& pool, const std::vector<int>& idx) {
    Matrix out(pool.rows(), static_cast<int>(idx.size()));
    for (int j = 0; j < out.cols(); ++j)
        for (int i = 0; i < out.rows(); ++i) out(i, j) = pool(i, idx[j]);
    return out;
}

void scatter_add_cols(Matrix& target, const std::vector<int>& idx, const Matrix& values,
                      double scale) {
    for (int j = 0; j < values.cols(); ++j)
        for (int i = 0; i < values.rows(); ++i)
            target(i, idx[j]) += scale * values(i, j);
}

// Accumulates the per-window score gradients into pool-shaped upstream
// matrices; returns the summed score.
double accumulate_windows(const WindowSet& set, const Matrix& u_pool, const Matrix& v_pool,
                          Matrix& up_u, Matrix& up_v, double coeff, double ridge_rel,
                          const std::vector<int>& which) {
    double total = 0.0;
    for (int w : which) {
        const Matrix uw = gather_cols(u_pool, set.x_windows[w]);
        const Matrix vw = gather_cols(v_pool, set.y_windows[w]);
        CcaGradient grad = cca_score_gradient_auto(uw, vw, ridge_rel);
        total += grad.solution.score;
        scatter_add_cols(up_u, set.x_windows[w], grad.du, coeff);
        scatter_add_cols(up_v, set.y_windows[w], grad.dv, coeff);
    }
    return total;
}

std::vector<int> all_indices(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

LossGrads loss_and_grads(const EncoderPair& pair, const WindowSet& normal,
                         const WindowSet* abnormal, double beta, double ridge_rel,
                         const std::vector<int>* window_subset) {
    if (normal.count() == 0)
        throw std::invalid_argument("loss_and_grads: need at least one normal window");
    if (beta > 0.0 && (abnormal == nullptr || abnormal->count() == 0))
        throw std::invalid_argument("loss_and_grads: beta > 0 requires abnormal windows");

    const std::vector<int> normal_ids =
        window_subset ? *window_subset : all_indices(normal.count());
    const int n0 = static_cast<int>(normal_ids.size());

    const Matrix u_pool = pair.f.forward(normal.x_pool);
    const Matrix v_pool = pair.g.forward(normal.y_pool);

    Matrix up_u(u_pool.rows(), u_pool.cols());
    Matrix up_v(v_pool.rows(), v_pool.cols());
    const double normal_sum = accumulate_windows(normal, u_pool, v_pool, up_u, up_v,
                                                 -1.0 / n0, ridge_rel, normal_ids);

    LossGrads out;
    out.mean_normal_score = normal_sum / n0;
    out.loss = -out.mean_normal_score;
    out.f = pair.f.backward(normal.x_pool, up_u);
    out.g = pair.g.backward(normal.y_pool, up_v);

    if (beta > 0.0) {
        const int n1 = abnormal->count();
        const Matrix ua_pool = pair.f.forward(abnormal->x_pool);
        const Matrix va_pool = pair.g.forward(abnormal->y_pool);
        Matrix up_ua(ua_pool.rows(), ua_pool.cols());
        Matrix up_va(va_pool.rows(), va_pool.cols());
        const double abnormal_sum =
            accumulate_windows(*abnormal, ua_pool, va_pool, up_ua, up_va, beta / n1,
                               ridge_rel, all_indices(n1));
        out.mean_abnormal_score = abnormal_sum / n1;
        out.loss += beta * out.mean_abnormal_score;
        out.f += pair.f.backward(abnormal->x_pool, up_ua);
        out.g += pair.g.backward(abnormal->y_pool, up_va);
    }
    return out;
}

TrainResult train(const TrainConfig& config, const WindowSet& normal,
                  const WindowSet* abnormal) {
    config.validate();
    if (normal.count() < 1) throw std::invalid_argument("train: need at least one normal window");
    if (normal.window_size() != config.window_size)
        throw std::invalid_argument("train: window set size does not match the config");

    Rng init_rng(split_seed(config.seed, 0x1));
    std::vector<int> f_widths{normal.x_pool.rows()};
    for (int h : config.f_hidden) f_widths.push_back(h);
    f_widths.push_back(config.dim);
    std::vector<int> g_widths{normal.y_pool.rows()};
    for (int h : config.g_hidden) g_widths.push_back(h);
    g_widths.push_back(config.dim);

    TrainResult result;
    result.pair.f = Mlp(f_widths, init_rng);
    result.pair.g = Mlp(g_widths, init_rng);
    result.pair.p = config.dim;
    result.pair.config = config;

    RmsProp f_opt(config.learning_rate, config.rms_decay, config.rms_epsilon);
    RmsProp g_opt(config.learning_rate, config.rms_decay, config.rms_epsilon);

    WindowSet repaired;  // abnormal windows with the current epoch's pairing
    if (abnormal != nullptr) repaired = *abnormal;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const WindowSet* abn = nullptr;
        if (config.beta > 0.0 && abnormal != nullptr) {
            Rng pair_rng(split_seed(config.seed, 0x100 + epoch));
            const auto perm = pair_rng.permutation(repaired.count());
            for (int i = 0; i < repaired.count(); ++i)
                repaired.y_windows[i] = abnormal->y_windows[perm[i]];
            abn = &repaired;
        }

        std::optional<std::vector<int>> subset;
        if (config.batch_windows > 0 && config.batch_windows < normal.count()) {
            Rng batch_rng(split_seed(config.seed, 0x9000 + epoch));
            subset = batch_rng.sample_without_replacement(normal.count(), config.batch_windows);
        }

        LossGrads lg;
        try {
            lg = loss_and_grads(result.pair, normal, abn, config.beta, config.ridge_rel,
                                subset ? &*subset : nullptr);
        } catch (const DegenerateMatrixError& e) {
            throw std::runtime_error("train: degenerate window covariance at epoch " +
                                     std::to_string(epoch) + ": " + e.what());
        }
        if (!std::isfinite(lg.loss))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
        if (lg.loss < -static_cast<double>(config.dim) - 1e-6)
            throw std::runtime_error("train: loss below the -p floor at epoch " +
                                     std::to_string(epoch));

        f_opt.step(result.pair.f, lg.f);
        g_opt.step(result.pair.g, lg.g);
        result.loss_history.push_back(lg.loss);
    }
    return result;
}

}  // namespace dccamon
