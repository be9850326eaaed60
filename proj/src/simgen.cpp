#include "dccamon/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dccamon {

void SimConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("SimConfig: " + what); };
    if (n_samples < 1) fail("n_samples must be positive");
    if (theta <= 0.0 || theta >= 1.0) fail("theta must lie strictly inside (0, 1)");
    if (d0 < 4) fail("d0 must be at least 4");
    if (pinhole_max_count < 1) fail("pinhole_max_count must be positive");
    if (!(pinhole_radius_lb < pinhole_radius_ub)) fail("pinhole radius bounds need lb < ub");
    if (!(pinhole_radius_ub < d0 / 2.0)) fail("pinhole radius ub must stay below d0/2");
    if (pinhole_radius_lb <= 0.0) fail("pinhole radius lb must be positive");
    if (crack_max_count < 1) fail("crack_max_count must be positive");
    if (crack_max_thickness < 1) fail("crack_max_thickness must be positive");
    if (h < 1 || h1 < 1 || h2 < 1) fail("latent dims h, h1, h2 must be positive");
    if (static_cast<int>(betas.size()) != h) fail("betas must have length h");
    if (static_cast<int>(sigmas.size()) != h) fail("sigmas must have length h");
    if (delta < 0.0) fail("delta must be nonnegative");
    if (test_count < 0 || test_count >= n_samples) fail("test_count out of range");
    if (train_fraction <= 0.0 || train_fraction >= 1.0) fail("train_fraction must be in (0, 1)");
    if (ae_epochs < 1) fail("ae_epochs must be positive");
}

namespace {

constexpr std::uint64_t kImageStream = 1000;
constexpr std::uint64_t kLatentStream = 2000;
constexpr std::uint64_t kSignalNoiseStream = 3000;

void draw_pinholes(const SimConfig& c, Rng& rng, std::uint8_t* out) {
    const int m = rng.uniform_int(1, c.pinhole_max_count);
    for (int s = 0; s < m; ++s) {
        const double r = rng.uniform(c.pinhole_radius_lb, c.pinhole_radius_ub);
        const double cx = rng.uniform(r, c.d0 - r);
        const double cy = rng.uniform(r, c.d0 - r);
        const double r2 = r * r;
        for (int row = 0; row < c.d0; ++row) {
            const double dy = row + 0.5 - cy;
            for (int col = 0; col < c.d0; ++col) {
                const double dx = col + 0.5 - cx;
                if (dx * dx + dy * dy <= r2) out[row * c.d0 + col] = 1;
            }
        }
    }
}

void draw_cracks(const SimConfig& c, Rng& rng, std::uint8_t* out) {
    const int m = rng.uniform_int(1, c.crack_max_count);
    for (int s = 0; s < m; ++s) {
        const double ax = rng.uniform(0.0, c.d0), ay = rng.uniform(0.0, c.d0);
        const double bx = rng.uniform(0.0, c.d0), by = rng.uniform(0.0, c.d0);
        const int thickness = rng.uniform_int(1, c.crack_max_thickness);
        const double half = thickness / 2.0;
        const double vx = bx - ax, vy = by - ay;
        const double len2 = vx * vx + vy * vy;
        for (int row = 0; row < c.d0; ++row) {
            const double py = row + 0.5;
            for (int col = 0; col < c.d0; ++col) {
                const double px = col + 0.5;
                double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                const double dx = px - (ax + t * vx);
                const double dy = py - (ay + t * vy);
                if (dx * dx + dy * dy <= half * half) out[row * c.d0 + col] = 1;
            }
        }
    }
}

Matrix flatten_images(const std::vector<std::uint8_t>& images, int count, int d0) {
    const int px = d0 * d0;
    Matrix m(px, count);
    for (int j = 0; j < count; ++j)
        for (int k = 0; k < px; ++k) m(k, j) = images[static_cast<std::size_t>(j) * px + k];
    return m;
}

}  // namespace

void gen_quality_image(int label, const SimConfig& config, Rng& rng, std::uint8_t* out) {
    std::fill(out, out + static_cast<std::size_t>(config.d0) * config.d0, 0);
    if (label == 0)
        draw_pinholes(config, rng, out);
    else
        draw_cracks(config, rng, out);
}

LatentBlock gen_latents_and_signals(const std::vector<std::uint8_t>& images, int count,
                                    const SimConfig& config, const Autoencoder& feature_ae,
                                    const Matrix& m1, const Matrix& m2) {
    if (feature_ae.encoder.output_width() != config.h)
        throw std::invalid_argument("gen_latents_and_signals: autoencoder bottleneck != h");
    if (m1.rows() != config.h1 || m1.cols() != config.h || m2.rows() != config.h2 ||
        m2.cols() != config.h1)
        throw std::invalid_argument("gen_latents_and_signals: generator matrix shapes");

    LatentBlock block;
    block.u = feature_ae.encoder.forward(flatten_images(images, count, config.d0));

    block.v = Matrix(config.h, count);
    block.noise = Matrix(config.h2, count);
    for (int j = 0; j < count; ++j) {
        Rng latent_rng(split_seed(config.seed, kLatentStream + j));
        for (int i = 0; i < config.h; ++i)
            block.v(i, j) =
                config.betas[i] * block.u(i, j) + config.sigmas[i] * latent_rng.normal();
        Rng noise_rng(split_seed(config.seed, kSignalNoiseStream + j));
        for (int k = 0; k < config.h2; ++k) block.noise(k, j) = noise_rng.normal();
    }

    // logit over an unbounded magnitude is squashed by x -> x/(1+x) first;
    // the composite reduces to ln(x) with a floor keeping the argument positive.
    Matrix pre = m1 * block.v;
    for (double& x : pre.data())
        if (x < 0.0) x = 0.0;
    block.clean_signals = m2 * pre;
    for (double& x : block.clean_signals.data())
        x = std::log(std::max(std::abs(x), 1e-6));
    return block;
}

SimBase gen_base(const SimConfig& config) {
    config.validate();
    SimBase base;
    base.config = config;

    const int n = config.n_samples;
    const std::size_t px = static_cast<std::size_t>(config.d0) * config.d0;
    base.images.assign(px * n, 0);
    base.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(split_seed(config.seed, kImageStream + i));
        base.labels[i] = rng.bernoulli(config.theta);
        gen_quality_image(base.labels[i], config, rng, base.images.data() + px * i);
    }

    Rng model_rng(split_seed(config.seed, 1));
    Matrix m1(config.h1, config.h);
    for (double& x : m1.data()) x = 1.0 + model_rng.normal();
    Matrix m2(config.h2, config.h1);
    for (double& x : m2.data()) x = model_rng.normal();

    AeOptions ae;
    ae.epochs = config.ae_epochs;
    ae.learning_rate = config.ae_learning_rate;
    ae.hidden = config.ae_hidden;
    ae.seed = model_rng.next_u64();
    ae.patience = config.ae_epochs;  // fixed budget, no early stop
    base.feature_ae =
        train_autoencoder(flatten_images(base.images, n, config.d0), config.h, ae).model;

    LatentBlock block =
        gen_latents_and_signals(base.images, n, config, base.feature_ae, m1, m2);
    base.u = std::move(block.u);
    base.v = std::move(block.v);
    base.clean_signals = std::move(block.clean_signals);
    base.noise = std::move(block.noise);

    Rng split_rng(split_seed(config.seed, 2));
    const auto perm = split_rng.permutation(n);
    base.test_indices.assign(perm.begin(), perm.begin() + config.test_count);
    const int remaining = n - config.test_count;
    const int train_count = static_cast<int>(std::lround(config.train_fraction * remaining));
    base.train_indices.assign(perm.begin() + config.test_count,
                              perm.begin() + config.test_count + train_count);
    base.val_indices.assign(perm.begin() + config.test_count + train_count, perm.end());
    return base;
}

SimDataset apply_noise(const SimBase& base, double delta) {
    if (delta < 0.0) throw std::invalid_argument("apply_noise: delta must be nonnegative");
    SimDataset ds;
    ds.config = base.config;
    ds.config.delta = delta;
    ds.signals = base.clean_signals;
    for (int j = 0; j < ds.signals.cols(); ++j)
        for (int i = 0; i < ds.signals.rows(); ++i)
            ds.signals(i, j) += delta * base.noise(i, j);
    ds.images = base.images;
    ds.labels = base.labels;
    ds.u = base.u;
    ds.v = base.v;
    ds.train_indices = base.train_indices;
    ds.val_indices = base.val_indices;
    ds.test_indices = base.test_indices;
    return ds;
}

SimDataset gen_dataset(const SimConfig& config) {
    return apply_noise(gen_base(config), config.delta);
}

Matrix gather_columns(const Matrix& m, const std::vector<int>& indices) {
    Matrix out(m.rows(), static_cast<int>(indices.size()));
    for (int j = 0; j < out.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) out(i, j) = m(i, indices[j]);
    return out;
}

}  // namespace dccamon
