#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/neural.hpp"
#include "dccamon/rng.hpp"

namespace dccamon {

/// Generation parameters for the synthetic quality-image / process-signal
/// benchmark. Normal parts carry small filled circles (pinholes), defective
/// parts carry line cracks; signals derive from coupled latent features.
struct SimConfig {
    int n_samples = 10000;
    double theta = 0.5;  // expected fraction of defective parts

    int d0 = 32;  // image side
    int pinhole_max_count = 3;
    double pinhole_radius_lb = 2.0;
    double pinhole_radius_ub = 6.0;
    int crack_max_count = 3;
    int crack_max_thickness = 2;

    int h = 6;    // latent feature dim
    int h1 = 32;  // signal generator hidden width
    int h2 = 16;  // signal dim
    std::vector<double> betas = {0.3, 1.0, 2.0, 0.4, -0.5, -0.7};
    std::vector<double> sigmas = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    double delta = 1.0;  // signal noise level

    std::uint64_t seed = 1;

    int test_count = 5000;
    double train_fraction = 0.8;  // of the non-test remainder

    // image feature autoencoder (a generator internal)
    int ae_epochs = 200;
    double ae_learning_rate = 1e-3;
    std::vector<int> ae_hidden = {128};

    void validate() const;  // throws std::invalid_argument naming the field
};

/// Everything the generator produces before signal noise is applied, so a
/// noise-level sweep can reuse one expensive base.
struct SimBase {
    SimConfig config;
    std::vector<std::uint8_t> images;  // n_samples * d0 * d0, row-major per sample
    std::vector<int> labels;           // 0 normal, 1 defect
    Matrix u;                          // h x N encoded image features
    Matrix v;                          // h x N coupled latents
    Matrix clean_signals;              // h2 x N, before noise
    Matrix noise;                      // h2 x N, unit-scale noise draws
    Autoencoder feature_ae;
    std::vector<int> train_indices, val_indices, test_indices;
};

struct SimDataset {
    SimConfig config;
    Matrix signals;  // h2 x N
    std::vector<std::uint8_t> images;
    std::vector<int> labels;
    Matrix u, v;
    std::vector<int> train_indices, val_indices, test_indices;

    std::span<const std::uint8_t> image(int i) const {
        const std::size_t px = static_cast<std::size_t>(config.d0) * config.d0;
        return {images.data() + px * i, px};
    }
};

/// Rasterizes one quality image into out (d0*d0 bytes, values 0/1).
/// label 0 draws pinholes, label 1 draws cracks.
void gen_quality_image(int label, const SimConfig& config, Rng& rng, std::uint8_t* out);

/// Latents and clean signals for a set of images, using a trained feature
/// autoencoder and per-sample noise streams.
struct LatentBlock {
    Matrix u, v, clean_signals, noise;
};
LatentBlock gen_latents_and_signals(const std::vector<std::uint8_t>& images, int count,
                                    const SimConfig& config, const Autoencoder& feature_ae,
                                    const Matrix& m1, const Matrix& m2);

SimBase gen_base(const SimConfig& config);
SimDataset apply_noise(const SimBase& base, double delta);
SimDataset gen_dataset(const SimConfig& config);

/// Columns of m gathered by index.
Matrix gather_columns(const Matrix& m, const std::vector<int>& indices);

}  // namespace dccamon
