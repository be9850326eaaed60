#pragma once

#include <cstdint>
#include <vector>

#include "dccamon/matrix.hpp"
#include "dccamon/rng.hpp"

namespace dccamon {

/// Fully connected network: ReLU on hidden layers, identity on the output.
/// Columns of a batch are independent samples.
class Mlp {
public:
    Mlp() = default;
    /// Glorot-uniform initialization of weights, zero biases.
    Mlp(const std::vector<int>& widths, Rng& rng);
    /// Assembles a network from explicit parameters (deserialization).
    Mlp(std::vector<int> widths, std::vector<Matrix> weights,
        std::vector<std::vector<double>> biases);

    const std::vector<int>& widths() const { return widths_; }
    int input_width() const { return widths_.front(); }
    int output_width() const { return widths_.back(); }
    int layer_count() const { return static_cast<int>(weights_.size()); }
    std::size_t param_count() const;

    std::vector<Matrix>& weights() { return weights_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    Matrix forward(const Matrix& batch) const;

    struct Grads {
        std::vector<Matrix> weights;
        std::vector<std::vector<double>> biases;
        Matrix input;

        Grads& operator+=(const Grads& other);
        bool all_finite() const;
    };
    Grads zero_grads() const;

    /// Gradient of <upstream, forward(batch)> with respect to all parameters
    /// and the batch itself.
    Grads backward(const Matrix& batch, const Matrix& upstream) const;

private:
    std::vector<int> widths_;
    std::vector<Matrix> weights_;             // layer l: widths[l+1] x widths[l]
    std::vector<std::vector<double>> biases_;  // layer l: widths[l+1]
};

class RmsProp {
public:
    RmsProp(double learning_rate, double decay = 0.9, double epsilon = 1e-8)
        : lr_(learning_rate), decay_(decay), eps_(epsilon) {}

    /// acc <- decay*acc + (1-decay)*g^2; param <- param - lr*g/sqrt(acc+eps).
    /// Throws on non-finite gradients.
    void step(Mlp& net, const Mlp::Grads& grads);

    double learning_rate() const { return lr_; }

private:
    double lr_, decay_, eps_;
    std::vector<Matrix> acc_w_;
    std::vector<std::vector<double>> acc_b_;
};

struct Autoencoder {
    Mlp encoder;  // input -> p
    Mlp decoder;  // p -> input
};

struct AeOptions {
    int epochs = 300;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    std::vector<int> hidden = {128};  // widths between input and bottleneck
    double validation_fraction = 0.2;
    int patience = 20;
    double min_improvement = 1e-5;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;
};

struct AeResult {
    Autoencoder model;
    double validation_mse = 0.0;  // per coordinate, on the held-out split
    int epochs_run = 0;
};

/// Trains encoder/decoder jointly on mean squared reconstruction error with
/// a seeded 80/20 split and early stopping on the validation loss.
AeResult train_autoencoder(const Matrix& data, int p, const AeOptions& options);
AeResult train_autoencoder(const Matrix& data, int p, int epochs, double learning_rate,
                           std::uint64_t seed);

/// Per-coordinate mean squared reconstruction error of the model on data.
double reconstruction_mse(const Autoencoder& model, const Matrix& data);

}  // namespace dccamon
