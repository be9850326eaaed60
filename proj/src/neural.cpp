#include "dccamon/neural.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dccamon {

Mlp::Mlp(const std::vector<int>& widths, Rng& rng) : widths_(widths) {
    if (widths.size() < 2) throw std::invalid_argument("Mlp needs at least two layer widths");
    for (int w : widths)
        if (w <= 0) throw std::invalid_argument("Mlp layer widths must be positive");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l];
        const int fan_out = widths[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& x : w.data()) x = rng.uniform(-limit, limit);
        weights_.push_back(std::move(w));
        biases_.emplace_back(fan_out, 0.0);
    }
}

Mlp::Mlp(std::vector<int> widths, std::vector<Matrix> weights,
         std::vector<std::vector<double>> biases)
    : widths_(std::move(widths)), weights_(std::move(weights)), biases_(std::move(biases)) {
    if (widths_.size() < 2 || weights_.size() != widths_.size() - 1 ||
        biases_.size() != weights_.size())
        throw std::invalid_argument("Mlp: inconsistent layer structure");
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (weights_[l].rows() != widths_[l + 1] || weights_[l].cols() != widths_[l] ||
            static_cast<int>(biases_[l].size()) != widths_[l + 1])
            throw std::invalid_argument("Mlp: parameter shapes do not match widths");
    }
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += weights_[l].size() + biases_[l].size();
    return n;
}

namespace {

void add_bias(Matrix& z, const std::vector<double>& b) {
    for (int i = 0; i < z.rows(); ++i) {
        double* r = z.row(i);
        const double bi = b[i];
        for (int j = 0; j < z.cols(); ++j) r[j] += bi;
    }
}

void relu_inplace(Matrix& z) {
    for (double& x : z.data())
        if (x < 0.0) x = 0.0;
}

}  // namespace

Matrix Mlp::forward(const Matrix& batch) const {
    if (batch.rows() != input_width())
        throw std::invalid_argument("Mlp::forward: batch has " + std::to_string(batch.rows()) +
                                    " rows, expected " + std::to_string(input_width()));
    Matrix a = batch;
    for (int l = 0; l < layer_count(); ++l) {
        Matrix z = weights_[l] * a;
        add_bias(z, biases_[l]);
        if (l + 1 < layer_count()) relu_inplace(z);
        a = std::move(z);
    }
    return a;
}

Mlp::Grads Mlp::zero_grads() const {
    Grads g;
    for (int l = 0; l < layer_count(); ++l) {
        g.weights.emplace_back(weights_[l].rows(), weights_[l].cols());
        g.biases.emplace_back(biases_[l].size(), 0.0);
    }
    return g;
}

Mlp::Grads& Mlp::Grads::operator+=(const Grads& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
    }
    return *this;
}

bool Mlp::Grads::all_finite() const {
    for (const Matrix& w : weights)
        if (!w.all_finite()) return false;
    for (const auto& b : biases)
        for (double x : b)
            if (!std::isfinite(x)) return false;
    return true;
}

Mlp::Grads Mlp::backward(const Matrix& batch, const Matrix& upstream) const {
    if (upstream.rows() != output_width() || upstream.cols() != batch.cols())
        throw std::invalid_argument("Mlp::backward: upstream shape mismatch");

    // Recompute forward, keeping each layer's activation for the chain rule.
    std::vector<Matrix> acts;
    acts.reserve(layer_count() + 1);
    acts.push_back(batch);
    for (int l = 0; l < layer_count(); ++l) {
        Matrix z = weights_[l] * acts.back();
        add_bias(z, biases_[l]);
        if (l + 1 < layer_count()) relu_inplace(z);
        acts.push_back(std::move(z));
    }

    Grads g = zero_grads();
    Matrix delta = upstream;
    for (int l = layer_count() - 1; l >= 0; --l) {
        g.weights[l] = multiply_nt(delta, acts[l]);
        for (int i = 0; i < delta.rows(); ++i) {
            const double* r = delta.row(i);
            double acc = 0.0;
            for (int j = 0; j < delta.cols(); ++j) acc += r[j];
            g.biases[l][i] = acc;
        }
        delta = multiply_tn(weights_[l], delta);
        if (l > 0) {
            // ReLU mask: the stored activation is already rectified.
            const Matrix& a = acts[l];
            for (int i = 0; i < delta.rows(); ++i) {
                double* d = delta.row(i);
                const double* ar = a.row(i);
                for (int j = 0; j < delta.cols(); ++j)
                    if (ar[j] <= 0.0) d[j] = 0.0;
            }
        }
    }
    g.input = std::move(delta);
    return g;
}

void RmsProp::step(Mlp& net, const Mlp::Grads& grads) {
    if (!grads.all_finite())
        throw std::runtime_error("RmsProp: non-finite gradient, aborting update");
    if (acc_w_.empty()) {
        for (int l = 0; l < net.layer_count(); ++l) {
            acc_w_.emplace_back(net.weights()[l].rows(), net.weights()[l].cols());
            acc_b_.emplace_back(net.biases()[l].size(), 0.0);
        }
    }
    for (int l = 0; l < net.layer_count(); ++l) {
        auto w = net.weights()[l].data();
        auto gw = grads.weights[l].data();
        auto aw = acc_w_[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            aw[i] = decay_ * aw[i] + (1.0 - decay_) * gw[i] * gw[i];
            w[i] -= lr_ * gw[i] / std::sqrt(aw[i] + eps_);
        }
        auto& b = net.biases()[l];
        const auto& gb = grads.biases[l];
        auto& ab = acc_b_[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
            ab[i] = decay_ * ab[i] + (1.0 - decay_) * gb[i] * gb[i];
            b[i] -= lr_ * gb[i] / std::sqrt(ab[i] + eps_);
        }
    }
}

namespace {

Matrix gather_cols(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(m.rows(), static_cast<int>(idx.size()));
    for (int j = 0; j < out.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) out(i, j) = m(i, idx[j]);
    return out;
}

double mse(const Matrix& pred, const Matrix& target) {
    double acc = 0.0;
    auto p = pred.data();
    auto t = target.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
    }
    return acc / static_cast<double>(p.size());
}

}  // namespace

double reconstruction_mse(const Autoencoder& model, const Matrix& data) {
    return mse(model.decoder.forward(model.encoder.forward(data)), data);
}

AeResult train_autoencoder(const Matrix& data, int p, const AeOptions& options) {
    if (data.cols() < 10)
        throw std::invalid_argument("train_autoencoder: need at least 10 samples");
    if (p < 1) throw std::invalid_argument("train_autoencoder: p must be positive");

    const int d = data.rows();
    Rng rng(split_seed(options.seed, 0x4145));
    std::vector<int> widths{d};
    for (int h : options.hidden) widths.push_back(h);
    widths.push_back(p);
    std::vector<int> dec_widths(widths.rbegin(), widths.rend());

    AeResult result;
    result.model.encoder = Mlp(widths, rng);
    result.model.decoder = Mlp(dec_widths, rng);

    const auto perm = rng.permutation(data.cols());
    const int val_count =
        std::max(1, static_cast<int>(options.validation_fraction * data.cols()));
    std::vector<int> val_idx(perm.begin(), perm.begin() + val_count);
    std::vector<int> train_idx(perm.begin() + val_count, perm.end());
    const Matrix train = gather_cols(data, train_idx);
    const Matrix val = gather_cols(data, val_idx);

    RmsProp enc_opt(options.learning_rate, options.rms_decay, options.rms_epsilon);
    RmsProp dec_opt(options.learning_rate, options.rms_decay, options.rms_epsilon);

    double best_val = reconstruction_mse(result.model, val);
    Autoencoder best = result.model;
    int since_improvement = 0;

    const double scale = 2.0 / static_cast<double>(train.size());
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const Matrix code = result.model.encoder.forward(train);
        const Matrix recon = result.model.decoder.forward(code);

        Matrix upstream = recon;
        upstream -= train;
        upstream *= scale;
        if (!upstream.all_finite())
            throw std::runtime_error("train_autoencoder: loss diverged at epoch " +
                                     std::to_string(epoch));

        const Mlp::Grads dec_g = result.model.decoder.backward(code, upstream);
        const Mlp::Grads enc_g = result.model.encoder.backward(train, dec_g.input);
        dec_opt.step(result.model.decoder, dec_g);
        enc_opt.step(result.model.encoder, enc_g);
        result.epochs_run = epoch + 1;

        const double val_mse = reconstruction_mse(result.model, val);
        if (val_mse < best_val - options.min_improvement) {
            best_val = val_mse;
            best = result.model;
            since_improvement = 0;
        } else {
            if (val_mse < best_val) {
                best_val = val_mse;
                best = result.model;
            }
            if (++since_improvement >= options.patience) break;
        }
    }

    result.model = std::move(best);
    result.validation_mse = best_val;
    return result;
}

AeResult train_autoencoder(const Matrix& data, int p, int epochs, double learning_rate,
                           std::uint64_t seed) {
    AeOptions options;
    options.epochs = epochs;
    options.learning_rate = learning_rate;
    options.seed = seed;
    return train_autoencoder(data, p, options);
}

}  // namespace dccamon
