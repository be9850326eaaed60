#include <doctest.h>

#include <cmath>

#include "dccamon/neural.hpp"
#include "dccamon/rng.hpp"

using namespace dccamon;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.normal();
    return m;
}

// straight-line re-evaluation of the network, scalar loops only
Matrix naive_forward(const Mlp& net, const Matrix& batch) {
    Matrix out(net.output_width(), batch.cols());
    for (int s = 0; s < batch.cols(); ++s) {
        std::vector<double> a(batch.rows());
        for (int i = 0; i < batch.rows(); ++i) a[i] = batch(i, s);
        for (int l = 0; l < net.layer_count(); ++l) {
            const Matrix& w = net.weights()[l];
            std::vector<double> z(w.rows());
            for (int i = 0; i < w.rows(); ++i) {
                double acc = net.biases()[l][i];
                for (int j = 0; j < w.cols(); ++j) acc += w(i, j) * a[j];
                if (l + 1 < net.layer_count() && acc < 0.0) acc = 0.0;
                z[i] = acc;
            }
            a = std::move(z);
        }
        for (int i = 0; i < net.output_width(); ++i) out(i, s) = a[i];
    }
    return out;
}

}  // namespace

TEST_CASE("forward trivial nets") {
    Rng rng(201);
    Mlp zero({3, 4, 2}, rng);
    for (auto& w : zero.weights())
        for (double& x : w.data()) x = 0.0;
    const Matrix batch = random_matrix(3, 7, rng);
    CHECK(max_abs(zero.forward(batch)) == 0.0);

    Mlp ident({3, 3}, rng);
    for (double& x : ident.weights()[0].data()) x = 0.0;
    for (int i = 0; i < 3; ++i) ident.weights()[0](i, i) = 1.0;
    CHECK(max_abs(ident.forward(batch) - batch) == 0.0);
}

TEST_CASE("forward matches a straight-line oracle") {
    Rng rng(203);
    Mlp net({5, 8, 3}, rng);
    const Matrix batch = random_matrix(5, 11, rng);
    CHECK(max_abs(net.forward(batch) - naive_forward(net, batch)) < 1e-12);
}

TEST_CASE("forward rejects shape mismatch") {
    Rng rng(205);
    Mlp net({4, 3}, rng);
    CHECK_THROWS_AS(net.forward(Matrix(5, 2)), std::invalid_argument);
    CHECK_THROWS_AS(net.backward(Matrix(4, 2), Matrix(2, 2)), std::invalid_argument);
}

TEST_CASE("zero upstream gives zero gradients") {
    Rng rng(207);
    Mlp net({4, 6, 2}, rng);
    const Matrix batch = random_matrix(4, 9, rng);
    const Mlp::Grads g = net.backward(batch, Matrix(2, 9));
    for (const auto& w : g.weights) CHECK(max_abs(w) == 0.0);
    CHECK(max_abs(g.input) == 0.0);
}

TEST_CASE("backward matches finite differences on parameters and inputs") {
    Rng rng(209);
    Mlp net({4, 7, 5, 2}, rng);
    Matrix batch = random_matrix(4, 13, rng);
    const Matrix upstream = random_matrix(2, 13, rng);

    auto objective = [&]() {
        const Matrix out = net.forward(batch);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += out.data()[i] * upstream.data()[i];
        return acc;
    };

    const Mlp::Grads grads = net.backward(batch, upstream);
    const double step = 1e-5;
    int checked = 0;
    for (int check = 0; check < 30; ++check) {
        const int layer = rng.uniform_int(0, net.layer_count() - 1);
        Matrix& w = net.weights()[layer];
        const int i = rng.uniform_int(0, w.rows() - 1);
        const int j = rng.uniform_int(0, w.cols() - 1);
        const double saved = w(i, j);
        w(i, j) = saved + step;
        const double up = objective();
        w(i, j) = saved - step;
        const double down = objective();
        w(i, j) = saved;
        const double fd = (up - down) / (2.0 * step);
        CHECK(std::abs(fd - grads.weights[layer](i, j)) / std::max(1.0, std::abs(fd)) < 1e-5);
        ++checked;
    }
    CHECK(checked == 30);

    for (int check = 0; check < 10; ++check) {
        const int i = rng.uniform_int(0, batch.rows() - 1);
        const int j = rng.uniform_int(0, batch.cols() - 1);
        const double saved = batch(i, j);
        batch(i, j) = saved + step;
        const double up = objective();
        batch(i, j) = saved - step;
        const double down = objective();
        batch(i, j) = saved;
        const double fd = (up - down) / (2.0 * step);
        CHECK(std::abs(fd - grads.input(i, j)) / std::max(1.0, std::abs(fd)) < 1e-5);
    }
}

TEST_CASE("linear net gradient has the closed form upstream * batch^T") {
    Rng rng(211);
    Mlp net({4, 3}, rng);  // single layer: identity activation
    const Matrix batch = random_matrix(4, 6, rng);
    const Matrix upstream = random_matrix(3, 6, rng);
    const Mlp::Grads g = net.backward(batch, upstream);
    CHECK(max_abs(g.weights[0] - multiply_nt(upstream, batch)) < 1e-10);
}

TEST_CASE("relu layers are positively homogeneous in the first layer") {
    Rng rng(213);
    Mlp net({5, 6, 3}, rng);
    const Matrix batch = random_matrix(5, 8, rng);
    const Matrix base = net.forward(batch);

    const double c = 2.5;
    Mlp scaled = net;
    scaled.weights()[0] *= c;
    for (double& b : scaled.biases()[0]) b *= c;
    const Matrix out = scaled.forward(batch);

    // hidden pre-activations scale by c, so (out - b2) = c * (base - b2)
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) {
            const double b2 = net.biases()[1][i];
            CHECK(out(i, j) - b2 == doctest::Approx(c * (base(i, j) - b2)).epsilon(1e-10));
        }
}

TEST_CASE("rmsprop step formula and edge cases") {
    Rng rng(215);
    Mlp net({2, 2}, rng);
    const Mlp before = net;

    RmsProp opt(0.1, 0.9, 1e-8);
    opt.step(net, net.zero_grads());
    CHECK(max_abs(net.weights()[0] - before.weights()[0]) == 0.0);  // zero grad, no move

    // constant gradient g: fresh accumulator gives step lr*g/sqrt(0.1 g^2 + eps)
    Mlp fresh = before;
    RmsProp opt2(0.1, 0.9, 1e-8);
    Mlp::Grads grads = fresh.zero_grads();
    const double g = 0.7;
    for (double& x : grads.weights[0].data()) x = g;
    opt2.step(fresh, grads);
    const double expect = 0.1 * g / std::sqrt(0.1 * g * g + 1e-8);
    for (std::size_t i = 0; i < fresh.weights()[0].size(); ++i)
        CHECK(before.weights()[0].data()[i] - fresh.weights()[0].data()[i] ==
              doctest::Approx(expect).epsilon(1e-12));

    // non-finite gradients abort
    for (double& x : grads.weights[0].data()) x = std::nan("");
    CHECK_THROWS_AS(opt2.step(fresh, grads), std::runtime_error);
}

TEST_CASE("rmsprop converges on a scalar quadratic") {
    // the normalized update moves roughly lr per step, so crossing from 5
    // into +-0.5 needs lr*steps comfortably above 5
    Rng rng(217);
    Mlp net({1, 1}, rng);
    net.weights()[0](0, 0) = 5.0;
    net.biases()[0][0] = 0.0;
    RmsProp opt(0.05, 0.9, 1e-8);
    for (int step = 0; step < 200; ++step) {
        Mlp::Grads g = net.zero_grads();
        g.weights[0](0, 0) = 2.0 * net.weights()[0](0, 0);
        g.biases[0][0] = 0.0;
        opt.step(net, g);
    }
    CHECK(std::abs(net.weights()[0](0, 0)) < 0.5);
}

TEST_CASE("autoencoder recovers an exact linear subspace") {
    Rng rng(219);
    const int d = 8, p = 3, n = 400;
    const Matrix basis = random_matrix(d, p, rng);
    const Matrix coords = random_matrix(p, n, rng);
    const Matrix data = basis * coords;

    AeOptions options;
    options.hidden = {};  // purely linear encoder/decoder
    options.epochs = 900;
    options.learning_rate = 2e-3;
    options.patience = 100;
    options.seed = 99;
    const AeResult result = train_autoencoder(data, p, options);
    CHECK(result.validation_mse < 1e-3);
}

TEST_CASE("autoencoder at full width reaches near-zero error") {
    Rng rng(221);
    const Matrix data = random_matrix(4, 200, rng);
    AeOptions options;
    options.hidden = {};
    options.epochs = 500;
    options.learning_rate = 5e-3;
    options.seed = 7;
    const AeResult result = train_autoencoder(data, 4, options);
    CHECK(result.validation_mse < 1e-3);
}

TEST_CASE("autoencoder on white noise stays near the noise floor") {
    Rng rng(223);
    const int d = 8;
    const Matrix data = random_matrix(d, 500, rng);
    AeOptions options;
    options.epochs = 150;
    options.hidden = {16};
    options.learning_rate = 2e-3;
    options.seed = 11;
    const AeResult result = train_autoencoder(data, 1, options);
    // nothing to compress: one latent keeps most of the unit variance
    CHECK(result.validation_mse > 0.75);
    CHECK(result.validation_mse < 1.25);
}

TEST_CASE("autoencoder training is deterministic under a fixed seed") {
    Rng rng(225);
    const Matrix data = random_matrix(6, 120, rng);
    AeOptions options;
    options.epochs = 40;
    options.seed = 31;
    options.hidden = {10};
    const AeResult a = train_autoencoder(data, 2, options);
    const AeResult b = train_autoencoder(data, 2, options);
    CHECK(a.validation_mse == b.validation_mse);
    for (int l = 0; l < a.model.encoder.layer_count(); ++l)
        CHECK(max_abs(a.model.encoder.weights()[l] - b.model.encoder.weights()[l]) == 0.0);
}

TEST_CASE("autoencoder input validation") {
    Rng rng(227);
    const Matrix tiny = random_matrix(4, 5, rng);
    CHECK_THROWS_AS(train_autoencoder(tiny, 2, AeOptions{}), std::invalid_argument);
}
