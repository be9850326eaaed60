#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dccamon/cca.hpp"
#include "dccamon/rng.hpp"
#include "dccamon/windows.hpp"

using namespace dccamon;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.normal();
    return m;
}

double loss_of(const EncoderPair& pair, const WindowSet& normal, const WindowSet* abnormal,
               double beta, double ridge_rel) {
    return loss_and_grads(pair, normal, abnormal, beta, ridge_rel).loss;
}

EncoderPair small_pair(int d1, int d2, int p, std::uint64_t seed,
                       std::vector<int> f_hidden = {8}, std::vector<int> g_hidden = {8}) {
    Rng rng(seed);
    EncoderPair pair;
    std::vector<int> fw{d1};
    for (int h : f_hidden) fw.push_back(h);
    fw.push_back(p);
    std::vector<int> gw{d2};
    for (int h : g_hidden) gw.push_back(h);
    gw.push_back(p);
    pair.f = Mlp(fw, rng);
    pair.g = Mlp(gw, rng);
    pair.p = p;
    return pair;
}

}  // namespace

TEST_CASE("disjoint windows partition the sample range") {
    Rng rng(301);
    const Matrix signals = random_matrix(3, 100, rng);
    const Matrix quality = random_matrix(5, 100, rng);
    const WindowSet set = make_windows(signals, quality, 25, 4, 1, WindowMode::disjoint);
    CHECK(set.count() == 4);
    std::set<int> seen;
    for (const auto& w : set.x_windows) {
        CHECK(w.size() == 25);
        seen.insert(w.begin(), w.end());
    }
    CHECK(seen.size() == 100);  // every index exactly once
    // pairing preserved
    for (int i = 0; i < 4; ++i) CHECK(set.x_windows[i] == set.y_windows[i]);

    CHECK_THROWS_AS(make_windows(signals, quality, 25, 5, 1, WindowMode::disjoint),
                    std::invalid_argument);
}

TEST_CASE("bootstrap windows draw without replacement within each window") {
    Rng rng(303);
    const int population = 4000;
    const Matrix signals = random_matrix(2, population, rng);
    const Matrix quality = random_matrix(2, population, rng);
    const WindowSet set = make_windows(signals, quality, 25, 1000, 5, WindowMode::bootstrap);
    CHECK(set.count() == 1000);
    for (const auto& w : set.x_windows) {
        CHECK(w.size() == 25);
        std::set<int> distinct(w.begin(), w.end());
        CHECK(distinct.size() == 25);
        for (int idx : w) {
            CHECK(idx >= 0);
            CHECK(idx < population);
        }
    }
}

TEST_CASE("window of the full sample size is a permutation of the data") {
    Rng rng(305);
    const Matrix signals = random_matrix(2, 30, rng);
    const Matrix quality = random_matrix(2, 30, rng);
    for (WindowMode mode : {WindowMode::disjoint, WindowMode::bootstrap}) {
        const WindowSet set = make_windows(signals, quality, 30, 1, 9, mode);
        std::set<int> seen(set.x_windows[0].begin(), set.x_windows[0].end());
        CHECK(seen.size() == 30);
    }
}

TEST_CASE("materialize copies the paired columns") {
    Rng rng(307);
    const Matrix signals = random_matrix(3, 20, rng);
    const Matrix quality = random_matrix(4, 20, rng);
    const WindowSet set = make_windows(signals, quality, 5, 2, 3, WindowMode::bootstrap);
    const DataWindow w = materialize(set, 1);
    CHECK(w.x.rows() == 3);
    CHECK(w.y.rows() == 4);
    for (int j = 0; j < 5; ++j) {
        const int src = set.x_windows[1][j];
        for (int i = 0; i < 3; ++i) CHECK(w.x(i, j) == signals(i, src));
        for (int i = 0; i < 4; ++i) CHECK(w.y(i, j) == quality(i, src));
    }
}

TEST_CASE("perfectly paired views can reach the -p loss floor") {
    // identity-capable linear encoders on y == x: training drives the loss
    // toward -p
    Rng rng(309);
    const int d = 3, p = 2, n = 20;
    const Matrix signals = random_matrix(d, 200, rng);
    const WindowSet set = make_windows(signals, signals, n, 30, 11, WindowMode::bootstrap);

    TrainConfig config;
    config.window_size = n;
    config.dim = p;
    config.epochs = 120;
    config.learning_rate = 0.02;
    config.ridge_rel = 1e-4;
    config.seed = 13;
    config.f_hidden = {};
    config.g_hidden = {};
    const TrainResult result = train(config, set, nullptr);
    CHECK(result.loss_history.back() < -0.95 * p);
}

TEST_CASE("beta zero ignores the abnormal term") {
    Rng rng(311);
    const Matrix signals = random_matrix(3, 60, rng);
    const Matrix quality = random_matrix(3, 60, rng);
    const Matrix abnormal_signals = random_matrix(3, 60, rng);
    const WindowSet normal = make_windows(signals, quality, 10, 6, 1, WindowMode::bootstrap);
    const WindowSet abnormal = make_cross_windows(abnormal_signals, quality, 10, 6, 2);

    const EncoderPair pair = small_pair(3, 3, 2, 17);
    const LossGrads with = loss_and_grads(pair, normal, &abnormal, 0.0, 1e-4);
    const LossGrads without = loss_and_grads(pair, normal, nullptr, 0.0, 1e-4);
    CHECK(with.loss == without.loss);
    for (int l = 0; l < pair.f.layer_count(); ++l)
        CHECK(max_abs(with.f.weights[l] - without.f.weights[l]) == 0.0);
}

TEST_CASE("loss is invariant to window order") {
    Rng rng(313);
    const Matrix signals = random_matrix(3, 80, rng);
    const Matrix quality = random_matrix(4, 80, rng);
    WindowSet set = make_windows(signals, quality, 12, 8, 5, WindowMode::bootstrap);
    const EncoderPair pair = small_pair(3, 4, 2, 19);

    const double base = loss_of(pair, set, nullptr, 0.0, 1e-4);
    std::reverse(set.x_windows.begin(), set.x_windows.end());
    std::reverse(set.y_windows.begin(), set.y_windows.end());
    const double shuffled = loss_of(pair, set, nullptr, 0.0, 1e-4);
    CHECK(std::abs(base - shuffled) < 1e-10);
}

TEST_CASE("loss stays above the -p floor") {
    Rng rng(317);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix signals = random_matrix(3, 70, rng);
        const Matrix quality = random_matrix(3, 70, rng);
        const WindowSet set = make_windows(signals, quality, 11, 5, trial, WindowMode::bootstrap);
        const EncoderPair pair = small_pair(3, 3, 2, 100 + trial);
        CHECK(loss_of(pair, set, nullptr, 0.0, 1e-4) >= -2.0 - 1e-9);
    }
}

TEST_CASE("loss gradients match finite differences through both encoders") {
    Rng rng(319);
    const Matrix signals = random_matrix(4, 90, rng);
    Matrix quality = random_matrix(5, 90, rng);
    for (int j = 0; j < 90; ++j)
        for (int i = 0; i < 4; ++i) quality(i, j) += 0.5 * signals(i, j);
    const WindowSet normal = make_windows(signals, quality, 15, 6, 23, WindowMode::bootstrap);
    const Matrix abnormal_signals = random_matrix(4, 70, rng);
    const WindowSet abnormal = make_cross_windows(abnormal_signals, quality, 15, 4, 29);

    EncoderPair pair = small_pair(4, 5, 3, 31, {6}, {7});
    const double beta = 0.5;
    // ridge 0 keeps the loss an exact function of the parameters
    const LossGrads grads = loss_and_grads(pair, normal, &abnormal, beta, 0.0);

    const double step = 1e-5;
    int checks = 0;
    for (int check = 0; check < 20; ++check) {
        const bool on_f = rng.uniform() < 0.5;
        Mlp& net = on_f ? pair.f : pair.g;
        const Mlp::Grads& g = on_f ? grads.f : grads.g;
        const int layer = rng.uniform_int(0, net.layer_count() - 1);
        Matrix& w = net.weights()[layer];
        const int i = rng.uniform_int(0, w.rows() - 1);
        const int j = rng.uniform_int(0, w.cols() - 1);
        const double saved = w(i, j);
        w(i, j) = saved + step;
        const double up = loss_of(pair, normal, &abnormal, beta, 0.0);
        w(i, j) = saved - step;
        const double down = loss_of(pair, normal, &abnormal, beta, 0.0);
        w(i, j) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double analytic = g.weights[layer](i, j);
        CHECK(std::abs(fd - analytic) / std::max(1e-6, std::abs(fd)) < 1e-4);
        ++checks;
    }
    CHECK(checks == 20);
}

TEST_CASE("zero epochs returns the initialized pair") {
    Rng rng(331);
    const Matrix signals = random_matrix(3, 50, rng);
    const Matrix quality = random_matrix(3, 50, rng);
    const WindowSet set = make_windows(signals, quality, 10, 4, 7, WindowMode::bootstrap);
    TrainConfig config;
    config.window_size = 10;
    config.dim = 2;
    config.epochs = 0;
    config.seed = 41;
    config.f_hidden = {6};
    config.g_hidden = {6};
    const TrainResult result = train(config, set, nullptr);
    CHECK(result.loss_history.empty());

    Rng init(split_seed(41, 0x1));
    const Mlp expect_f(std::vector<int>{3, 6, 2}, init);
    CHECK(max_abs(result.pair.f.weights()[0] - expect_f.weights()[0]) == 0.0);
}

TEST_CASE("training is deterministic under a fixed seed") {
    Rng rng(337);
    const Matrix signals = random_matrix(3, 60, rng);
    Matrix quality = signals;
    const WindowSet set = make_windows(signals, quality, 10, 5, 2, WindowMode::bootstrap);
    TrainConfig config;
    config.window_size = 10;
    config.dim = 2;
    config.epochs = 15;
    config.learning_rate = 0.02;
    config.seed = 77;
    config.f_hidden = {5};
    config.g_hidden = {5};
    const TrainResult a = train(config, set, nullptr);
    const TrainResult b = train(config, set, nullptr);
    CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("separable data keeps a positive normal-abnormal score gap with beta") {
    Rng rng(341);
    // normal pairs share structure; abnormal signals are independent noise
    const int d = 3, n = 12;
    const Matrix latent = random_matrix(d, 150, rng);
    Matrix signals = latent;
    Matrix quality = latent;
    for (double& x : signals.data()) x += 0.15 * rng.normal();
    for (double& x : quality.data()) x += 0.15 * rng.normal();
    const Matrix abnormal_signals = random_matrix(d, 150, rng);

    const WindowSet normal = make_windows(signals, quality, n, 25, 3, WindowMode::bootstrap);
    const WindowSet abnormal = make_cross_windows(abnormal_signals, quality, n, 25, 4);

    TrainConfig config;
    config.window_size = n;
    config.dim = 2;
    config.epochs = 80;
    config.learning_rate = 0.02;
    config.beta = 0.5;
    config.seed = 51;
    config.f_hidden = {};
    config.g_hidden = {};
    const TrainResult result = train(config, normal, &abnormal);

    const LossGrads final_state =
        loss_and_grads(result.pair, normal, &abnormal, config.beta, config.ridge_rel);
    CHECK(final_state.mean_normal_score - final_state.mean_abnormal_score > 0.0);
}

TEST_CASE("train validates its configuration") {
    TrainConfig config;
    config.window_size = 5;
    config.dim = 6;  // n <= p
    const Matrix signals(3, 50);
    WindowSet set;
    CHECK_THROWS_AS(train(config, set, nullptr), std::invalid_argument);
    config.dim = 2;
    config.beta = 1.5;
    CHECK_THROWS_AS(train(config, set, nullptr), std::invalid_argument);
}
