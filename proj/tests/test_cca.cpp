#include <doctest.h>

#include <cmath>

#include "dccamon/cca.hpp"
#include "dccamon/matrix.hpp"
#include "dccamon/rng.hpp"

using namespace dccamon;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.normal();
    return m;
}

// Generalized-eigenproblem CCA oracle: eigenvalues of
//   S12 S22^-1 S21 w = lambda S11 w
// via Cholesky reduction; score is the sum of sqrt(lambda).
// Uses its own Cholesky and triangular solves, independent of the
// whitening/SVD route in the implementation.
Matrix cholesky_lower(const Matrix& m) {
    const int n = m.rows();
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = m(i, j);
            for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            if (i == j) {
                REQUIRE(acc > 0.0);
                l(i, i) = std::sqrt(acc);
            } else {
                l(i, j) = acc / l(j, j);
            }
        }
    }
    return l;
}

// solves L X = B for lower-triangular L
Matrix forward_solve(const Matrix& l, const Matrix& b) {
    Matrix x = b;
    for (int col = 0; col < b.cols(); ++col) {
        for (int i = 0; i < l.rows(); ++i) {
            double acc = x(i, col);
            for (int k = 0; k < i; ++k) acc -= l(i, k) * x(k, col);
            x(i, col) = acc / l(i, i);
        }
    }
    return x;
}

double cca_oracle(const Matrix& u, const Matrix& v) {
    const Matrix s11 = centered_covariance(u, u, true);
    const Matrix s22 = centered_covariance(v, v, true);
    const Matrix s12 = centered_covariance(u, v, true);
    const Matrix l22 = cholesky_lower(s22);
    // S12 S22^-1 S21 = (L22^-1 S21)^T (L22^-1 S21)
    const Matrix half = forward_solve(l22, transpose(s12));
    const Matrix a = multiply_tn(half, half);
    // reduce the pencil (A, S11) with the Cholesky of S11
    const Matrix l11 = cholesky_lower(s11);
    const Matrix tmp = forward_solve(l11, a);                    // L^-1 A
    const Matrix c = transpose(forward_solve(l11, transpose(tmp)));  // L^-1 A L^-T
    Matrix sym = c;
    for (int i = 0; i < sym.rows(); ++i)
        for (int j = 0; j < sym.cols(); ++j) sym(i, j) = 0.5 * (c(i, j) + c(j, i));
    double score = 0.0;
    for (double lambda : sym_eig(sym).eigenvalues) score += std::sqrt(std::max(lambda, 0.0));
    return score;
}

}  // namespace

TEST_CASE("self correlation saturates at p") {
    Rng rng(101);
    const Matrix u = random_matrix(3, 40, rng);
    const CcaSolution sol = cca_score(u, u, 0.0);
    CHECK(sol.score == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(max_abs(sol.t - Matrix::identity(3)) < 1e-8);
}

TEST_CASE("scalar correlation is affine invariant") {
    Rng rng(103);
    const Matrix u = random_matrix(1, 30, rng);
    Matrix v = u;
    for (double& x : v.data()) x = 3.0 * x + 7.0;
    CHECK(cca_score(u, v, 0.0).score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("score matches the generalized-eigenproblem oracle") {
    Rng rng(107);
    const Matrix u = random_matrix(2, 100, rng);
    const Matrix v = random_matrix(2, 100, rng);
    CHECK(cca_score(u, v, 0.0).score == doctest::Approx(cca_oracle(u, v)).epsilon(1e-8));
}

TEST_CASE("oracle equivalence holds across sizes") {
    Rng rng(109);
    for (int p = 2; p <= 5; ++p) {
        const int n = 12 * p;
        const Matrix u = random_matrix(p, n, rng);
        Matrix v = random_matrix(p, n, rng);
        // mix in some structure so scores are away from zero
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n; ++j) v(i, j) += 0.5 * u(i, j);
        const double got = cca_score(u, v, 0.0).score;
        CHECK(std::abs(got - cca_oracle(u, v)) < 1e-8);
    }
}

TEST_CASE("window preconditions") {
    Rng rng(113);
    const Matrix u = random_matrix(4, 4, rng);
    CHECK_THROWS_AS(cca_score(u, u, 0.0), std::invalid_argument);  // n <= p
    const Matrix a = random_matrix(3, 30, rng);
    const Matrix b = random_matrix(2, 30, rng);
    CHECK_THROWS_AS(cca_score(a, b, 0.0), std::invalid_argument);  // row mismatch
    Matrix flat(2, 30);  // zero rows: degenerate covariance
    CHECK_THROWS_AS(cca_score(flat, flat, 0.0), DegenerateMatrixError);
}

TEST_CASE("affine invariance, symmetry and boundedness") {
    Rng rng(127);
    for (int trial = 0; trial < 10; ++trial) {
        const int p = 2 + trial % 3;
        const int n = 15 * p;
        const Matrix u = random_matrix(p, n, rng);
        const Matrix v = random_matrix(p, n, rng);
        const double base = cca_score(u, v, 0.0).score;

        CHECK(cca_score(v, u, 0.0).score == doctest::Approx(base).epsilon(1e-10));
        CHECK(base >= 0.0);
        CHECK(base <= p + 1e-6);

        // invertible maps and shifts on both sides
        Matrix a = random_matrix(p, p, rng);
        for (int i = 0; i < p; ++i) a(i, i) += 3.0;
        Matrix c = random_matrix(p, p, rng);
        for (int i = 0; i < p; ++i) c(i, i) += 3.0;
        Matrix au = a * u;
        Matrix cv = c * v;
        for (int i = 0; i < p; ++i) {
            const double bu = rng.uniform(-5.0, 5.0), bv = rng.uniform(-5.0, 5.0);
            for (int j = 0; j < n; ++j) {
                au(i, j) += bu;
                cv(i, j) += bv;
            }
        }
        CHECK(cca_score(au, cv, 0.0).score == doctest::Approx(base).epsilon(1e-8));
    }
}

TEST_CASE("solution invariants: score equals the singular sum, descending in [0,1]") {
    Rng rng(131);
    const Matrix u = random_matrix(4, 60, rng);
    const Matrix v = random_matrix(4, 60, rng);
    const CcaSolution sol = cca_score(u, v, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < sol.singulars.size(); ++i) {
        sum += sol.singulars[i];
        if (i) CHECK(sol.singulars[i - 1] >= sol.singulars[i]);
        CHECK(sol.singulars[i] >= 0.0);
        CHECK(sol.singulars[i] <= 1.0 + 1e-6);
    }
    CHECK(sol.score == doctest::Approx(sum).epsilon(1e-10));
}

TEST_CASE("gradient is orthogonal to uniform rescaling at u == v") {
    Rng rng(137);
    const Matrix u = random_matrix(3, 36, rng);
    const CcaGradient grad = cca_score_gradient(u, u, 0.0);
    double dir = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dir += grad.du.data()[i] * u.data()[i];
        norm += u.data()[i] * u.data()[i];
    }
    CHECK(std::abs(dir) / std::sqrt(norm) < 1e-6);
}

TEST_CASE("gradient agrees with central finite differences") {
    Rng rng(139);
    const int p = 3, n = 40;
    Matrix u = random_matrix(p, n, rng);
    Matrix v = random_matrix(p, n, rng);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) v(i, j) += 0.4 * u(i, j);

    const CcaGradient grad = cca_score_gradient(u, v, 0.0);
    const double step = 1e-5;
    for (int check = 0; check < 20; ++check) {
        const int i = rng.uniform_int(0, p - 1);
        const int j = rng.uniform_int(0, n - 1);
        const bool on_u = rng.uniform() < 0.5;
        Matrix& target = on_u ? u : v;
        const double saved = target(i, j);
        target(i, j) = saved + step;
        const double up = cca_score(u, v, 0.0).score;
        target(i, j) = saved - step;
        const double down = cca_score(u, v, 0.0).score;
        target(i, j) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double analytic = on_u ? grad.du(i, j) : grad.dv(i, j);
        CHECK(std::abs(fd - analytic) / std::max(1e-8, std::abs(fd)) < 1e-4);
    }
}

TEST_CASE("scalar gradient matches the closed-form correlation derivative") {
    Rng rng(149);
    const int n = 25;
    const Matrix u = random_matrix(1, n, rng);
    Matrix v = random_matrix(1, n, rng);
    for (int j = 0; j < n; ++j) v(0, j) += 0.8 * u(0, j);

    const CcaGradient grad = cca_score_gradient(u, v, 0.0);

    // r = <uc, vc> / (|uc| |vc|); d|r|/du = sign(r) (vc/(|uc||vc|) - r uc/|uc|^2)
    std::vector<double> uc(n), vc(n);
    double mu = 0.0, mv = 0.0;
    for (int j = 0; j < n; ++j) {
        mu += u(0, j) / n;
        mv += v(0, j) / n;
    }
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (int j = 0; j < n; ++j) {
        uc[j] = u(0, j) - mu;
        vc[j] = v(0, j) - mv;
        uu += uc[j] * uc[j];
        vv += vc[j] * vc[j];
        uv += uc[j] * vc[j];
    }
    const double r = uv / std::sqrt(uu * vv);
    const double sign = r >= 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < n; ++j) {
        const double expect = sign * (vc[j] / std::sqrt(uu * vv) - r * uc[j] / uu);
        CHECK(grad.du(0, j) == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("gradient property check over many random instances") {
    Rng rng(151);
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int p = 2 + trial % 4;
        const int n = 10 * p + 7;
        Matrix u = random_matrix(p, n, rng);
        Matrix v = random_matrix(p, n, rng);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n; ++j) v(i, j) += rng.uniform(-0.6, 0.6) * u(i, j);
        const CcaGradient grad = cca_score_gradient(u, v, 0.0);
        const double step = 1e-5;
        for (int check = 0; check < 5; ++check) {
            const int i = rng.uniform_int(0, p - 1);
            const int j = rng.uniform_int(0, n - 1);
            const double saved = u(i, j);
            u(i, j) = saved + step;
            const double up = cca_score(u, v, 0.0).score;
            u(i, j) = saved - step;
            const double down = cca_score(u, v, 0.0).score;
            u(i, j) = saved;
            const double fd = (up - down) / (2.0 * step);
            CHECK(std::abs(fd - grad.du(i, j)) / std::max(1e-8, std::abs(fd)) < 1e-4);
            ++checked;
        }
    }
    CHECK(checked >= 50);
}

TEST_CASE("gaussian spec construction") {
    const GaussianCcaSpec zero = make_gaussian_spec(3, {0.0, 0.0, 0.0}, 5);
    CHECK(zero.true_rho == doctest::Approx(0.0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(zero.joint_cov(i, 3 + j) == doctest::Approx(0.0));

    const GaussianCcaSpec spec = make_gaussian_spec(2, {0.9, 0.5}, 5);
    CHECK(spec.true_rho == doctest::Approx(1.4));

    // the stored blocks reproduce true_rho through the whitened cross matrix
    Matrix s12(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s12(i, j) = spec.joint_cov(i, 2 + j);
    CHECK(nuclear_norm(s12) == doctest::Approx(spec.true_rho).epsilon(1e-10));

    CHECK_THROWS_AS(make_gaussian_spec(2, {0.5, 1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_gaussian_spec(2, {0.5}, 1), std::invalid_argument);
}

TEST_CASE("gaussian sampling: determinism, marginals and consistency") {
    const GaussianCcaSpec spec = make_gaussian_spec(2, {0.7, 0.4}, 42);

    const auto [x1, y1] = sample_gaussian(spec, 500, 9);
    const auto [x2, y2] = sample_gaussian(spec, 500, 9);
    CHECK(max_abs(x1 - x2) == 0.0);  // bit identical under a fixed seed
    CHECK(max_abs(y1 - y2) == 0.0);

    const int n = 100000;
    const auto [x, y] = sample_gaussian(spec, n, 10);
    const Matrix cov = centered_covariance(x, x, true);
    CHECK(frobenius_norm(cov - Matrix::identity(2)) < 5.0 / std::sqrt(static_cast<double>(n)) * 4);

    // large-sample score approaches the population value
    const double score = cca_score(x, y, 0.0).score;
    CHECK(std::abs(score - spec.true_rho) < 0.01);
}

TEST_CASE("null spec score shrinks with n") {
    const GaussianCcaSpec null_spec = make_gaussian_spec(2, {0.0, 0.0}, 3);
    const auto [x, y] = sample_gaussian(null_spec, 100000, 4);
    CHECK(cca_score(x, y, 0.0).score < 0.1);
}
