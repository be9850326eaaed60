#include "dccamon/cca.hpp"

#include <cmath>
#include <stdexcept>

#include "dccamon/rng.hpp"

namespace dccamon {

namespace {

void check_window(const Matrix& u, const Matrix& v) {
    if (u.rows() != v.rows())
        throw std::invalid_argument("cca: feature dimensions differ");
    if (u.cols() != v.cols())
        throw std::invalid_argument("cca: sample counts differ");
    if (u.cols() <= u.rows())
        throw std::invalid_argument("cca: window too small (need n > p, got n=" +
                                    std::to_string(u.cols()) + ", p=" +
                                    std::to_string(u.rows()) + ")");
}

struct Whitened {
    Matrix uc, vc;      // centered inputs
    Matrix w1, w2;      // inverse square roots of the ridged auto-covariances
    Matrix s12;
    Matrix t;
    Svd t_svd;
};

Whitened whiten(const Matrix& u, const Matrix& v, double ridge_u, double ridge_v) {
    check_window(u, v);
    Whitened w;
    w.uc = center_rows(u);
    w.vc = center_rows(v);
    const Matrix s11 = centered_covariance(w.uc, w.uc, false);
    const Matrix s22 = centered_covariance(w.vc, w.vc, false);
    w.s12 = centered_covariance(w.uc, w.vc, false);
    w.w1 = inv_sqrt_spd(s11, ridge_u);
    w.w2 = inv_sqrt_spd(s22, ridge_v);
    w.t = w.w1 * w.s12 * w.w2;
    w.t_svd = svd(w.t);
    return w;
}

CcaSolution solution_from(const Whitened& w) {
    CcaSolution sol;
    sol.t = w.t;
    sol.left_dirs = w.t_svd.left;
    sol.right_dirs = w.t_svd.right;
    sol.singulars = w.t_svd.singulars;
    sol.score = 0.0;
    for (double s : sol.singulars) sol.score += s;
    return sol;
}

}  // namespace

CcaSolution cca_score(const Matrix& u, const Matrix& v, double ridge) {
    return cca_score(u, v, ridge, ridge);
}

CcaSolution cca_score(const Matrix& u, const Matrix& v, double ridge_u, double ridge_v) {
    return solution_from(whiten(u, v, ridge_u, ridge_v));
}

double relative_ridge(const Matrix& u, double rel) {
    if (rel == 0.0) return 0.0;
    const Matrix uc = center_rows(u);
    double trace = 0.0;
    for (int i = 0; i < uc.rows(); ++i) {
        const double* r = uc.row(i);
        double acc = 0.0;
        for (int j = 0; j < uc.cols(); ++j) acc += r[j] * r[j];
        trace += acc / (uc.cols() - 1);
    }
    return rel * trace / u.rows();
}

CcaSolution cca_score_auto(const Matrix& u, const Matrix& v, double rel) {
    return cca_score(u, v, relative_ridge(u, rel), relative_ridge(v, rel));
}

CcaGradient cca_score_gradient(const Matrix& u, const Matrix& v, double ridge) {
    return cca_score_gradient(u, v, ridge, ridge);
}

CcaGradient cca_score_gradient(const Matrix& u, const Matrix& v, double ridge_u,
                               double ridge_v) {
    Whitened w = whiten(u, v, ridge_u, ridge_v);
    const int p = u.rows();
    const int n = u.cols();

    const Matrix& left = w.t_svd.left;
    const Matrix& right = w.t_svd.right;

    // d score / d S12 = W1 L R^T W2
    const Matrix g12 = w.w1 * multiply_nt(left, right) * w.w2;

    // d score / d S11 = -1/2 W1 L D L^T W1   (and the mirrored term for S22)
    Matrix ld = left;
    Matrix rd = right;
    for (int j = 0; j < p; ++j) {
        const double s = w.t_svd.singulars[j];
        for (int i = 0; i < p; ++i) {
            ld(i, j) *= s;
            rd(i, j) *= s;
        }
    }
    Matrix g11 = w.w1 * multiply_nt(ld, left) * w.w1;
    g11 *= -0.5;
    Matrix g22 = w.w2 * multiply_nt(rd, right) * w.w2;
    g22 *= -0.5;

    // Chain through S11 = uc uc^T/(n-1), S12 = uc vc^T/(n-1), then through
    // the row centering (subtract each gradient row's mean).
    const double inv = 1.0 / (n - 1);
    Matrix du = 2.0 * (g11 * w.uc) + g12 * w.vc;
    du *= inv;
    Matrix dv = 2.0 * (g22 * w.vc) + multiply_tn(g12, w.uc);
    dv *= inv;

    CcaGradient grad;
    grad.du = center_rows(du);
    grad.dv = center_rows(dv);
    grad.solution = solution_from(w);
    return grad;
}

CcaGradient cca_score_gradient_auto(const Matrix& u, const Matrix& v, double rel) {
    return cca_score_gradient(u, v, relative_ridge(u, rel), relative_ridge(v, rel));
}

GaussianCcaSpec make_gaussian_spec(int p, const std::vector<double>& target_singulars,
                                   std::uint64_t seed) {
    if (p <= 0) throw std::invalid_argument("make_gaussian_spec: p must be positive");
    if (static_cast<int>(target_singulars.size()) != p)
        throw std::invalid_argument("make_gaussian_spec: need exactly p target singular values");
    for (double s : target_singulars)
        if (s < 0.0 || s >= 1.0)
            throw std::invalid_argument(
                "make_gaussian_spec: singular values must lie in [0, 1)");

    Rng rng(seed);
    auto random_orthogonal = [&]() {
        // Gram-Schmidt on a Gaussian matrix; degenerate draws have measure zero.
        Matrix q(p, p);
        for (int j = 0; j < p; ++j) {
            std::vector<double> col(p);
            for (int i = 0; i < p; ++i) col[i] = rng.normal();
            for (int pass = 0; pass < 2; ++pass) {
                for (int k = 0; k < j; ++k) {
                    double dot = 0.0;
                    for (int i = 0; i < p; ++i) dot += col[i] * q(i, k);
                    for (int i = 0; i < p; ++i) col[i] -= dot * q(i, k);
                }
            }
            double norm = 0.0;
            for (double x : col) norm += x * x;
            norm = std::sqrt(norm);
            for (int i = 0; i < p; ++i) q(i, j) = col[i] / norm;
        }
        return q;
    };

    const Matrix q1 = random_orthogonal();
    const Matrix q2 = random_orthogonal();
    Matrix scaled = q1;
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) scaled(i, j) *= target_singulars[j];
    const Matrix cross = multiply_nt(scaled, q2);

    GaussianCcaSpec spec;
    spec.dim = p;
    spec.joint_cov = Matrix(2 * p, 2 * p);
    for (int i = 0; i < 2 * p; ++i) spec.joint_cov(i, i) = 1.0;
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            spec.joint_cov(i, p + j) = cross(i, j);
            spec.joint_cov(p + j, i) = cross(i, j);
        }
    }
    spec.true_rho = 0.0;
    for (double s : target_singulars) spec.true_rho += s;
    return spec;
}

std::pair<Matrix, Matrix> sample_gaussian(const GaussianCcaSpec& spec, int n,
                                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_gaussian: n must be at least 1");
    const int p = spec.dim;
    const Matrix root = sqrt_spd(spec.joint_cov);
    Matrix z(2 * p, n);
    Rng rng(seed);
    for (double& x : z.data()) x = rng.normal();
    const Matrix joint = root * z;
    Matrix x(p, n), y(p, n);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) {
            x(i, j) = joint(i, j);
            y(i, j) = joint(p + i, j);
        }
    return {std::move(x), std::move(y)};
}

}  // namespace dccamon
