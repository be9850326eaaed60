#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dccamon/matrix.hpp"

namespace dccamon {

/// Result of evaluating the windowed canonical correlation of two p x n
/// feature blocks. score is the sum of the singular values of the whitened
/// cross-matrix t; left_dirs/right_dirs are t's singular vectors.
struct CcaSolution {
    double score = 0.0;
    Matrix t;
    Matrix left_dirs;
    Matrix right_dirs;
    std::vector<double> singulars;
};

/// Canonical correlation score of u, v (both p x n, columns are paired
/// samples). Rows are mean-centered internally. ridge is added to the
/// diagonal of both auto-covariances before whitening.
CcaSolution cca_score(const Matrix& u, const Matrix& v, double ridge);

/// Same, with independent ridges per side (used by the relative-ridge path).
CcaSolution cca_score(const Matrix& u, const Matrix& v, double ridge_u, double ridge_v);

/// rel * trace(cov(u)) / p, the default stabilizer for training and scoring.
double relative_ridge(const Matrix& u, double rel);

/// Score with ridge chosen per side as rel * trace/p of that side's
/// auto-covariance.
CcaSolution cca_score_auto(const Matrix& u, const Matrix& v, double rel);

struct CcaGradient {
    Matrix du;
    Matrix dv;
    CcaSolution solution;
};

/// Analytic gradient of the score with respect to every entry of u and v,
/// obtained from the SVD of the whitened cross-matrix and chained through the
/// centered covariance estimators. The ridge is treated as a constant.
CcaGradient cca_score_gradient(const Matrix& u, const Matrix& v, double ridge);
CcaGradient cca_score_gradient(const Matrix& u, const Matrix& v, double ridge_u, double ridge_v);
CcaGradient cca_score_gradient_auto(const Matrix& u, const Matrix& v, double rel);

/// Population model with identity auto-covariances and a cross block whose
/// singular values are chosen directly, so the true correlation sum is known
/// by construction.
struct GaussianCcaSpec {
    int dim = 0;
    Matrix joint_cov;  // 2p x 2p
    double true_rho = 0.0;
};

GaussianCcaSpec make_gaussian_spec(int p, const std::vector<double>& target_singulars,
                                   std::uint64_t seed);

/// n i.i.d. columns from N(0, joint_cov), split into the two p-row views.
std::pair<Matrix, Matrix> sample_gaussian(const GaussianCcaSpec& spec, int n,
                                          std::uint64_t seed);

}  // namespace dccamon
