#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dccamon/cca.hpp"

namespace dccamon {

/// Finite-sample estimation error bound for the p-dimensional correlation
/// score at confidence 1 - delta:
///   4*C*p*log(6p/delta)/(3n) + sqrt(2*C^2*p^2*log(6p/delta)/n),
/// with C = B*(lambda_min + lambda_max)/lambda_min^2.
double theorem_bound(int p, double n, double delta, double b, double lambda_min,
                     double lambda_max);

struct BoundExperiment {
    GaussianCcaSpec spec;
    std::vector<int> n_grid;
    int trials = 0;
    double delta = 0.1;
    Matrix errors;                     // trials x |grid|
    std::vector<double> median_error;  // per grid point
    std::vector<double> q90_error;
    std::vector<double> bound;         // the formula at the measured B
    std::vector<double> b_values;      // empirical max squared norm per n
    double fitted_slope = 0.0;         // log median error vs log n
    double lambda_min = 0.0, lambda_max = 0.0;

    std::string to_table() const;  // delimited text: n, median, q90, bound
};

/// Monte-Carlo sweep of |score - true_rho| over the window-size grid, with
/// the bound evaluated from per-batch empirical norm maxima and the spec's
/// covariance blocks. Eigenvalue range spans the auto blocks and the
/// positive cross-block singular values.
BoundExperiment run_bound_experiment(const GaussianCcaSpec& spec,
                                     const std::vector<int>& n_grid, int trials,
                                     double delta, std::uint64_t seed);

/// Empirical quantile by order statistic (q in [0, 1]).
double quantile(std::vector<double> values, double q);

}  // namespace dccamon
