#include "dccamon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dccamon/rng.hpp"

namespace dccamon {

double theorem_bound(int p, double n, double delta, double b, double lambda_min,
                     double lambda_max) {
    if (p < 1 || n <= 0.0 || b <= 0.0 || lambda_min <= 0.0 || lambda_max <= 0.0)
        throw std::invalid_argument("theorem_bound: arguments must be positive");
    // delta is a confidence level in (0,1) in normal use, but the formula is
    // well defined wherever the log factor stays positive
    if (delta <= 0.0 || delta >= 6.0 * p)
        throw std::invalid_argument("theorem_bound: delta out of the formula's domain");
    const double c = b * (lambda_min + lambda_max) / (lambda_min * lambda_min);
    const double lg = std::log(6.0 * p / delta);
    return 4.0 * c * p * lg / (3.0 * n) + std::sqrt(2.0 * c * c * p * p * lg / n);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(
        std::lround(q * static_cast<double>(values.size() - 1)));
    return values[std::min(idx, values.size() - 1)];
}

std::string BoundExperiment::to_table() const {
    std::ostringstream os;
    os << "# trials " << trials << " delta " << delta << " true_rho " << spec.true_rho
       << " slope " << fitted_slope << "\n";
    os << "# B is the per-batch empirical max squared sample norm\n";
    os << "n\tmedian_error\tq90_error\tbound\n";
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        os << n_grid[i] << "\t" << median_error[i] << "\t" << q90_error[i] << "\t"
           << bound[i] << "\n";
    return os.str();
}

BoundExperiment run_bound_experiment(const GaussianCcaSpec& spec,
                                     const std::vector<int>& n_grid, int trials,
                                     double delta, std::uint64_t seed) {
    if (trials < 100)
        throw std::invalid_argument("run_bound_experiment: need at least 100 trials");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] <= 4 * spec.dim)
            throw std::invalid_argument("run_bound_experiment: every n must exceed 4p");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("run_bound_experiment: n grid must be increasing");
    }

    BoundExperiment exp;
    exp.spec = spec;
    exp.n_grid = n_grid;
    exp.trials = trials;
    exp.delta = delta;
    exp.errors = Matrix(trials, static_cast<int>(n_grid.size()));
    exp.b_values.assign(n_grid.size(), 0.0);

    const int p = spec.dim;

    // eigenvalue range over the auto blocks and the cross block's positive
    // singular values
    {
        Matrix s11(p, p), s22(p, p), s12(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) {
                s11(i, j) = spec.joint_cov(i, j);
                s22(i, j) = spec.joint_cov(p + i, p + j);
                s12(i, j) = spec.joint_cov(i, p + j);
            }
        std::vector<double> values;
        for (double l : sym_eig(s11).eigenvalues) values.push_back(l);
        for (double l : sym_eig(s22).eigenvalues) values.push_back(l);
        for (double s : svd(s12).singulars)
            if (s > 1e-12) values.push_back(s);
        exp.lambda_max = *std::max_element(values.begin(), values.end());
        exp.lambda_min = *std::min_element(values.begin(), values.end());
    }

    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const int n = n_grid[gi];
        double b_max = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto [x, y] =
                sample_gaussian(spec, n, split_seed(seed, (gi << 20) + t));
            exp.errors(t, static_cast<int>(gi)) =
                std::abs(cca_score(x, y, 0.0).score - spec.true_rho);
            for (int j = 0; j < n; ++j) {
                double nx = 0.0, ny = 0.0;
                for (int i = 0; i < p; ++i) {
                    nx += x(i, j) * x(i, j);
                    ny += y(i, j) * y(i, j);
                }
                b_max = std::max({b_max, nx, ny});
            }
        }
        exp.b_values[gi] = b_max;
    }

    exp.median_error.resize(n_grid.size());
    exp.q90_error.resize(n_grid.size());
    exp.bound.resize(n_grid.size());
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        std::vector<double> col(trials);
        for (int t = 0; t < trials; ++t) col[t] = exp.errors(t, static_cast<int>(gi));
        exp.median_error[gi] = quantile(col, 0.5);
        exp.q90_error[gi] = quantile(col, 1.0 - delta);
        exp.bound[gi] = theorem_bound(p, n_grid[gi], delta, exp.b_values[gi],
                                      exp.lambda_min, exp.lambda_max);
    }

    // least squares slope of log(median) on log(n)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto m = static_cast<double>(n_grid.size());
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const double lx = std::log(static_cast<double>(n_grid[gi]));
        const double ly = std::log(std::max(exp.median_error[gi], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    exp.fitted_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return exp;
}

}  // namespace dccamon
