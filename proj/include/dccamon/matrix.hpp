#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dccamon {

/// Thrown when a matrix that must be (numerically) positive definite is not,
/// e.g. a collapsed window covariance. Callers that can recover (the online
/// monitor) catch this specific type; everything else lets it propagate.
class DegenerateMatrixError : public std::runtime_error {
public:
    explicit DegenerateMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense real matrix, row-major, double precision.
/// Sized for desk-scale work (dimensions up to a few thousand).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);
    Matrix(int rows, int cols, std::vector<double> data);

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
    double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    std::vector<double> col(int c) const;
    void set_col(int c, std::span<const double> v);

    bool all_finite() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);

/// a * b^T without forming the transpose.
Matrix multiply_nt(const Matrix& a, const Matrix& b);
/// a^T * b without forming the transpose.
Matrix multiply_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

/// Subtracts each row's mean from that row.
Matrix center_rows(const Matrix& a);

/// Symmetric eigendecomposition, eigenvalues sorted descending.
/// eigenvectors holds the corresponding orthonormal vectors as columns.
struct SymEig {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

/// Cyclic Jacobi rotations. Input must be symmetric (checked up to a small
/// relative tolerance). Deterministic; intended for dimensions up to ~64.
SymEig sym_eig(const Matrix& m);

/// m = left * diag(singulars) * right^T with singulars descending.
struct Svd {
    Matrix left;
    std::vector<double> singulars;
    Matrix right;
};

/// SVD computed from the eigendecomposition of the smaller Gram matrix,
/// with orthonormal completion for (near-)zero singular values.
Svd svd(const Matrix& m);

/// Sample (cross-)covariance (1/(n-1)) A_c B_c^T; rows are variables,
/// columns are paired observations. Centering is per row when enabled.
Matrix centered_covariance(const Matrix& a, const Matrix& b, bool center);

/// (m + ridge*I)^{-1/2} for symmetric positive definite m. Throws
/// DegenerateMatrixError when the smallest eigenvalue after the ridge falls
/// below the positivity floor 1e-12 * lambda_max.
Matrix inv_sqrt_spd(const Matrix& m, double ridge);

/// m^{1/2} for symmetric positive semidefinite m (eigenvalues clamped at 0).
Matrix sqrt_spd(const Matrix& m);

/// Sum of singular values.
double nuclear_norm(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Inverse of a small square matrix by Gauss-Jordan with partial pivoting.
Matrix invert_small(const Matrix& m);

}  // namespace dccamon
