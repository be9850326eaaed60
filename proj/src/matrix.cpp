#include "dccamon/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dccamon {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
    require(rows >= 0 && cols >= 0, "matrix dimensions must be nonnegative");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(rows >= 0 && cols >= 0, "matrix dimensions must be nonnegative");
    require(data_.size() == static_cast<std::size_t>(rows) * cols,
            "matrix data length does not match rows*cols");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::col(int c) const {
    std::vector<double> out(rows_);
    for (int r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Matrix::set_col(int c, std::span<const double> v) {
    require(static_cast<int>(v.size()) == rows_, "column length mismatch");
    for (int r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "shape mismatch in matrix product");
    Matrix c(a.rows(), b.cols());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    // saxpy order: row-major friendly and the inner loop vectorizes.
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int l = 0; l < k; ++l) {
            const double av = ai[l];
            if (av == 0.0) continue;
            const double* bl = b.row(l);
            for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
    return c;
}

Matrix multiply_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "shape mismatch in A*B^T");
    Matrix c(a.rows(), b.rows());
    const int k = a.cols();
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] = acc;
        }
    }
    return c;
}

Matrix multiply_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "shape mismatch in A^T*B");
    Matrix c(a.cols(), b.cols());
    const int n = b.cols();
    for (int l = 0; l < a.rows(); ++l) {
        const double* al = a.row(l);
        const double* bl = b.row(l);
        for (int i = 0; i < a.cols(); ++i) {
            const double av = al[i];
            if (av == 0.0) continue;
            double* ci = c.row(i);
            for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double x : a.data()) s += x * x;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double s = 0.0;
    for (double x : a.data()) s = std::max(s, std::abs(x));
    return s;
}

Matrix center_rows(const Matrix& a) {
    Matrix out = a;
    for (int i = 0; i < a.rows(); ++i) {
        double* r = out.row(i);
        double mean = std::accumulate(r, r + a.cols(), 0.0) / a.cols();
        for (int j = 0; j < a.cols(); ++j) r[j] -= mean;
    }
    return out;
}

SymEig sym_eig(const Matrix& m) {
    require(m.rows() == m.cols(), "sym_eig requires a square matrix");
    const int n = m.rows();
    const double scale = max_abs(m);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-8 * std::max(1.0, scale))
                throw std::invalid_argument("sym_eig requires a symmetric matrix");

    Matrix a = m;
    Matrix v = Matrix::identity(n);

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-30 * std::max(1.0, scale * scale)) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return diag[x] > diag[y]; });

    SymEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

namespace {

// Fills columns [filled, total) of u with vectors orthonormal to the ones
// already present, drawn from the canonical basis.
void complete_orthonormal(Matrix& u, int filled) {
    const int rows = u.rows();
    const int total = u.cols();
    int next_basis = 0;
    for (int j = filled; j < total; ++j) {
        while (true) {
            require(next_basis < rows, "orthonormal completion exhausted basis vectors");
            std::vector<double> cand(rows, 0.0);
            cand[next_basis++] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (int k = 0; k < j; ++k) {
                    double dot = 0.0;
                    for (int i = 0; i < rows; ++i) dot += cand[i] * u(i, k);
                    for (int i = 0; i < rows; ++i) cand[i] -= dot * u(i, k);
                }
            }
            double norm = 0.0;
            for (double x : cand) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 0.5) {
                for (int i = 0; i < rows; ++i) u(i, j) = cand[i] / norm;
                break;
            }
        }
    }
}

}  // namespace

Svd svd(const Matrix& m) {
    require(!m.empty(), "svd of an empty matrix");
    if (m.rows() < m.cols()) {
        Svd flipped = svd(transpose(m));
        return Svd{std::move(flipped.right), std::move(flipped.singulars),
                   std::move(flipped.left)};
    }
    // rows >= cols: Gram matrix on the small side.
    const int r = m.cols();
    SymEig eig = sym_eig(multiply_tn(m, m));
    Svd out;
    out.right = eig.eigenvectors;
    out.singulars.resize(r);
    double smax = 0.0;
    for (int i = 0; i < r; ++i) {
        out.singulars[i] = std::sqrt(std::max(eig.eigenvalues[i], 0.0));
        smax = std::max(smax, out.singulars[i]);
    }
    // the Gram route floors tiny singular values at ~sqrt(eps)*smax; columns
    // below that are noise and come from orthonormal completion instead
    const double cutoff = smax * 3e-8 * std::max(m.rows(), m.cols());
    out.left = Matrix(m.rows(), r);
    int filled = 0;
    for (int j = 0; j < r; ++j) {
        if (out.singulars[j] <= cutoff) break;
        for (int i = 0; i < m.rows(); ++i) {
            double acc = 0.0;
            const double* mi = m.row(i);
            for (int k = 0; k < r; ++k) acc += mi[k] * out.right(k, j);
            out.left(i, j) = acc / out.singulars[j];
        }
        ++filled;
    }
    complete_orthonormal(out.left, filled);
    return out;
}

Matrix centered_covariance(const Matrix& a, const Matrix& b, bool center) {
    require(a.cols() == b.cols(), "covariance inputs must have equal column counts");
    require(a.cols() >= 2, "covariance requires at least two observations");
    const Matrix ac = center ? center_rows(a) : a;
    const Matrix bc = center ? center_rows(b) : b;
    Matrix cov = multiply_nt(ac, bc);
    cov *= 1.0 / (a.cols() - 1);
    return cov;
}

Matrix inv_sqrt_spd(const Matrix& m, double ridge) {
    require(m.rows() == m.cols(), "inv_sqrt_spd requires a square matrix");
    require(ridge >= 0.0, "ridge must be nonnegative");
    Matrix shifted = m;
    for (int i = 0; i < m.rows(); ++i) shifted(i, i) += ridge;
    SymEig eig = sym_eig(shifted);
    const double lmax = eig.eigenvalues.front();
    const double lmin = eig.eigenvalues.back();
    if (lmin <= 0.0 || lmin < 1e-12 * lmax)
        throw DegenerateMatrixError("matrix is numerically singular after ridge (lambda_min " +
                                    std::to_string(lmin) + ")");
    const int n = m.rows();
    Matrix scaled = eig.eigenvectors;
    for (int j = 0; j < n; ++j) {
        const double f = 1.0 / std::sqrt(eig.eigenvalues[j]);
        for (int i = 0; i < n; ++i) scaled(i, j) *= f;
    }
    return multiply_nt(scaled, eig.eigenvectors);
}

Matrix sqrt_spd(const Matrix& m) {
    SymEig eig = sym_eig(m);
    const int n = m.rows();
    Matrix scaled = eig.eigenvectors;
    for (int j = 0; j < n; ++j) {
        const double f = std::sqrt(std::max(eig.eigenvalues[j], 0.0));
        for (int i = 0; i < n; ++i) scaled(i, j) *= f;
    }
    return multiply_nt(scaled, eig.eigenvectors);
}

double nuclear_norm(const Matrix& m) {
    require(m.all_finite(), "nuclear_norm requires finite entries");
    const Matrix gram =
        m.rows() >= m.cols() ? multiply_tn(m, m) : multiply_nt(m, m);
    SymEig eig = sym_eig(gram);
    double sum = 0.0;
    for (double l : eig.eigenvalues) sum += std::sqrt(std::max(l, 0.0));
    return sum;
}

double spectral_norm(const Matrix& m) {
    const Matrix gram =
        m.rows() >= m.cols() ? multiply_tn(m, m) : multiply_nt(m, m);
    SymEig eig = sym_eig(gram);
    return std::sqrt(std::max(eig.eigenvalues.front(), 0.0));
}

Matrix invert_small(const Matrix& m) {
    require(m.rows() == m.cols(), "invert_small requires a square matrix");
    const int n = m.rows();
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-14)
            throw DegenerateMatrixError("invert_small: matrix is singular");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(col, j), a(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        }
        const double d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

}  // namespace dccamon
