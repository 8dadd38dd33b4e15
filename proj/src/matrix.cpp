#include "odd/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "odd/error.hpp"

namespace odd {

namespace {
bool finite_range(const std::vector<double>& xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}
}  // namespace

Vector Vector::from_data(std::vector<double> data) {
    if (!finite_range(data)) throw InvalidParams("Vector::from_data: non-finite entry");
    return Vector(std::move(data));
}

double Vector::dot(const Vector& other) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * other.v[i];
    return s;
}

double Vector::norm2() const { return std::sqrt(dot(*this)); }

double Vector::norm_inf() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vector& Vector::operator+=(const Vector& other) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.v[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& other) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.v[i];
    return *this;
}

Vector& Vector::scale(double c) {
    for (double& x : v) x *= c;
    return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double c, Vector a) { return a.scale(c); }

Matrix Matrix::from_data(std::size_t r, std::size_t c, std::vector<double> data) {
    if (data.size() != r * c) throw DimMismatch("Matrix::from_data: size != rows*cols");
    if (!finite_range(data)) throw InvalidParams("Matrix::from_data: non-finite entry");
    Matrix m;
    m.rows = r;
    m.cols = c;
    m.a = std::move(data);
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Vector Matrix::col(std::size_t j) const {
    Vector out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = at(i, j);
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
}

Vector Matrix::matvec(const Vector& x) const {
    if (x.dim() != cols) throw DimMismatch("matvec: dimension mismatch");
    Vector y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        const double* r = a.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector Matrix::matvec_transposed(const Vector& x) const {
    if (x.dim() != rows) throw DimMismatch("matvec_transposed: dimension mismatch");
    Vector y(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const double xi = x[i];
        const double* r = a.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) y[j] += r[j] * xi;
    }
    return y;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

bool Matrix::all_finite() const { return finite_range(a); }

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows) throw DimMismatch("matmul: inner dims differ");
    Matrix C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = B.a.data() + k * B.cols;
            double* crow = C.a.data() + i * C.cols;
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

}  // namespace odd
