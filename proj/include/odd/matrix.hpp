#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace odd {

/// Dense vector of 64-bit floats.
struct Vector {
    std::vector<double> v;

    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0) : v(dim, fill) {}
    explicit Vector(std::vector<double> data) : v(std::move(data)) {}

    /// Construction from external data; rejects NaN/Inf entries.
    static Vector from_data(std::vector<double> data);

    std::size_t dim() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    double dot(const Vector& other) const;
    double norm2() const;
    double norm_inf() const;

    Vector& operator+=(const Vector& other);
    Vector& operator-=(const Vector& other);
    Vector& scale(double c);
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double c, Vector a);

/// Dense row-major matrix of 64-bit floats.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major, a.size() == rows * cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    /// Construction from external data; rejects NaN/Inf entries and requires
    /// data.size() == r * c.
    static Matrix from_data(std::size_t r, std::size_t c, std::vector<double> data);
    static Matrix identity(std::size_t n);

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    std::span<const double> row(std::size_t i) const { return {a.data() + i * cols, cols}; }
    std::span<double> row(std::size_t i) { return {a.data() + i * cols, cols}; }

    Vector col(std::size_t j) const;
    Matrix transpose() const;

    /// y = M x
    Vector matvec(const Vector& x) const;
    /// y = M^T x
    Vector matvec_transposed(const Vector& x) const;

    double max_abs() const;
    bool all_finite() const;
};

Matrix matmul(const Matrix& A, const Matrix& B);

}  // namespace odd
