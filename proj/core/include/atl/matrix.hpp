#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace atl {

/// Dense row-major matrix of 64-bit floats. Shape checks are strict: every
/// binary operation rejects mismatched operands, nothing broadcasts silently.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double scalar);

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a (m x k) times b (k x n).
Matrix multiply(const Matrix& a, const Matrix& b);
/// a (m x k) times b-transpose, b given as (n x k).
Matrix multiply_abt(const Matrix& a, const Matrix& b);
/// a-transpose times b, a given as (m x k), b as (m x n); result (k x n).
Matrix multiply_atb(const Matrix& a, const Matrix& b);

/// a (m x n) times x (length n).
std::vector<double> multiply_vec(const Matrix& a, std::span<const double> x);
/// a-transpose (n x m) times x (length m), a given as (m x n).
std::vector<double> multiply_tvec(const Matrix& a, std::span<const double> x);

/// Adds v to every row of m; v length must equal m.cols().
void add_row_vector(Matrix& m, std::span<const double> v);

std::vector<double> column_sums(const Matrix& m);
std::vector<double> column_means(const Matrix& m);

Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);

/// y += alpha * x, in place.
void axpy(Matrix& y, double alpha, const Matrix& x);
void axpy(std::vector<double>& y, double alpha, std::span<const double> x);

double sum_squares(const Matrix& m);

/// Copy of rows [begin, end).
Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t end);

/// Copy of the given rows, in order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx);

/// Column-wise concatenation; all parts must share a row count.
Matrix hcat(std::span<const Matrix> parts);

}  // namespace atl
