#include "atl/matrix.hpp"

#include <cmath>
#include <cstring>

#include "atl/error.hpp"

namespace atl {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_)
        throw DataError("matrix data length " + std::to_string(data_.size()) +
                        " does not equal rows*cols = " + std::to_string(rows_ * cols_));
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw ShapeMismatch(m.rows_, m.cols_, rows.size(), r.size(), "from_rows");
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw ShapeMismatch(rows_, cols_, other.rows_, other.cols_, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) throw ShapeMismatch(rows_, cols_, other.rows_, other.cols_, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double scalar) {
    for (double& v : data_) v *= scalar;
    return *this;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeMismatch(a.rows(), a.cols(), b.rows(), b.cols(), "multiply");
    Matrix c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.data() + i * n;
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.data() + k * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix multiply_abt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw ShapeMismatch(a.rows(), a.cols(), b.rows(), b.cols(), "multiply_abt");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.data() + i * a.cols();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = b.data() + j * b.cols();
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            c(i, j) = s;
        }
    }
    return c;
}

Matrix multiply_atb(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeMismatch(a.rows(), a.cols(), b.rows(), b.cols(), "multiply_atb");
    Matrix c(a.cols(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* ar = a.data() + r * a.cols();
        const double* br = b.data() + r * n;
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double ari = ar[i];
            if (ari == 0.0) continue;
            double* ci = c.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ari * br[j];
        }
    }
    return c;
}

std::vector<double> multiply_vec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size())
        throw ShapeMismatch(a.rows(), a.cols(), x.size(), 1, "multiply_vec");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.data() + i * a.cols();
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
        y[i] = s;
    }
    return y;
}

std::vector<double> multiply_tvec(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size())
        throw ShapeMismatch(a.rows(), a.cols(), x.size(), 1, "multiply_tvec");
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* ai = a.data() + i * a.cols();
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * ai[j];
    }
    return y;
}

void add_row_vector(Matrix& m, std::span<const double> v) {
    if (v.size() != m.cols())
        throw ShapeMismatch(m.rows(), m.cols(), 1, v.size(), "add_row_vector");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* mi = m.data() + i * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) mi[j] += v[j];
    }
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* mi = m.data() + i * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) s[j] += mi[j];
    }
    return s;
}

std::vector<double> column_means(const Matrix& m) {
    if (m.rows() == 0) throw EmptyInput("column_means");
    std::vector<double> s = column_sums(m);
    for (double& v : s) v /= static_cast<double>(m.rows());
    return s;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch(a.rows(), a.cols(), b.rows(), b.cols(), "hadamard");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ShapeMismatch(a.rows(), a.cols(), b.rows(), b.cols(), "subtract");
    Matrix c = a;
    c -= b;
    return c;
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
    if (!y.same_shape(x)) throw ShapeMismatch(y.rows(), y.cols(), x.rows(), x.cols(), "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += alpha * x.data()[i];
}

void axpy(std::vector<double>& y, double alpha, std::span<const double> x) {
    if (y.size() != x.size()) throw LengthMismatch(y.size(), x.size(), "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double sum_squares(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
    return s;
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t end) {
    if (begin > end || end > m.rows())
        throw DataError("slice_rows: range [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") out of bounds for " + std::to_string(m.rows()) +
                        " rows");
    Matrix out(end - begin, m.cols());
    std::memcpy(out.data(), m.data() + begin * m.cols(),
                (end - begin) * m.cols() * sizeof(double));
    return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const double* src = m.data() + idx[r] * m.cols();
        std::memcpy(out.data() + r * m.cols(), src, m.cols() * sizeof(double));
    }
    return out;
}

Matrix hcat(std::span<const Matrix> parts) {
    if (parts.empty()) throw EmptyInput("hcat");
    std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const Matrix& p : parts) {
        if (p.rows() != rows)
            throw ShapeMismatch(rows, p.cols(), p.rows(), p.cols(), "hcat");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        double* dst = out.data() + i * cols;
        for (const Matrix& p : parts) {
            std::memcpy(dst, p.data() + i * p.cols(), p.cols() * sizeof(double));
            dst += p.cols();
        }
    }
    return out;
}

}  // namespace atl
