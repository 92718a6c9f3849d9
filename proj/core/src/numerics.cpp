#include "atl/numerics.hpp"

#include <cmath>

#include "atl/error.hpp"

namespace atl {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void sigmoid_inplace(Matrix& m) {
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = sigmoid(p[i]);
}

std::vector<double> finite_diff_gradient(const ScalarFn& f, std::span<const double> theta,
                                         double h) {
    if (h <= 0.0) throw DataError("finite_diff_gradient: step h must be positive");
    std::vector<double> point(theta.begin(), theta.end());
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + h;
        const double plus = f(point);
        point[i] = saved - h;
        const double minus = f(point);
        point[i] = saved;
        if (!std::isfinite(plus) || !std::isfinite(minus))
            throw NonFiniteValue("finite_diff_gradient at component " + std::to_string(i));
        grad[i] = (plus - minus) / (2.0 * h);
    }
    return grad;
}

Matrix init_weights(std::size_t rows, std::size_t cols, RngStream& rng) {
    if (rows == 0 || cols == 0) throw DataError("init_weights: rows and cols must be >= 1");
    const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-r, r);
    return m;
}

}  // namespace atl
