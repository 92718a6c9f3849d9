#pragma once

#include <functional>
#include <span>
#include <vector>

#include "atl/matrix.hpp"
#include "atl/rng.hpp"

namespace atl {

/// Logistic sigmoid 1 / (1 + e^-x). Saturates to 0 or 1 at the extremes and
/// never produces NaN for finite input.
double sigmoid(double x);

void sigmoid_inplace(Matrix& m);

/// Derivative of the sigmoid given its output s: s * (1 - s).
inline double sigmoid_grad_from_output(double s) { return s * (1.0 - s); }

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(x + h e_i) - f(x - h e_i)) / 2h.
/// Throws NonFiniteValue naming the offending component when f evaluates to
/// NaN or infinity.
std::vector<double> finite_diff_gradient(const ScalarFn& f, std::span<const double> theta,
                                         double h);

/// Weight matrix with entries uniform in [-r, r], r = sqrt(6 / (rows + cols)).
Matrix init_weights(std::size_t rows, std::size_t cols, RngStream& rng);

}  // namespace atl
