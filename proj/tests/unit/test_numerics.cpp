#include <doctest.h>

#include <cmath>

#include "atl/error.hpp"
#include "atl/matrix.hpp"
#include "atl/numerics.hpp"
#include "atl/rng.hpp"

using namespace atl;

TEST_SUITE("numerics") {

TEST_CASE("sigmoid symmetry point") { CHECK(sigmoid(0.0) == 0.5); }

TEST_CASE("sigmoid reflection identity") {
    CHECK(sigmoid(3.7) == doctest::Approx(1.0 - sigmoid(-3.7)).epsilon(1e-15));
}

TEST_CASE("sigmoid saturates without NaN") {
    CHECK(sigmoid(50.0) >= 1.0 - 1e-20);
    CHECK(sigmoid(-50.0) <= 1e-20);
    CHECK(std::isfinite(sigmoid(750.0)));
    CHECK(std::isfinite(sigmoid(-750.0)));
    CHECK(sigmoid(-750.0) >= 0.0);
}

TEST_CASE("sigmoid is monotone") {
    double prev = sigmoid(-20.0);
    for (double x = -19.5; x <= 20.0; x += 0.5) {
        const double s = sigmoid(x);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("finite differences on a quadratic") {
    const auto f = [](std::span<const double> t) {
        double s = 0.0;
        for (double v : t) s += v * v;
        return s;
    };
    const std::vector<double> theta{1.0, 2.0};
    const auto g = finite_diff_gradient(f, theta, 1e-5);
    CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("finite differences on a constant are zero") {
    const auto f = [](std::span<const double>) { return 3.25; };
    for (double gi : finite_diff_gradient(f, std::vector<double>{1.0, -2.0, 0.5}, 1e-5))
        CHECK(gi == 0.0);
}

TEST_CASE("finite differences on a sum are all ones") {
    const auto f = [](std::span<const double> t) {
        double s = 0.0;
        for (double v : t) s += v;
        return s;
    };
    for (double gi : finite_diff_gradient(f, std::vector<double>{0.3, -4.0, 7.7, 0.0}, 1e-5))
        CHECK(gi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("finite differences match analytic gradients of polynomials") {
    // f(t) = sum_i c_i t_i^3 - 2 t_0 t_1
    RngStream rng(11);
    std::vector<double> c(4), theta(4);
    for (std::size_t i = 0; i < 4; ++i) {
        c[i] = rng.uniform(-1.0, 1.0);
        theta[i] = rng.uniform(-1.0, 1.0);
    }
    const auto f = [&](std::span<const double> t) {
        double s = -2.0 * t[0] * t[1];
        for (std::size_t i = 0; i < 4; ++i) s += c[i] * t[i] * t[i] * t[i];
        return s;
    };
    const auto g = finite_diff_gradient(f, theta, 1e-5);
    for (std::size_t i = 0; i < 4; ++i) {
        double expected = 3.0 * c[i] * theta[i] * theta[i];
        if (i == 0) expected += -2.0 * theta[1];
        if (i == 1) expected += -2.0 * theta[0];
        CHECK(g[i] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("finite differences report non-finite evaluations") {
    const auto f = [](std::span<const double> t) { return std::log(t[0]); };
    CHECK_THROWS_AS(finite_diff_gradient(f, std::vector<double>{0.0}, 1e-5), NonFiniteValue);
}

TEST_CASE("init_weights is deterministic per seed") {
    RngStream a(7), b(7);
    CHECK(init_weights(3, 3, a) == init_weights(3, 3, b));
}

TEST_CASE("init_weights stays inside the fan bound") {
    RngStream rng(3);
    const Matrix w = init_weights(100, 100, rng);
    const double r = std::sqrt(6.0 / 200.0);
    CHECK(r == doctest::Approx(0.17320508).epsilon(1e-6));
    for (double v : w.values()) {
        CHECK(v >= -r);
        CHECK(v <= r);
    }
}

TEST_CASE("init_weights 1x1 bound is sqrt(3)") {
    RngStream rng(5);
    const Matrix w = init_weights(1, 1, rng);
    CHECK(std::abs(w(0, 0)) <= std::sqrt(3.0));
}

TEST_CASE("rng streams replay exactly and derive independently") {
    RngStream a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream base(9);
    RngStream c1 = base.derive(1);
    base.next_u64();  // advancing the parent must not affect derivation
    RngStream c2 = base.derive(1);
    CHECK(c1.next_u64() == c2.next_u64());
    CHECK(RngStream(9).derive(1).next_u64() != RngStream(9).derive(2).next_u64());
}

TEST_CASE("rng unit draws stay in [0,1) and bernoulli respects edge cases") {
    RngStream rng(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK_FALSE(rng.bernoulli(0.0));
}

TEST_CASE("shuffle is a permutation and deterministic") {
    RngStream a(17), b(17);
    auto ia = iota_indices(50), ib = iota_indices(50);
    shuffle_indices(ia, a);
    shuffle_indices(ib, b);
    CHECK(ia == ib);
    auto sorted = ia;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == iota_indices(50));
}

}

TEST_SUITE("matrix") {

TEST_CASE("multiply matches a hand computation") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
    const Matrix c = multiply(a, b);
    CHECK(c(0, 0) == 19);
    CHECK(c(0, 1) == 22);
    CHECK(c(1, 0) == 43);
    CHECK(c(1, 1) == 50);
}

TEST_CASE("transposed products agree with explicit transposes") {
    RngStream rng(1);
    Matrix a(3, 4), b(5, 4), c(3, 5);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(-1, 1);

    const Matrix abt = multiply_abt(a, b);  // 3x5
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(j, k);
            CHECK(abt(i, j) == doctest::Approx(s).epsilon(1e-14));
        }

    const Matrix atb = multiply_atb(a, c);  // 4x5
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) s += a(k, i) * c(k, j);
            CHECK(atb(i, j) == doctest::Approx(s).epsilon(1e-14));
        }
}

TEST_CASE("shape mismatches are rejected, never broadcast") {
    const Matrix a(2, 3), b(2, 3);
    CHECK_THROWS_AS(multiply(a, b), ShapeMismatch);
    CHECK_THROWS_AS(multiply_abt(a, Matrix(2, 4)), ShapeMismatch);
    CHECK_THROWS_AS(multiply_atb(a, Matrix(3, 3)), ShapeMismatch);
    CHECK_THROWS_AS(hadamard(a, Matrix(3, 2)), ShapeMismatch);
    Matrix m(2, 3);
    const std::vector<double> v{1.0, 2.0};
    CHECK_THROWS_AS(add_row_vector(m, v), ShapeMismatch);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), DataError);
}

TEST_CASE("hcat and slicing") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{5}, {6}});
    const Matrix parts[2] = {a, b};
    const Matrix c = hcat(parts);
    CHECK(c.cols() == 3);
    CHECK(c(1, 2) == 6);
    const Matrix s = slice_rows(c, 1, 2);
    CHECK(s.rows() == 1);
    CHECK(s(0, 0) == 3);
    const std::vector<std::size_t> idx{1, 0, 1};
    const Matrix g = gather_rows(c, idx);
    CHECK(g.rows() == 3);
    CHECK(g(0, 0) == 3);
    CHECK(g(1, 0) == 1);
}

}
