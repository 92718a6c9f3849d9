#include <benchmark/benchmark.h>

#include "atl/autoencoder.hpp"
#include "atl/dbn.hpp"
#include "atl/features.hpp"
#include "atl/numerics.hpp"

using namespace atl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = 0.05,
                     double hi = 0.95) {
    RngStream rng(seed);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

void BM_MatrixMultiplyAbt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(n, 124, 1);
    const Matrix b = random_matrix(64, 124, 2);
    for (auto _ : state) {
        Matrix c = multiply_abt(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MatrixMultiplyAbt)->Arg(64)->Arg(512)->Arg(2880);

void BM_AeGradients(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    RngStream rng(3);
    SparseAeLayer layer;
    layer.w_enc = init_weights(64, 124, rng);
    layer.b_enc.assign(64, 0.0);
    layer.w_dec = init_weights(124, 64, rng);
    layer.b_dec.assign(124, 0.0);
    layer.l2_coeff = 3e-5;
    layer.sparsity_coeff = 4.0;
    layer.sparsity_target = 0.15;
    const Matrix x = random_matrix(batch, 124, 4);
    for (auto _ : state) {
        AeGradients g = ae_gradients(layer, x);
        benchmark::DoNotOptimize(g.w_enc.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AeGradients)->Arg(16)->Arg(64)->Arg(256);

void BM_CdUpdate(benchmark::State& state) {
    const auto batch_rows = static_cast<std::size_t>(state.range(0));
    RngStream rng(5);
    Rbm rbm;
    rbm.w = init_weights(64, 127, rng);
    rbm.visible_bias.assign(127, 0.0);
    rbm.hidden_bias.assign(64, 0.0);
    CdVelocity velocity = CdVelocity::zeros(rbm);
    const Matrix batch = random_matrix(batch_rows, 127, 6, 0.0, 1.0);
    const CdOptions opt{1, 0.001, 0.01, false};
    for (auto _ : state) {
        rbm_cd_update(rbm, batch, opt, velocity, rng);
        benchmark::DoNotOptimize(rbm.w.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CdUpdate)->Arg(10)->Arg(64);

void BM_MutualInformation(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    RngStream rng(7);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.next_unit();
        y[i] = 0.5 * x[i] + 0.5 * rng.next_unit();
    }
    for (auto _ : state) {
        const double mi = mutual_information(x, y, 16);
        benchmark::DoNotOptimize(mi);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MutualInformation)->Arg(1024)->Arg(14400);

void BM_Sigmoid(benchmark::State& state) {
    Matrix m = random_matrix(256, 124, 8, -6.0, 6.0);
    for (auto _ : state) {
        Matrix copy = m;
        sigmoid_inplace(copy);
        benchmark::DoNotOptimize(copy.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.size()));
}
BENCHMARK(BM_Sigmoid);

}  // namespace

BENCHMARK_MAIN();
