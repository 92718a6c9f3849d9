#include <doctest.h>

#include <cmath>

#include "atl/autoencoder.hpp"
#include "atl/error.hpp"
#include "atl/numerics.hpp"
#include "atl/oracle.hpp"

using namespace atl;

namespace {

SparseAeLayer zero_layer(std::size_t input, std::size_t hidden, double p = 0.1) {
    SparseAeLayer layer;
    layer.w_enc = Matrix(hidden, input);
    layer.b_enc.assign(hidden, 0.0);
    layer.w_dec = Matrix(input, hidden);
    layer.b_dec.assign(input, 0.0);
    layer.sparsity_target = p;
    return layer;
}

SparseAeLayer random_layer(std::size_t input, std::size_t hidden, std::uint64_t seed,
                           double lambda, double beta, double p) {
    RngStream rng(seed);
    SparseAeLayer layer;
    layer.w_enc = init_weights(hidden, input, rng);
    layer.b_enc.resize(hidden);
    for (double& b : layer.b_enc) b = rng.uniform(-0.5, 0.5);
    layer.w_dec = init_weights(input, hidden, rng);
    layer.b_dec.resize(input);
    for (double& b : layer.b_dec) b = rng.uniform(-0.5, 0.5);
    layer.l2_coeff = lambda;
    layer.sparsity_coeff = beta;
    layer.sparsity_target = p;
    return layer;
}

Matrix random_input(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    RngStream rng(seed);
    Matrix x(rows, cols);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(0.05, 0.95);
    return x;
}

Matrix fixture_manifold(std::size_t rows, std::uint64_t seed) {
    // 2-D linear manifold embedded in 6-D, squashed into (0,1)
    RngStream rng(seed);
    Matrix x(rows, 6);
    for (std::size_t i = 0; i < rows; ++i) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        for (std::size_t j = 0; j < 6; ++j)
            x(i, j) = sigmoid(0.8 * a * static_cast<double>(j + 1) / 6.0 -
                              0.6 * b * static_cast<double>(5 - j) / 6.0);
    }
    return x;
}

}  // namespace

TEST_SUITE("autoencoder") {

TEST_CASE("zero parameters map everything to one half") {
    const SparseAeLayer layer = zero_layer(4, 3);
    const AeForward f = ae_forward(layer, random_input(5, 4, 1));
    for (double h : f.hidden.values()) CHECK(h == 0.5);
    for (double r : f.recon.values()) CHECK(r == 0.5);
}

TEST_CASE("single-unit encoder forward value") {
    SparseAeLayer layer = zero_layer(2, 1);
    layer.w_enc(0, 0) = 1.0;
    layer.w_enc(0, 1) = 1.0;
    const Matrix x = Matrix::from_rows({{0.0, 0.0}});
    CHECK(ae_forward(layer, x).hidden(0, 0) == 0.5);
}

TEST_CASE("activations always live in (0,1)") {
    const SparseAeLayer layer = random_layer(6, 9, 2, 1e-5, 4.0, 0.1);
    const AeForward f = ae_forward(layer, random_input(12, 6, 3));
    for (double h : f.hidden.values()) {
        CHECK(h > 0.0);
        CHECK(h < 1.0);
    }
    for (double r : f.recon.values()) {
        CHECK(r > 0.0);
        CHECK(r < 1.0);
    }
}

TEST_CASE("loss on zero params and zero input matches the closed form") {
    const SparseAeLayer layer = zero_layer(2, 3, 0.1);
    const Matrix x(1, 2, 0.0);
    const AeLoss loss = ae_loss(layer, x);
    CHECK(loss.mse == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(loss.weight_penalty == 0.0);
    // every hidden mean is sigmoid(0) = 0.5
    const double kl_unit = 0.1 * std::log(0.1 / 0.5) + 0.9 * std::log(0.9 / 0.5);
    CHECK(kl_unit == doctest::Approx(0.3681).epsilon(1e-3));
    CHECK(loss.sparsity_penalty == doctest::Approx(3.0 * kl_unit).epsilon(1e-15));
}

TEST_CASE("sparsity penalty vanishes when means hit the target") {
    // With a huge negative encoder bias the mean activation approaches 0; we
    // instead check the direct statement: KL(p||p) = 0 via a scalar sweep.
    const double p = 0.15;
    auto kl = [&](double pi) {
        return p * std::log(p / pi) + (1.0 - p) * std::log((1.0 - p) / (1.0 - pi));
    };
    CHECK(kl(p) == 0.0);
    // strictly increasing as |p - pi| grows, on both sides
    double prev = 0.0;
    for (double d = 0.01; d < 0.14; d += 0.01) {
        CHECK(kl(p + d) > prev);
        prev = kl(p + d);
    }
    prev = 0.0;
    for (double d = 0.01; d < 0.14; d += 0.01) {
        CHECK(kl(p - d) > prev);
        prev = kl(p - d);
    }
}

TEST_CASE("loss decomposition is exact as accumulated") {
    const SparseAeLayer layer = random_layer(5, 7, 4, 3e-5, 4.0, 0.15);
    const Matrix x = random_input(9, 5, 5);
    const AeLoss loss = ae_loss(layer, x);
    CHECK(loss.total - (loss.mse + layer.l2_coeff * loss.weight_penalty +
                        layer.sparsity_coeff * loss.sparsity_penalty) == 0.0);
}

TEST_CASE("all-zero weights give zero weight penalty") {
    const SparseAeLayer layer = zero_layer(3, 2);
    CHECK(ae_loss(layer, random_input(4, 3, 6)).weight_penalty == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
    const auto report = oracle::check_ae_gradients(6, 77);
    CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("weight-penalty gradient alone is lambda times the weight") {
    SparseAeLayer with = random_layer(4, 3, 7, 0.05, 0.0, 0.1);
    SparseAeLayer without = with;
    without.l2_coeff = 0.0;
    const Matrix x = random_input(6, 4, 8);
    const AeGradients g_with = ae_gradients(with, x);
    const AeGradients g_without = ae_gradients(without, x);
    for (std::size_t i = 0; i < g_with.w_enc.size(); ++i)
        CHECK(g_with.w_enc.data()[i] - g_without.w_enc.data()[i] ==
              doctest::Approx(0.05 * with.w_enc.data()[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < g_with.w_dec.size(); ++i)
        CHECK(g_with.w_dec.data()[i] - g_without.w_dec.data()[i] ==
              doctest::Approx(0.05 * with.w_dec.data()[i]).epsilon(1e-12));
}

TEST_CASE("the sparsity gradient is linear in beta") {
    SparseAeLayer beta0 = random_layer(5, 4, 9, 0.0, 0.0, 0.1);
    SparseAeLayer beta1 = beta0;
    beta1.sparsity_coeff = 1.0;
    SparseAeLayer beta2 = beta0;
    beta2.sparsity_coeff = 2.0;
    const Matrix x = random_input(7, 5, 10);
    const AeGradients g0 = ae_gradients(beta0, x);
    const AeGradients g1 = ae_gradients(beta1, x);
    const AeGradients g2 = ae_gradients(beta2, x);
    for (std::size_t i = 0; i < g0.w_enc.size(); ++i) {
        const double d1 = g1.w_enc.data()[i] - g0.w_enc.data()[i];
        const double d2 = g2.w_enc.data()[i] - g0.w_enc.data()[i];
        CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-9));
    }
}

TEST_CASE("pretraining reduces reconstruction error on a manifold") {
    const Matrix x = fixture_manifold(64, 11);
    AeLayerConfig cfg{4, 200, 1e-5, 1.0, 0.15};
    RngStream rng(12);
    SparseAeLayer init;
    {
        RngStream init_rng(12);
        init.w_enc = init_weights(4, 6, init_rng);
        init.b_enc.assign(4, 0.0);
        init.w_dec = init_weights(6, 4, init_rng);
        init.b_dec.assign(6, 0.0);
        init.l2_coeff = cfg.l2_coeff;
        init.sparsity_coeff = cfg.sparsity_coeff;
        init.sparsity_target = cfg.sparsity_target;
    }
    const double before = ae_loss(init, x).mse;
    const SparseAeLayer trained = ae_pretrain(x, cfg, 16, 0.05, rng);
    CHECK(ae_loss(trained, x).mse < before);
}

TEST_CASE("zero learning rate leaves parameters at their initialization") {
    const Matrix x = random_input(20, 5, 13);
    AeLayerConfig cfg{3, 10, 1e-5, 4.0, 0.1};
    RngStream rng_a(14), rng_b(14);
    const SparseAeLayer trained = ae_pretrain(x, cfg, 8, 0.0, rng_a);
    SparseAeLayer expected;
    expected.w_enc = init_weights(3, 5, rng_b);
    expected.b_enc.assign(3, 0.0);
    expected.w_dec = init_weights(5, 3, rng_b);
    expected.b_dec.assign(5, 0.0);
    CHECK(trained.w_enc == expected.w_enc);
    CHECK(trained.w_dec == expected.w_dec);
    CHECK(trained.b_enc == expected.b_enc);
    CHECK(trained.b_dec == expected.b_dec);
}

TEST_CASE("pretraining is bit-deterministic per seed") {
    const Matrix x = random_input(30, 4, 15);
    AeLayerConfig cfg{3, 15, 1e-5, 4.0, 0.1};
    RngStream a(16), b(16);
    const SparseAeLayer la = ae_pretrain(x, cfg, 8, 0.01, a);
    const SparseAeLayer lb = ae_pretrain(x, cfg, 8, 0.01, b);
    CHECK(la.w_enc == lb.w_enc);
    CHECK(la.b_enc == lb.b_enc);
    CHECK(la.w_dec == lb.w_dec);
    CHECK(la.b_dec == lb.b_dec);
}

TEST_CASE("stacking chains layer shapes") {
    const Matrix x = random_input(40, 10, 17);
    AeTrainConfig cfg;
    cfg.layers = {{8, 3, 1e-5, 1.0, 0.15}, {4, 3, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 16;
    RngStream rng(18);
    const auto layers = stack_pretrain(x, cfg, rng);
    REQUIRE(layers.size() == 2);
    CHECK(layers[0].input_width() == 10);
    CHECK(layers[0].hidden_width() == 8);
    CHECK(layers[1].input_width() == 8);
    CHECK(layers[1].hidden_width() == 4);
}

TEST_CASE("the second layer trains on the first layer's hidden output") {
    const Matrix x = random_input(25, 6, 19);
    AeTrainConfig cfg;
    cfg.layers = {{5, 4, 1e-5, 1.0, 0.15}, {3, 4, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 8;
    RngStream a(20);
    const auto layers = stack_pretrain(x, cfg, a);

    RngStream b(20);
    const SparseAeLayer first = ae_pretrain(x, cfg.layers[0], 8, cfg.learning_rate, b);
    CHECK(first.w_enc == layers[0].w_enc);
    const Matrix hidden = ae_forward(first, x).hidden;
    const SparseAeLayer second = ae_pretrain(hidden, cfg.layers[1], 8, cfg.learning_rate, b);
    CHECK(second.w_enc == layers[1].w_enc);
}

TEST_CASE("single-width stack equals plain pretraining") {
    const Matrix x = random_input(20, 5, 21);
    AeTrainConfig cfg;
    cfg.layers = {{4, 5, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 8;
    RngStream a(22), b(22);
    const auto stack = stack_pretrain(x, cfg, a);
    const SparseAeLayer lone = ae_pretrain(x, cfg.layers[0], 8, cfg.learning_rate, b);
    CHECK(stack.size() == 1);
    CHECK(stack[0].w_enc == lone.w_enc);
}

TEST_CASE("zero fine-tune epochs leave the zero head predicting zero") {
    const Matrix x = random_input(30, 6, 23);
    std::vector<double> y(30, 0.4);
    AeTrainConfig cfg;
    cfg.layers = {{4, 2, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 8;
    cfg.finetune_epochs = 0;
    RngStream rng(24);
    const auto layers = stack_pretrain(x, cfg, rng);
    const StackedSparseRegressor model = stack_finetune(layers, x, y, cfg, rng, {});
    for (double p : predict(model, x)) CHECK(p == 0.0);
    CHECK(model.provenance.parent_model_id.empty());
}

TEST_CASE("fine-tuning beats the zero head on the training set") {
    const Matrix x = fixture_manifold(64, 25);
    std::vector<double> y(64);
    for (std::size_t i = 0; i < 64; ++i) y[i] = 0.3 * x(i, 0) + 0.5 * x(i, 3);
    AeTrainConfig cfg;
    cfg.layers = {{5, 10, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 16;
    cfg.finetune_epochs = 60;
    cfg.learning_rate = 0.05;
    RngStream rng(26);
    const auto layers = stack_pretrain(x, cfg, rng);
    const StackedSparseRegressor model = stack_finetune(layers, x, y, cfg, rng, {});
    double zero_mse = 0.0;
    for (double v : y) zero_mse += v * v;
    zero_mse /= static_cast<double>(y.size());
    CHECK(training_mse(model, x, y) < zero_mse);
}

TEST_CASE("finetune_from with zero epochs copies the parent") {
    const Matrix x = random_input(20, 4, 27);
    std::vector<double> y(20, 0.5);
    AeTrainConfig cfg;
    cfg.layers = {{3, 3, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 8;
    cfg.finetune_epochs = 5;
    RngStream rng(28);
    const auto layers = stack_pretrain(x, cfg, rng);
    const StackedSparseRegressor parent =
        stack_finetune(layers, x, y, cfg, rng, {.model_id = "p", .farm_id = "f", .window = "w"});

    RngStream frng(29);
    const StackedSparseRegressor child = finetune_from(
        parent, x, y, {.epochs = 0}, frng, {.model_id = "c", .farm_id = "f", .window = "w2"});
    CHECK(child.same_parameters(parent));
    CHECK(child.provenance.parent_model_id == "p");
    CHECK(child.provenance.model_id == "c");
}

TEST_CASE("finetune_from trains the child and leaves the parent untouched") {
    const Matrix x = fixture_manifold(40, 30);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = x(i, 1);
    AeTrainConfig cfg;
    cfg.layers = {{4, 4, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 8;
    cfg.finetune_epochs = 10;
    RngStream rng(31);
    const auto layers = stack_pretrain(x, cfg, rng);
    const StackedSparseRegressor parent = stack_finetune(layers, x, y, cfg, rng, {.model_id = "p"});
    const StackedSparseRegressor snapshot = parent;

    RngStream frng(32);
    const StackedSparseRegressor child =
        finetune_from(parent, x, y, {.epochs = 20, .batch_size = 8, .learning_rate = 0.05}, frng,
                      {.model_id = "c"});
    CHECK(parent.same_parameters(snapshot));
    CHECK_FALSE(child.same_parameters(parent));
    CHECK(child.layers.size() == parent.layers.size());
    for (std::size_t l = 0; l < child.layers.size(); ++l) {
        CHECK(child.layers[l].w.rows() == parent.layers[l].w.rows());
        CHECK(child.layers[l].w.cols() == parent.layers[l].w.cols());
    }
}

TEST_CASE("finetune_from rejects foreign widths") {
    const Matrix x = random_input(10, 4, 33);
    std::vector<double> y(10, 0.1);
    AeTrainConfig cfg;
    cfg.layers = {{3, 2, 1e-5, 1.0, 0.1}};
    cfg.finetune_epochs = 0;
    RngStream rng(34);
    const auto layers = stack_pretrain(x, cfg, rng);
    const StackedSparseRegressor model = stack_finetune(layers, x, y, cfg, rng, {});
    const Matrix wrong = random_input(10, 5, 35);
    RngStream frng(36);
    CHECK_THROWS_AS(finetune_from(model, wrong, y, {.epochs = 1}, frng, {}), WidthMismatch);
    CHECK_THROWS_AS(predict(model, wrong), WidthMismatch);
}

TEST_CASE("an input adapter bridges foreign widths and trains jointly") {
    const Matrix x = random_input(30, 4, 37);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = x(i, 0);
    AeTrainConfig cfg;
    cfg.layers = {{3, 3, 1e-5, 1.0, 0.1}};
    cfg.batch_size = 8;
    cfg.finetune_epochs = 5;
    RngStream rng(38);
    const auto layers = stack_pretrain(x, cfg, rng);
    const StackedSparseRegressor model = stack_finetune(layers, x, y, cfg, rng, {.model_id = "m"});

    RngStream arng(39);
    const StackedSparseRegressor adapted = with_input_adapter(model, 7, arng);
    CHECK(adapted.input_width() == 7);
    const Matrix foreign = random_input(30, 7, 40);
    CHECK(predict(adapted, foreign).size() == 30);
    RngStream frng(41);
    const StackedSparseRegressor tuned = finetune_from(
        adapted, foreign, y, {.epochs = 5, .batch_size = 8, .learning_rate = 0.02}, frng, {});
    CHECK(tuned.adapter.has_value());
    CHECK_FALSE(tuned.adapter->w == adapted.adapter->w);
}

TEST_CASE("permuting prediction rows permutes the outputs") {
    const Matrix x = random_input(12, 5, 42);
    AeTrainConfig cfg;
    cfg.layers = {{4, 3, 1e-5, 1.0, 0.1}};
    cfg.finetune_epochs = 4;
    cfg.batch_size = 4;
    RngStream rng(43);
    const auto layers = stack_pretrain(x, cfg, rng);
    std::vector<double> y(12, 0.2);
    const StackedSparseRegressor model = stack_finetune(layers, x, y, cfg, rng, {});

    const std::vector<double> direct = predict(model, x);
    std::vector<std::size_t> perm{5, 2, 9, 0, 11, 3, 7, 1, 10, 4, 8, 6};
    const std::vector<double> permuted = predict(model, gather_rows(x, perm));
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i] == direct[perm[i]]);

    const std::vector<double> single = predict(model, slice_rows(x, 3, 4));
    CHECK(single.size() == 1);
    CHECK(single[0] == direct[3]);
}

TEST_CASE("diverging training is reported") {
    // A huge learning rate with weight decay in the loss blows the L2 term up
    // past the divergence threshold within a few batches.
    const Matrix x = random_input(16, 4, 44);
    AeLayerConfig cfg{4, 400, 0.1, 0.0, 0.1};
    RngStream rng(45);
    CHECK_THROWS_AS(ae_pretrain(x, cfg, 16, 1e6, rng), DivergedLoss);
}

}
