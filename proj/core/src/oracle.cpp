#include "atl/oracle.hpp"

#include <cmath>

#include "atl/autoencoder.hpp"
#include "atl/error.hpp"
#include "atl/numerics.hpp"

namespace atl {
namespace oracle {

NaiveMetrics naive_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw LengthMismatch(actual.size(), predicted.size(), "naive_metrics");
    if (actual.empty()) throw EmptyInput("naive_metrics");
    const std::size_t m = actual.size();

    NaiveMetrics out;
    double sq = 0.0, ab = 0.0, err_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = actual[i] - predicted[i];
        sq += e * e;
        ab += std::abs(e);
        err_sum += e;
    }
    out.rmse = std::sqrt(sq / static_cast<double>(m));
    out.mae = ab / static_cast<double>(m);

    const double err_mean = err_sum / static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = (actual[i] - predicted[i]) - err_mean;
        var += d * d;
    }
    out.sde = std::sqrt(var / static_cast<double>(m));

    double ma = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        ma += actual[i];
        mp += predicted[i];
    }
    ma /= static_cast<double>(m);
    mp /= static_cast<double>(m);
    double cov = 0.0, va = 0.0, vp = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        cov += (actual[i] - ma) * (predicted[i] - mp);
        va += (actual[i] - ma) * (actual[i] - ma);
        vp += (predicted[i] - mp) * (predicted[i] - mp);
    }
    if (va > 0.0 && vp > 0.0) out.pearson = cov / std::sqrt(va * vp);
    return out;
}

namespace {

double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-2});
}

// ---- sparse AE gradient check -------------------------------------------

std::vector<double> flatten_layer(const SparseAeLayer& layer) {
    std::vector<double> theta;
    theta.insert(theta.end(), layer.w_enc.values().begin(), layer.w_enc.values().end());
    theta.insert(theta.end(), layer.b_enc.begin(), layer.b_enc.end());
    theta.insert(theta.end(), layer.w_dec.values().begin(), layer.w_dec.values().end());
    theta.insert(theta.end(), layer.b_dec.begin(), layer.b_dec.end());
    return theta;
}

SparseAeLayer unflatten_layer(const SparseAeLayer& shape, std::span<const double> theta) {
    SparseAeLayer layer = shape;
    std::size_t k = 0;
    for (std::size_t i = 0; i < layer.w_enc.size(); ++i) layer.w_enc.data()[i] = theta[k++];
    for (double& b : layer.b_enc) b = theta[k++];
    for (std::size_t i = 0; i < layer.w_dec.size(); ++i) layer.w_dec.data()[i] = theta[k++];
    for (double& b : layer.b_dec) b = theta[k++];
    return layer;
}

// ---- DBN fine-tune gradient check ---------------------------------------

// The fine-tuning objective only trains weights, hidden biases and the head;
// visible biases do not enter the mean-field forward pass.
std::vector<double> flatten_dbn(const Dbn& dbn) {
    std::vector<double> theta;
    for (const Rbm& rbm : dbn.rbms) {
        theta.insert(theta.end(), rbm.w.values().begin(), rbm.w.values().end());
        theta.insert(theta.end(), rbm.hidden_bias.begin(), rbm.hidden_bias.end());
    }
    theta.insert(theta.end(), dbn.head.w.begin(), dbn.head.w.end());
    theta.push_back(dbn.head.bias);
    return theta;
}

Dbn unflatten_dbn(const Dbn& shape, std::span<const double> theta) {
    Dbn dbn = shape;
    std::size_t k = 0;
    for (Rbm& rbm : dbn.rbms) {
        for (std::size_t i = 0; i < rbm.w.size(); ++i) rbm.w.data()[i] = theta[k++];
        for (double& b : rbm.hidden_bias) b = theta[k++];
    }
    for (double& w : dbn.head.w) w = theta[k++];
    dbn.head.bias = theta[k++];
    return dbn;
}

double dbn_mse(const Dbn& dbn, const Matrix& x, std::span<const double> y) {
    const std::vector<double> pred = dbn_predict(dbn, x);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return s / static_cast<double>(pred.size());
}

Matrix random_matrix(std::size_t rows, std::size_t cols, double lo, double hi, RngStream& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

}  // namespace

GradientCheckReport check_ae_gradients(std::size_t trials, std::uint64_t seed, double h) {
    // Published hyperparameter pairs first, then random draws.
    const double lambdas[] = {3e-5, 1e-5, 0.0, 0.03, 0.1};
    const double betas[] = {4.0, 4.0, 0.0, 1.0, 2.0};
    const double targets[] = {0.15, 0.10, 0.15, 0.10, 0.15};

    GradientCheckReport report;
    RngStream rng(seed);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t input = 2 + rng.next_below(7);   // 2..8
        const std::size_t hidden = 2 + rng.next_below(7);  // 2..8
        const std::size_t examples = 2 + rng.next_below(7);

        SparseAeLayer layer;
        layer.w_enc = init_weights(hidden, input, rng);
        layer.b_enc.resize(hidden);
        for (double& b : layer.b_enc) b = rng.uniform(-0.5, 0.5);
        layer.w_dec = init_weights(input, hidden, rng);
        layer.b_dec.resize(input);
        for (double& b : layer.b_dec) b = rng.uniform(-0.5, 0.5);
        const std::size_t pick = trial < 5 ? trial : rng.next_below(5);
        layer.l2_coeff = lambdas[pick];
        layer.sparsity_coeff = betas[pick];
        layer.sparsity_target = targets[pick];

        const Matrix x = random_matrix(examples, input, 0.05, 0.95, rng);

        const AeGradients analytic = ae_gradients(layer, x);
        std::vector<double> analytic_flat;
        analytic_flat.insert(analytic_flat.end(), analytic.w_enc.values().begin(),
                             analytic.w_enc.values().end());
        analytic_flat.insert(analytic_flat.end(), analytic.b_enc.begin(), analytic.b_enc.end());
        analytic_flat.insert(analytic_flat.end(), analytic.w_dec.values().begin(),
                             analytic.w_dec.values().end());
        analytic_flat.insert(analytic_flat.end(), analytic.b_dec.begin(), analytic.b_dec.end());

        const std::vector<double> theta = flatten_layer(layer);
        const std::vector<double> numeric = finite_diff_gradient(
            [&](std::span<const double> t) { return ae_loss(unflatten_layer(layer, t), x).total; },
            theta, h);

        for (std::size_t i = 0; i < theta.size(); ++i)
            report.max_rel_error =
                std::max(report.max_rel_error, rel_error(analytic_flat[i], numeric[i]));
        report.components += theta.size();
        ++report.trials;
    }
    return report;
}

GradientCheckReport check_dbn_gradients(std::size_t trials, std::uint64_t seed, double h) {
    GradientCheckReport report;
    RngStream rng(seed);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t input = 2 + rng.next_below(5);  // 2..6
        const std::size_t depth = 1 + rng.next_below(2);  // 1..2 hidden layers
        std::vector<std::size_t> widths;
        for (std::size_t l = 0; l < depth; ++l) widths.push_back(2 + rng.next_below(4));

        Dbn dbn;
        std::size_t in = input;
        for (std::size_t w : widths) {
            Rbm rbm;
            rbm.w = init_weights(w, in, rng);
            rbm.visible_bias.assign(in, 0.0);
            rbm.hidden_bias.resize(w);
            for (double& b : rbm.hidden_bias) b = rng.uniform(-0.5, 0.5);
            dbn.rbms.push_back(std::move(rbm));
            in = w;
        }
        dbn.head.w.resize(in);
        for (double& w : dbn.head.w) w = rng.uniform(-0.5, 0.5);
        dbn.head.bias = rng.uniform(-0.5, 0.5);

        const std::size_t examples = 2 + rng.next_below(7);
        const Matrix x = random_matrix(examples, input, 0.05, 0.95, rng);
        std::vector<double> y(examples);
        for (double& v : y) v = rng.uniform(0.0, 1.0);

        // Analytic gradient via one full-batch SGD step at unit rate.
        Dbn stepped = dbn;
        DbnTrainConfig cfg;
        cfg.layer_widths = widths;
        cfg.finetune_epochs = 1;
        cfg.batch_size = examples;
        cfg.finetune_learning_rate = 1.0;
        RngStream step_rng(0);
        dbn_finetune_regression(stepped, x, y, cfg, step_rng);
        const std::vector<double> before = flatten_dbn(dbn);
        const std::vector<double> after = flatten_dbn(stepped);
        std::vector<double> analytic(before.size());
        for (std::size_t i = 0; i < before.size(); ++i) analytic[i] = before[i] - after[i];

        const std::vector<double> numeric = finite_diff_gradient(
            [&](std::span<const double> t) { return dbn_mse(unflatten_dbn(dbn, t), x, y); },
            before, h);

        for (std::size_t i = 0; i < before.size(); ++i)
            report.max_rel_error =
                std::max(report.max_rel_error, rel_error(analytic[i], numeric[i]));
        report.components += before.size();
        ++report.trials;
    }
    return report;
}

RbmEnumeration enumerate_rbm(const Rbm& rbm) {
    const std::size_t m = rbm.visible_units();
    const std::size_t n = rbm.hidden_units();
    if (m + n > 10) throw TooLargeToEnumerate(m + n, 10);

    RbmEnumeration out;
    out.visible_units = m;
    out.hidden_units = n;

    // The oracle accumulates energies itself rather than calling the module
    // under test.
    auto energy = [&](std::size_t vb, std::size_t hb) {
        double e = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if ((vb >> i) & 1) e -= rbm.visible_bias[i];
        for (std::size_t j = 0; j < n; ++j)
            if ((hb >> j) & 1) e -= rbm.hidden_bias[j];
        for (std::size_t j = 0; j < n; ++j) {
            if (!((hb >> j) & 1)) continue;
            for (std::size_t i = 0; i < m; ++i)
                if ((vb >> i) & 1) e -= rbm.w(j, i);
        }
        return e;
    };

    const std::size_t v_states = std::size_t{1} << m;
    const std::size_t h_states = std::size_t{1} << n;
    std::vector<double> weights(v_states * h_states);
    for (std::size_t vb = 0; vb < v_states; ++vb)
        for (std::size_t hb = 0; hb < h_states; ++hb) {
            const double w = std::exp(-energy(vb, hb));
            weights[vb * h_states + hb] = w;
            out.z_joint += w;
        }

    // Cross-check: Z as the sum of exp(-F(v)) over visible configurations,
    // F(v) = -a.v - sum_j log(1 + exp(b_j + w_j.v)).
    for (std::size_t vb = 0; vb < v_states; ++vb) {
        double av = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if ((vb >> i) & 1) av += rbm.visible_bias[i];
        double log_terms = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double act = rbm.hidden_bias[j];
            for (std::size_t i = 0; i < m; ++i)
                if ((vb >> i) & 1) act += rbm.w(j, i);
            log_terms += std::log1p(std::exp(act));
        }
        out.z_free_energy += std::exp(av + log_terms);
    }

    out.hidden_conditionals.assign(v_states * n, 0.0);
    for (std::size_t vb = 0; vb < v_states; ++vb) {
        double total = 0.0;
        for (std::size_t hb = 0; hb < h_states; ++hb) total += weights[vb * h_states + hb];
        for (std::size_t j = 0; j < n; ++j) {
            double on = 0.0;
            for (std::size_t hb = 0; hb < h_states; ++hb)
                if ((hb >> j) & 1) on += weights[vb * h_states + hb];
            out.hidden_conditionals[vb * n + j] = on / total;
        }
    }

    out.visible_conditionals.assign(h_states * m, 0.0);
    for (std::size_t hb = 0; hb < h_states; ++hb) {
        double total = 0.0;
        for (std::size_t vb = 0; vb < v_states; ++vb) total += weights[vb * h_states + hb];
        for (std::size_t i = 0; i < m; ++i) {
            double on = 0.0;
            for (std::size_t vb = 0; vb < v_states; ++vb)
                if ((vb >> i) & 1) on += weights[vb * h_states + hb];
            out.visible_conditionals[hb * m + i] = on / total;
        }
    }
    return out;
}

}  // namespace oracle
}  // namespace atl
