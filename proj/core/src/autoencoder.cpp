#include "atl/autoencoder.hpp"

#include <cmath>

#include "atl/error.hpp"
#include "atl/numerics.hpp"

namespace atl {

namespace {

constexpr double kActivationClamp = 1e-7;
constexpr double kDivergenceFactor = 1e6;

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx) {
    std::vector<double> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) out[r] = v[idx[r]];
    return out;
}

void check_input(const SparseAeLayer& layer, const Matrix& x, const char* context) {
    if (x.rows() == 0) throw EmptyInput(context);
    if (x.cols() != layer.input_width())
        throw ShapeMismatch(x.rows(), layer.input_width(), x.rows(), x.cols(), context);
}

}  // namespace

AeForward ae_forward(const SparseAeLayer& layer, const Matrix& x) {
    check_input(layer, x, "ae_forward");
    AeForward f;
    f.hidden = multiply_abt(x, layer.w_enc);
    add_row_vector(f.hidden, layer.b_enc);
    sigmoid_inplace(f.hidden);
    f.recon = multiply_abt(f.hidden, layer.w_dec);
    add_row_vector(f.recon, layer.b_dec);
    sigmoid_inplace(f.recon);
    return f;
}

namespace {

AeLoss loss_from_forward(const SparseAeLayer& layer, const Matrix& x, const AeForward& f) {
    const double m = static_cast<double>(x.rows());
    const double n = static_cast<double>(x.cols());

    AeLoss loss;
    double se = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data()[i] - f.recon.data()[i];
        se += d * d;
    }
    loss.mse = se / (m * n);
    loss.weight_penalty = 0.5 * (sum_squares(layer.w_enc) + sum_squares(layer.w_dec));

    const double p = layer.sparsity_target;
    for (double mean_act : column_means(f.hidden)) {
        const double pi =
            std::clamp(mean_act, kActivationClamp, 1.0 - kActivationClamp);
        loss.sparsity_penalty +=
            p * std::log(p / pi) + (1.0 - p) * std::log((1.0 - p) / (1.0 - pi));
    }
    loss.total = loss.mse + layer.l2_coeff * loss.weight_penalty +
                 layer.sparsity_coeff * loss.sparsity_penalty;
    return loss;
}

}  // namespace

AeLoss ae_loss(const SparseAeLayer& layer, const Matrix& x) {
    check_input(layer, x, "ae_loss");
    return loss_from_forward(layer, x, ae_forward(layer, x));
}

namespace {

AeGradients gradients_from_forward(const SparseAeLayer& layer, const Matrix& x,
                                   const AeForward& f) {
    const double m = static_cast<double>(x.rows());
    const double n = static_cast<double>(x.cols());

    // d(total)/d(recon pre-activation)
    Matrix d_recon = f.recon;
    for (std::size_t i = 0; i < d_recon.size(); ++i) {
        const double r = f.recon.data()[i];
        const double d_mse = -2.0 / (m * n) * (x.data()[i] - r);
        d_recon.data()[i] = d_mse * sigmoid_grad_from_output(r);
    }

    AeGradients g;
    g.w_dec = multiply_atb(d_recon, f.hidden);
    axpy(g.w_dec, layer.l2_coeff, layer.w_dec);
    g.b_dec = column_sums(d_recon);

    // d(total)/d(hidden): reconstruction path plus the KL term through the
    // batch-mean activation of each hidden unit.
    Matrix d_hidden = multiply(d_recon, layer.w_dec);
    const double p = layer.sparsity_target;
    const std::vector<double> means = column_means(f.hidden);
    for (std::size_t j = 0; j < means.size(); ++j) {
        double kl = 0.0;
        if (means[j] > kActivationClamp && means[j] < 1.0 - kActivationClamp)
            kl = layer.sparsity_coeff * (-p / means[j] + (1.0 - p) / (1.0 - means[j])) / m;
        if (kl != 0.0)
            for (std::size_t i = 0; i < d_hidden.rows(); ++i) d_hidden(i, j) += kl;
    }
    for (std::size_t i = 0; i < d_hidden.size(); ++i)
        d_hidden.data()[i] *= sigmoid_grad_from_output(f.hidden.data()[i]);

    g.w_enc = multiply_atb(d_hidden, x);
    axpy(g.w_enc, layer.l2_coeff, layer.w_enc);
    g.b_enc = column_sums(d_hidden);
    return g;
}

}  // namespace

AeGradients ae_gradients(const SparseAeLayer& layer, const Matrix& x) {
    check_input(layer, x, "ae_gradients");
    return gradients_from_forward(layer, x, ae_forward(layer, x));
}

AeTrainConfig AeTrainConfig::defaults() {
    AeTrainConfig cfg;
    cfg.layers = {
        {500, 500, 3e-5, 4.0, 0.15},
        {400, 250, 1e-5, 4.0, 0.10},
        {350, 200, 1e-5, 4.0, 0.10},
        {300, 200, 1e-5, 4.0, 0.10},
        {250, 150, 1e-5, 4.0, 0.10},
    };
    return cfg;
}

SparseAeLayer ae_pretrain(const Matrix& x, const AeLayerConfig& cfg, std::size_t batch_size,
                          double learning_rate, RngStream& rng) {
    if (x.rows() == 0) throw EmptyInput("ae_pretrain");
    if (cfg.width == 0 || batch_size == 0)
        throw DataError("ae_pretrain: width and batch size must be positive");

    SparseAeLayer layer;
    layer.w_enc = init_weights(cfg.width, x.cols(), rng);
    layer.b_enc.assign(cfg.width, 0.0);
    layer.w_dec = init_weights(x.cols(), cfg.width, rng);
    layer.b_dec.assign(x.cols(), 0.0);
    layer.l2_coeff = cfg.l2_coeff;
    layer.sparsity_coeff = cfg.sparsity_coeff;
    layer.sparsity_target = cfg.sparsity_target;

    const double initial = ae_loss(layer, x).total;
    std::vector<std::size_t> perm = iota_indices(x.rows());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_indices(perm, rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < perm.size(); start += batch_size) {
            const std::size_t stop = std::min(start + batch_size, perm.size());
            const Matrix batch = gather_rows(x, {perm.data() + start, stop - start});
            const AeForward f = ae_forward(layer, batch);
            epoch_loss += loss_from_forward(layer, batch, f).total;
            const AeGradients g = gradients_from_forward(layer, batch, f);
            axpy(layer.w_enc, -learning_rate, g.w_enc);
            axpy(layer.b_enc, -learning_rate, g.b_enc);
            axpy(layer.w_dec, -learning_rate, g.w_dec);
            axpy(layer.b_dec, -learning_rate, g.b_dec);
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);
        if (!std::isfinite(epoch_loss) || epoch_loss > kDivergenceFactor * initial)
            throw DivergedLoss(epoch_loss, "ae_pretrain");
    }
    return layer;
}

std::vector<SparseAeLayer> stack_pretrain(const Matrix& x, const AeTrainConfig& cfg,
                                          RngStream& rng) {
    if (cfg.layers.empty()) throw DataError("stack_pretrain: need at least one layer");
    std::vector<SparseAeLayer> layers;
    layers.reserve(cfg.layers.size());
    Matrix input = x;
    for (const AeLayerConfig& lc : cfg.layers) {
        layers.push_back(ae_pretrain(input, lc, cfg.batch_size, cfg.learning_rate, rng));
        input = ae_forward(layers.back(), input).hidden;
    }
    return layers;
}

namespace {

struct ForwardPass {
    std::vector<Matrix> activations;  // activations[0] = input (post-adapter)
    std::vector<double> output;
};

Matrix apply_adapter(const LinearAdapter& adapter, const Matrix& x) {
    Matrix out = multiply_abt(x, adapter.w);
    add_row_vector(out, adapter.b);
    return out;
}

ForwardPass forward_stack(const StackedSparseRegressor& model, const Matrix& x) {
    ForwardPass fp;
    fp.activations.reserve(model.layers.size() + 1);
    fp.activations.push_back(model.adapter ? apply_adapter(*model.adapter, x) : x);
    for (const EncoderLayer& layer : model.layers) {
        Matrix z = multiply_abt(fp.activations.back(), layer.w);
        add_row_vector(z, layer.b);
        sigmoid_inplace(z);
        fp.activations.push_back(std::move(z));
    }
    const Matrix& last = fp.activations.back();
    fp.output.assign(last.rows(), model.head.bias);
    for (std::size_t i = 0; i < last.rows(); ++i) {
        const double* row = last.data() + i * last.cols();
        double s = fp.output[i];
        for (std::size_t j = 0; j < last.cols(); ++j) s += row[j] * model.head.w[j];
        fp.output[i] = s;
    }
    return fp;
}

double mse_of(std::span<const double> pred, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - y[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

/// One SGD step of the supervised MSE on a batch; returns the batch loss
/// before the update.
double supervised_step(StackedSparseRegressor& model, const Matrix& bx,
                       std::span<const double> by, double lr) {
    ForwardPass fp = forward_stack(model, bx);
    const double m = static_cast<double>(bx.rows());
    const double loss = mse_of(fp.output, by);

    std::vector<double> d_out(bx.rows());
    for (std::size_t i = 0; i < d_out.size(); ++i)
        d_out[i] = 2.0 / m * (fp.output[i] - by[i]);

    const Matrix& last = fp.activations.back();
    std::vector<double> g_head_w = multiply_tvec(last, d_out);
    double g_head_b = 0.0;
    for (double d : d_out) g_head_b += d;

    // delta w.r.t. the activation entering the head
    Matrix delta(last.rows(), last.cols());
    for (std::size_t i = 0; i < last.rows(); ++i)
        for (std::size_t j = 0; j < last.cols(); ++j)
            delta(i, j) = d_out[i] * model.head.w[j];

    struct LayerGrad {
        Matrix w;
        std::vector<double> b;
    };
    std::vector<LayerGrad> grads(model.layers.size());
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        Matrix& act = fp.activations[l + 1];
        for (std::size_t i = 0; i < delta.size(); ++i)
            delta.data()[i] *= sigmoid_grad_from_output(act.data()[i]);
        grads[l].w = multiply_atb(delta, fp.activations[l]);
        grads[l].b = column_sums(delta);
        if (l > 0 || model.adapter) delta = multiply(delta, model.layers[l].w);
    }

    std::optional<LayerGrad> adapter_grad;
    if (model.adapter) {
        // delta now holds d(loss)/d(adapter output); the adapter is linear.
        adapter_grad = LayerGrad{multiply_atb(delta, bx), column_sums(delta)};
    }

    axpy(model.head.w, -lr, g_head_w);
    model.head.bias -= lr * g_head_b;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        axpy(model.layers[l].w, -lr, grads[l].w);
        axpy(model.layers[l].b, -lr, grads[l].b);
    }
    if (adapter_grad) {
        axpy(model.adapter->w, -lr, adapter_grad->w);
        axpy(model.adapter->b, -lr, adapter_grad->b);
    }
    return loss;
}

void supervised_train(StackedSparseRegressor& model, const Matrix& x, std::span<const double> y,
                      std::size_t epochs, std::size_t batch_size, double lr, RngStream& rng,
                      const std::function<void(std::size_t, double)>& observer,
                      TrainStats* stats) {
    if (x.rows() != y.size()) throw LengthMismatch(x.rows(), y.size(), "supervised_train");
    if (x.cols() != model.input_width())
        throw WidthMismatch(model.input_width(), x.cols(), "supervised_train");
    if (batch_size == 0) throw DataError("supervised_train: batch size must be positive");

    double last_loss = training_mse(model, x, y);
    const double initial = last_loss;
    std::vector<std::size_t> perm = iota_indices(x.rows());
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        shuffle_indices(perm, rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < perm.size(); start += batch_size) {
            const std::size_t stop = std::min(start + batch_size, perm.size());
            const std::span<const std::size_t> idx{perm.data() + start, stop - start};
            const Matrix bx = gather_rows(x, idx);
            const std::vector<double> by = gather(y, idx);
            epoch_loss += supervised_step(model, bx, by, lr);
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);
        if (!std::isfinite(epoch_loss) ||
            (initial > 0.0 && epoch_loss > kDivergenceFactor * initial))
            throw DivergedLoss(epoch_loss, "fine-tune");
        last_loss = epoch_loss;
        if (observer) {
            last_loss = training_mse(model, x, y);
            observer(epoch, last_loss);
        }
    }
    if (stats) {
        stats->final_loss = epochs ? last_loss : training_mse(model, x, y);
        stats->epochs = epochs;
    }
}

}  // namespace

StackedSparseRegressor stack_finetune(const std::vector<SparseAeLayer>& pretrained,
                                      const Matrix& x, std::span<const double> y,
                                      const AeTrainConfig& cfg, RngStream& rng,
                                      Provenance provenance, TrainStats* stats) {
    if (pretrained.empty()) throw DataError("stack_finetune: no pretrained layers");
    StackedSparseRegressor model;
    model.layers.reserve(pretrained.size());
    for (const SparseAeLayer& layer : pretrained)
        model.layers.push_back({layer.w_enc, layer.b_enc});
    model.head.w.assign(model.last_hidden_width(), 0.0);
    model.head.bias = 0.0;
    model.provenance = std::move(provenance);
    supervised_train(model, x, y, cfg.finetune_epochs, cfg.batch_size,
                     cfg.finetune_learning_rate, rng, nullptr, stats);
    return model;
}

StackedSparseRegressor finetune_from(const StackedSparseRegressor& parent, const Matrix& x,
                                     std::span<const double> y, const FinetuneOptions& opt,
                                     RngStream& rng, Provenance provenance, TrainStats* stats) {
    if (x.cols() != parent.input_width())
        throw WidthMismatch(parent.input_width(), x.cols(), "finetune_from");
    StackedSparseRegressor child = parent;
    child.provenance = std::move(provenance);
    child.provenance.parent_model_id = parent.provenance.model_id;
    supervised_train(child, x, y, opt.epochs, opt.batch_size, opt.learning_rate, rng,
                     opt.epoch_observer, stats);
    return child;
}

StackedSparseRegressor with_input_adapter(const StackedSparseRegressor& model,
                                          std::size_t foreign_width, RngStream& rng) {
    if (model.adapter) throw DataError("with_input_adapter: model already has an adapter");
    StackedSparseRegressor out = model;
    const std::size_t native = model.input_width();
    out.adapter = LinearAdapter{init_weights(native, foreign_width, rng),
                                std::vector<double>(native, 0.0)};
    return out;
}

std::vector<double> predict(const StackedSparseRegressor& model, const Matrix& x) {
    if (x.cols() != model.input_width())
        throw WidthMismatch(model.input_width(), x.cols(), "predict");
    return forward_stack(model, x).output;
}

double training_mse(const StackedSparseRegressor& model, const Matrix& x,
                    std::span<const double> y) {
    if (x.rows() != y.size()) throw LengthMismatch(x.rows(), y.size(), "training_mse");
    const std::vector<double> pred = predict(model, x);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - y[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

}  // namespace atl
