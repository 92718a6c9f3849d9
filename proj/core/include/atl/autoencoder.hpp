#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atl/matrix.hpp"
#include "atl/rng.hpp"

namespace atl {

/// One sparse autoencoder: sigmoid encoder and decoder with untied weights,
/// L2 weight penalty (coefficient lambda) and a KL sparsity penalty pushing
/// mean hidden activations toward sparsity_target.
struct SparseAeLayer {
    Matrix w_enc;                // hidden x input
    std::vector<double> b_enc;   // hidden
    Matrix w_dec;                // input x hidden
    std::vector<double> b_dec;   // input
    double l2_coeff = 0.0;       // lambda
    double sparsity_coeff = 0.0; // beta
    double sparsity_target = 0.15;

    std::size_t input_width() const { return w_enc.cols(); }
    std::size_t hidden_width() const { return w_enc.rows(); }
};

struct AeForward {
    Matrix hidden;  // m x hidden
    Matrix recon;   // m x input
};

/// hidden = sigmoid(x W_enc' + b_enc), recon = sigmoid(hidden W_dec' + b_dec).
AeForward ae_forward(const SparseAeLayer& layer, const Matrix& x);

struct AeLoss {
    double total = 0.0;
    double mse = 0.0;              // (1/(m n)) sum (x - recon)^2
    double weight_penalty = 0.0;   // 0.5 * sum of squared weights, both matrices
    double sparsity_penalty = 0.0; // sum_i KL(p || p_i)
};

AeLoss ae_loss(const SparseAeLayer& layer, const Matrix& x);

struct AeGradients {
    Matrix w_enc;
    std::vector<double> b_enc;
    Matrix w_dec;
    std::vector<double> b_dec;
};

/// Analytic gradients of the total loss. The sparsity term is differentiated
/// through the batch-mean activations, which is what makes the central-
/// difference check pass.
AeGradients ae_gradients(const SparseAeLayer& layer, const Matrix& x);

struct AeLayerConfig {
    std::size_t width = 0;
    std::size_t epochs = 0;
    double l2_coeff = 0.0;
    double sparsity_coeff = 0.0;
    double sparsity_target = 0.15;
};

struct AeTrainConfig {
    std::vector<AeLayerConfig> layers;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;          // pretraining step size
    std::size_t finetune_epochs = 100;    // supervised stage after stacking
    double finetune_learning_rate = 0.3;  // supervised step size

    /// Five pretrained layers: widths 500/400/350/300/250, epochs
    /// 500/250/200/200/150, lambda 3e-5 then 1e-5, beta 4, target 0.15 then 0.1.
    static AeTrainConfig defaults();
};

/// Mini-batch SGD on the sparse reconstruction loss. Throws DivergedLoss when
/// the loss becomes non-finite or exceeds 1e6 times its initial value.
SparseAeLayer ae_pretrain(const Matrix& x, const AeLayerConfig& cfg, std::size_t batch_size,
                          double learning_rate, RngStream& rng);

/// Greedy layer-wise pretraining: layer k trains on the hidden activations of
/// layer k-1. Decoder halves are kept inside the returned layers but play no
/// further role once the stack is assembled.
std::vector<SparseAeLayer> stack_pretrain(const Matrix& x, const AeTrainConfig& cfg,
                                          RngStream& rng);

struct EncoderLayer {
    Matrix w;               // hidden x input
    std::vector<double> b;  // hidden

    bool operator==(const EncoderLayer&) const = default;
};

struct LinearHead {
    std::vector<double> w;
    double bias = 0.0;

    bool operator==(const LinearHead&) const = default;
};

/// Linear shim mapping a foreign feature width onto the model's native input
/// width. Only constructed on request; cross-feature-space transfer has no
/// mechanism in the underlying method and this is a clearly-labeled extension.
struct LinearAdapter {
    Matrix w;               // native input x foreign input
    std::vector<double> b;  // native input

    bool operator==(const LinearAdapter&) const = default;
};

struct Provenance {
    std::string model_id;
    std::string farm_id;
    std::string window;           // e.g. "M1-M8"
    std::string parent_model_id;  // empty when trained from scratch

    bool operator==(const Provenance&) const = default;
};

/// Stacked sigmoid encoders plus a scalar linear head: the base-learner.
struct StackedSparseRegressor {
    std::optional<LinearAdapter> adapter;
    std::vector<EncoderLayer> layers;
    LinearHead head;
    Provenance provenance;

    std::size_t input_width() const {
        return adapter ? adapter->w.cols() : layers.front().w.cols();
    }
    std::size_t last_hidden_width() const { return layers.back().w.rows(); }

    bool same_parameters(const StackedSparseRegressor& other) const {
        return adapter == other.adapter && layers == other.layers && head == other.head;
    }
};

struct FinetuneOptions {
    std::size_t epochs = 25;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    /// Called with (epoch index, full training MSE) after each epoch.
    std::function<void(std::size_t, double)> epoch_observer;
};

struct TrainStats {
    double final_loss = 0.0;
    std::size_t epochs = 0;
};

/// Stacks the pretrained encoders, appends a zero-initialized linear head and
/// backpropagates the MSE through head and all layers.
StackedSparseRegressor stack_finetune(const std::vector<SparseAeLayer>& pretrained,
                                      const Matrix& x, std::span<const double> y,
                                      const AeTrainConfig& cfg, RngStream& rng,
                                      Provenance provenance, TrainStats* stats = nullptr);

/// Continues backpropagation from the parent's parameters without
/// re-initialization; the parent is left untouched and the child records it
/// in provenance.
StackedSparseRegressor finetune_from(const StackedSparseRegressor& parent, const Matrix& x,
                                     std::span<const double> y, const FinetuneOptions& opt,
                                     RngStream& rng, Provenance provenance,
                                     TrainStats* stats = nullptr);

/// Attaches a randomly initialized linear input adapter so the model accepts
/// foreign_width columns. The adapter trains jointly during later fine-tuning.
StackedSparseRegressor with_input_adapter(const StackedSparseRegressor& model,
                                          std::size_t foreign_width, RngStream& rng);

std::vector<double> predict(const StackedSparseRegressor& model, const Matrix& x);

/// Training MSE of the model on (x, y); also used for warm-start comparisons.
double training_mse(const StackedSparseRegressor& model, const Matrix& x,
                    std::span<const double> y);

}  // namespace atl
