#pragma once

#include <span>
#include <vector>

#include "atl/autoencoder.hpp"  // LinearHead, TrainStats
#include "atl/matrix.hpp"
#include "atl/rng.hpp"

namespace atl {

/// Restricted Boltzmann machine over binary units; real-valued inputs in
/// [0, 1] are treated as Bernoulli probabilities.
struct Rbm {
    Matrix w;                          // hidden n x visible m
    std::vector<double> visible_bias;  // a, length m
    std::vector<double> hidden_bias;   // b, length n

    std::size_t visible_units() const { return w.cols(); }
    std::size_t hidden_units() const { return w.rows(); }

    bool operator==(const Rbm&) const = default;
};

/// -sum a_i v_i - sum b_j h_j - sum_ji w_ji v_i h_j.
double rbm_energy(const Rbm& rbm, std::span<const double> v, std::span<const double> h);

/// Full joint distribution of a tiny RBM by enumerating all 2^(m+n) states.
/// Throws TooLargeToEnumerate above 20 total units.
struct RbmDistribution {
    std::size_t visible_units = 0;
    std::size_t hidden_units = 0;
    std::vector<double> joint;  // index = v_bits * 2^n + h_bits

    double prob(std::size_t v_bits, std::size_t h_bits) const;
    double conditional_hidden(std::size_t unit, std::size_t v_bits) const;
    double conditional_visible(std::size_t unit, std::size_t h_bits) const;
    double total() const;
};

RbmDistribution rbm_exact_distribution(const Rbm& rbm);

/// p(h_j = 1 | v) = sigmoid(sum_i v_i w_ji + b_j).
std::vector<double> rbm_hidden_prob(const Rbm& rbm, std::span<const double> v);

/// p(v_i = 1 | h) = sigmoid(sum_j h_j w_ji + a_i).
std::vector<double> rbm_visible_prob(const Rbm& rbm, std::span<const double> h);

/// Momentum-smoothed velocities for the CD update, zero-initialized.
struct CdVelocity {
    Matrix w;
    std::vector<double> visible_bias;
    std::vector<double> hidden_bias;

    static CdVelocity zeros(const Rbm& rbm);
};

struct CdOptions {
    int cd_k = 1;
    double learning_rate = 0.001;
    double momentum = 0.0;
    /// Test hook: reuse the data-phase states as the chain end, making every
    /// update identically zero.
    bool freeze_chain = false;
};

/// One CD-k update on a batch of rows in [0, 1]^m. Positive statistics use
/// the data with sampled hidden states; the chain alternates sampled hidden
/// states with visible probabilities, and the final step keeps probabilities
/// on both sides. Updates are batch-averaged.
void rbm_cd_update(Rbm& rbm, const Matrix& batch, const CdOptions& opt, CdVelocity& velocity,
                   RngStream& rng);

/// Mean reconstruction distance mean |v - p(v | h(v))| over a batch; a cheap
/// progress measure for CD training.
double rbm_reconstruction_error(const Rbm& rbm, const Matrix& batch);

struct DbnTrainConfig {
    std::vector<std::size_t> layer_widths;
    std::size_t epochs = 300;
    std::size_t batch_size = 10;
    double momentum = 0.01;
    double learning_rate = 0.001;
    int cd_k = 1;
    std::size_t finetune_epochs = 300;
    double finetune_learning_rate = 0.05;

    /// Hidden widths 120/50/20/5 with epochs 300, batch 10, momentum 0.01,
    /// learning rate 0.001.
    static DbnTrainConfig defaults_small();
    /// Hidden widths 545/300/250/50/20/2, same training parameters.
    static DbnTrainConfig defaults_large();
};

/// Stack of RBMs plus a scalar linear regression head appended after the
/// last hidden layer.
struct Dbn {
    std::vector<Rbm> rbms;
    LinearHead head;

    std::size_t input_width() const { return rbms.front().visible_units(); }
    bool operator==(const Dbn&) const = default;
};

/// Greedy layer-wise CD training; layer k+1 trains on the hidden
/// probabilities of layer k. Input entries must lie in [0, 1].
Dbn dbn_pretrain(const Matrix& x, const DbnTrainConfig& cfg, RngStream& rng);

/// Deterministic mean-field forward (chained sigmoid layers) plus the linear
/// head; backpropagates the MSE through head and all layers.
void dbn_finetune_regression(Dbn& dbn, const Matrix& x, std::span<const double> y,
                             const DbnTrainConfig& cfg, RngStream& rng,
                             TrainStats* stats = nullptr);

std::vector<double> dbn_predict(const Dbn& dbn, const Matrix& x);

}  // namespace atl
