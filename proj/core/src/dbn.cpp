#include "atl/dbn.hpp"

#include <cmath>

#include "atl/error.hpp"
#include "atl/numerics.hpp"

namespace atl {

namespace {

constexpr std::size_t kEnumerationLimit = 20;
constexpr double kDivergenceFactor = 1e6;

void check_visible(const Rbm& rbm, std::size_t len, const char* context) {
    if (len != rbm.visible_units())
        throw ShapeMismatch(rbm.hidden_units(), rbm.visible_units(), 1, len, context);
}

void check_hidden(const Rbm& rbm, std::size_t len, const char* context) {
    if (len != rbm.hidden_units())
        throw ShapeMismatch(rbm.hidden_units(), rbm.visible_units(), len, 1, context);
}

}  // namespace

double rbm_energy(const Rbm& rbm, std::span<const double> v, std::span<const double> h) {
    check_visible(rbm, v.size(), "rbm_energy");
    check_hidden(rbm, h.size(), "rbm_energy");
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e -= rbm.visible_bias[i] * v[i];
    for (std::size_t j = 0; j < h.size(); ++j) e -= rbm.hidden_bias[j] * h[j];
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (h[j] == 0.0) continue;
        const double* wj = rbm.w.data() + j * rbm.w.cols();
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += wj[i] * v[i];
        e -= s * h[j];
    }
    return e;
}

double RbmDistribution::prob(std::size_t v_bits, std::size_t h_bits) const {
    return joint[(v_bits << hidden_units) | h_bits];
}

double RbmDistribution::conditional_hidden(std::size_t unit, std::size_t v_bits) const {
    double on = 0.0, all = 0.0;
    for (std::size_t h = 0; h < (std::size_t{1} << hidden_units); ++h) {
        const double p = prob(v_bits, h);
        all += p;
        if (h & (std::size_t{1} << unit)) on += p;
    }
    return on / all;
}

double RbmDistribution::conditional_visible(std::size_t unit, std::size_t h_bits) const {
    double on = 0.0, all = 0.0;
    for (std::size_t v = 0; v < (std::size_t{1} << visible_units); ++v) {
        const double p = prob(v, h_bits);
        all += p;
        if (v & (std::size_t{1} << unit)) on += p;
    }
    return on / all;
}

double RbmDistribution::total() const {
    double s = 0.0;
    for (double p : joint) s += p;
    return s;
}

RbmDistribution rbm_exact_distribution(const Rbm& rbm) {
    const std::size_t m = rbm.visible_units();
    const std::size_t n = rbm.hidden_units();
    if (m + n > kEnumerationLimit) throw TooLargeToEnumerate(m + n, kEnumerationLimit);

    RbmDistribution dist;
    dist.visible_units = m;
    dist.hidden_units = n;
    dist.joint.resize(std::size_t{1} << (m + n));

    std::vector<double> v(m), h(n);
    double z = 0.0;
    for (std::size_t vb = 0; vb < (std::size_t{1} << m); ++vb) {
        for (std::size_t i = 0; i < m; ++i) v[i] = (vb >> i) & 1 ? 1.0 : 0.0;
        for (std::size_t hb = 0; hb < (std::size_t{1} << n); ++hb) {
            for (std::size_t j = 0; j < n; ++j) h[j] = (hb >> j) & 1 ? 1.0 : 0.0;
            const double weight = std::exp(-rbm_energy(rbm, v, h));
            dist.joint[(vb << n) | hb] = weight;
            z += weight;
        }
    }
    for (double& p : dist.joint) p /= z;
    return dist;
}

std::vector<double> rbm_hidden_prob(const Rbm& rbm, std::span<const double> v) {
    check_visible(rbm, v.size(), "rbm_hidden_prob");
    std::vector<double> p = multiply_vec(rbm.w, v);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = sigmoid(p[j] + rbm.hidden_bias[j]);
    return p;
}

std::vector<double> rbm_visible_prob(const Rbm& rbm, std::span<const double> h) {
    check_hidden(rbm, h.size(), "rbm_visible_prob");
    std::vector<double> p = multiply_tvec(rbm.w, h);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(p[i] + rbm.visible_bias[i]);
    return p;
}

CdVelocity CdVelocity::zeros(const Rbm& rbm) {
    CdVelocity v;
    v.w = Matrix(rbm.hidden_units(), rbm.visible_units());
    v.visible_bias.assign(rbm.visible_units(), 0.0);
    v.hidden_bias.assign(rbm.hidden_units(), 0.0);
    return v;
}

namespace {

/// Batch versions of the conditionals: rows are samples.
Matrix hidden_prob_batch(const Rbm& rbm, const Matrix& v) {
    Matrix p = multiply_abt(v, rbm.w);
    add_row_vector(p, rbm.hidden_bias);
    sigmoid_inplace(p);
    return p;
}

Matrix visible_prob_batch(const Rbm& rbm, const Matrix& h) {
    Matrix p = multiply(h, rbm.w);
    add_row_vector(p, rbm.visible_bias);
    sigmoid_inplace(p);
    return p;
}

Matrix sample_bernoulli(const Matrix& probs, RngStream& rng) {
    Matrix s(probs.rows(), probs.cols());
    for (std::size_t i = 0; i < probs.size(); ++i)
        s.data()[i] = rng.bernoulli(probs.data()[i]) ? 1.0 : 0.0;
    return s;
}

}  // namespace

void rbm_cd_update(Rbm& rbm, const Matrix& batch, const CdOptions& opt, CdVelocity& velocity,
                   RngStream& rng) {
    if (batch.rows() == 0) throw EmptyInput("rbm_cd_update");
    check_visible(rbm, batch.cols(), "rbm_cd_update");
    if (opt.cd_k < 1) throw DataError("rbm_cd_update: cd_k must be >= 1");

    const Matrix h0_prob = hidden_prob_batch(rbm, batch);
    const Matrix h0_sample = sample_bernoulli(h0_prob, rng);

    Matrix vk = batch;
    Matrix hk = h0_sample;
    if (!opt.freeze_chain) {
        Matrix h_state = h0_sample;
        for (int step = 1; step <= opt.cd_k; ++step) {
            vk = visible_prob_batch(rbm, h_state);
            hk = hidden_prob_batch(rbm, vk);
            if (step < opt.cd_k) h_state = sample_bernoulli(hk, rng);
        }
    }

    const double inv_batch = 1.0 / static_cast<double>(batch.rows());

    // delta_w = eta * (<v h>_0 - <v h>_k), batch-averaged
    Matrix pos = multiply_atb(h0_sample, batch);
    Matrix neg = multiply_atb(hk, vk);
    pos -= neg;
    pos *= opt.learning_rate * inv_batch;

    std::vector<double> db = column_sums(h0_sample);
    const std::vector<double> db_neg = column_sums(hk);
    std::vector<double> da = column_sums(batch);
    const std::vector<double> da_neg = column_sums(vk);
    for (std::size_t j = 0; j < db.size(); ++j)
        db[j] = opt.learning_rate * inv_batch * (db[j] - db_neg[j]);
    for (std::size_t i = 0; i < da.size(); ++i)
        da[i] = opt.learning_rate * inv_batch * (da[i] - da_neg[i]);

    velocity.w *= opt.momentum;
    velocity.w += pos;
    for (std::size_t j = 0; j < db.size(); ++j)
        velocity.hidden_bias[j] = opt.momentum * velocity.hidden_bias[j] + db[j];
    for (std::size_t i = 0; i < da.size(); ++i)
        velocity.visible_bias[i] = opt.momentum * velocity.visible_bias[i] + da[i];

    rbm.w += velocity.w;
    for (std::size_t j = 0; j < db.size(); ++j) rbm.hidden_bias[j] += velocity.hidden_bias[j];
    for (std::size_t i = 0; i < da.size(); ++i) rbm.visible_bias[i] += velocity.visible_bias[i];
}

double rbm_reconstruction_error(const Rbm& rbm, const Matrix& batch) {
    const Matrix h = hidden_prob_batch(rbm, batch);
    const Matrix v = visible_prob_batch(rbm, h);
    double s = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i)
        s += std::abs(batch.data()[i] - v.data()[i]);
    return s / static_cast<double>(batch.size());
}

DbnTrainConfig DbnTrainConfig::defaults_small() {
    DbnTrainConfig cfg;
    cfg.layer_widths = {120, 50, 20, 5};
    return cfg;
}

DbnTrainConfig DbnTrainConfig::defaults_large() {
    DbnTrainConfig cfg;
    cfg.layer_widths = {545, 300, 250, 50, 20, 2};
    return cfg;
}

Dbn dbn_pretrain(const Matrix& x, const DbnTrainConfig& cfg, RngStream& rng) {
    if (x.rows() == 0) throw EmptyInput("dbn_pretrain");
    if (cfg.layer_widths.empty()) throw DataError("dbn_pretrain: need at least one layer");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        if (!(v >= 0.0 && v <= 1.0))
            throw DataError("dbn_pretrain: inputs must lie in [0, 1]");
    }

    Dbn dbn;
    Matrix input = x;
    for (const std::size_t width : cfg.layer_widths) {
        Rbm rbm;
        rbm.w = init_weights(width, input.cols(), rng);
        rbm.visible_bias.assign(input.cols(), 0.0);
        rbm.hidden_bias.assign(width, 0.0);
        CdVelocity velocity = CdVelocity::zeros(rbm);
        CdOptions opt{cfg.cd_k, cfg.learning_rate, cfg.momentum, false};

        std::vector<std::size_t> perm = iota_indices(input.rows());
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            shuffle_indices(perm, rng);
            for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
                const std::size_t stop = std::min(start + cfg.batch_size, perm.size());
                const Matrix batch = gather_rows(input, {perm.data() + start, stop - start});
                rbm_cd_update(rbm, batch, opt, velocity, rng);
            }
        }
        input = hidden_prob_batch(rbm, input);
        dbn.rbms.push_back(std::move(rbm));
    }
    dbn.head.w.assign(cfg.layer_widths.back(), 0.0);
    dbn.head.bias = 0.0;
    return dbn;
}

namespace {

struct DbnForward {
    std::vector<Matrix> activations;  // activations[0] = input
    std::vector<double> output;
};

DbnForward dbn_forward(const Dbn& dbn, const Matrix& x) {
    DbnForward fp;
    fp.activations.reserve(dbn.rbms.size() + 1);
    fp.activations.push_back(x);
    for (const Rbm& rbm : dbn.rbms)
        fp.activations.push_back(hidden_prob_batch(rbm, fp.activations.back()));
    const Matrix& last = fp.activations.back();
    fp.output.assign(last.rows(), dbn.head.bias);
    for (std::size_t i = 0; i < last.rows(); ++i) {
        const double* row = last.data() + i * last.cols();
        double s = fp.output[i];
        for (std::size_t j = 0; j < last.cols(); ++j) s += row[j] * dbn.head.w[j];
        fp.output[i] = s;
    }
    return fp;
}

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx) {
    std::vector<double> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) out[r] = v[idx[r]];
    return out;
}

double dbn_step(Dbn& dbn, const Matrix& bx, std::span<const double> by, double lr) {
    DbnForward fp = dbn_forward(dbn, bx);
    const double m = static_cast<double>(bx.rows());
    double loss = 0.0;
    std::vector<double> d_out(bx.rows());
    for (std::size_t i = 0; i < d_out.size(); ++i) {
        const double e = fp.output[i] - by[i];
        loss += e * e;
        d_out[i] = 2.0 / m * e;
    }
    loss /= m;

    const Matrix& last = fp.activations.back();
    const std::vector<double> g_head_w = multiply_tvec(last, d_out);
    double g_head_b = 0.0;
    for (double d : d_out) g_head_b += d;

    Matrix delta(last.rows(), last.cols());
    for (std::size_t i = 0; i < last.rows(); ++i)
        for (std::size_t j = 0; j < last.cols(); ++j)
            delta(i, j) = d_out[i] * dbn.head.w[j];

    struct Grad {
        Matrix w;
        std::vector<double> b;
    };
    std::vector<Grad> grads(dbn.rbms.size());
    for (std::size_t l = dbn.rbms.size(); l-- > 0;) {
        const Matrix& act = fp.activations[l + 1];
        for (std::size_t i = 0; i < delta.size(); ++i)
            delta.data()[i] *= sigmoid_grad_from_output(act.data()[i]);
        grads[l].w = multiply_atb(delta, fp.activations[l]);
        grads[l].b = column_sums(delta);
        if (l > 0) delta = multiply(delta, dbn.rbms[l].w);
    }

    axpy(dbn.head.w, -lr, g_head_w);
    dbn.head.bias -= lr * g_head_b;
    for (std::size_t l = 0; l < dbn.rbms.size(); ++l) {
        axpy(dbn.rbms[l].w, -lr, grads[l].w);
        axpy(dbn.rbms[l].hidden_bias, -lr, grads[l].b);
    }
    return loss;
}

}  // namespace

void dbn_finetune_regression(Dbn& dbn, const Matrix& x, std::span<const double> y,
                             const DbnTrainConfig& cfg, RngStream& rng, TrainStats* stats) {
    if (x.rows() != y.size()) throw LengthMismatch(x.rows(), y.size(), "dbn_finetune_regression");
    if (x.cols() != dbn.input_width())
        throw WidthMismatch(dbn.input_width(), x.cols(), "dbn_finetune_regression");
    if (cfg.batch_size == 0) throw DataError("dbn_finetune_regression: batch size must be positive");

    double initial = 0.0;
    {
        const std::vector<double> pred = dbn_predict(dbn, x);
        for (std::size_t i = 0; i < pred.size(); ++i)
            initial += (pred[i] - y[i]) * (pred[i] - y[i]);
        initial /= static_cast<double>(pred.size());
    }

    double last_loss = initial;
    std::vector<std::size_t> perm = iota_indices(x.rows());
    for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        shuffle_indices(perm, rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, perm.size());
            const std::span<const std::size_t> idx{perm.data() + start, stop - start};
            const Matrix bx = gather_rows(x, idx);
            const std::vector<double> by = gather(y, idx);
            epoch_loss += dbn_step(dbn, bx, by, cfg.finetune_learning_rate);
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);
        if (!std::isfinite(epoch_loss) ||
            (initial > 0.0 && epoch_loss > kDivergenceFactor * initial))
            throw DivergedLoss(epoch_loss, "dbn fine-tune");
        last_loss = epoch_loss;
    }
    if (stats) {
        stats->final_loss = last_loss;
        stats->epochs = cfg.finetune_epochs;
    }
}

std::vector<double> dbn_predict(const Dbn& dbn, const Matrix& x) {
    if (x.cols() != dbn.input_width())
        throw WidthMismatch(dbn.input_width(), x.cols(), "dbn_predict");
    return dbn_forward(dbn, x).output;
}

}  // namespace atl
