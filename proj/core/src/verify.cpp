#include "atl/verify.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "atl/dbn.hpp"
#include "atl/metrics.hpp"
#include "atl/numerics.hpp"
#include "atl/oracle.hpp"
#include "atl/rng.hpp"

namespace atl {

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

}  // namespace

CriterionResult verify_gradient_correctness(std::uint64_t seed) {
    Stopwatch watch;
    const auto ae = oracle::check_ae_gradients(20, seed);
    const auto dbn = oracle::check_dbn_gradients(10, seed + 1);
    const double worst = std::max(ae.max_rel_error, dbn.max_rel_error);

    CriterionResult r;
    r.id = "AC-1";
    r.passed = worst < 1e-5 && watch.seconds() < 30.0;
    r.details = "max rel error: AE " + fmt(ae.max_rel_error) + " (" +
                std::to_string(ae.trials) + " configs), DBN " + fmt(dbn.max_rel_error) + " (" +
                std::to_string(dbn.trials) + " configs); tolerance 1e-5";
    r.seconds = watch.seconds();
    return r;
}

CriterionResult verify_rbm_exactness(std::uint64_t seed) {
    Stopwatch watch;
    RngStream rng(seed);
    double worst_conditional = 0.0;
    double worst_mass = 0.0;
    for (std::size_t trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + rng.next_below(5);                      // 1..5 visible
        const std::size_t n = 1 + rng.next_below(std::min<std::uint64_t>(5, 10 - m));
        Rbm rbm;
        rbm.w = Matrix(n, m);
        for (std::size_t i = 0; i < rbm.w.size(); ++i) rbm.w.data()[i] = rng.uniform(-2.0, 2.0);
        rbm.visible_bias.resize(m);
        rbm.hidden_bias.resize(n);
        for (double& b : rbm.visible_bias) b = rng.uniform(-1.0, 1.0);
        for (double& b : rbm.hidden_bias) b = rng.uniform(-1.0, 1.0);

        const auto exact = oracle::enumerate_rbm(rbm);
        std::vector<double> v(m), h(n);
        for (std::size_t vb = 0; vb < (std::size_t{1} << m); ++vb) {
            for (std::size_t i = 0; i < m; ++i) v[i] = (vb >> i) & 1 ? 1.0 : 0.0;
            const auto p = rbm_hidden_prob(rbm, v);
            for (std::size_t j = 0; j < n; ++j)
                worst_conditional = std::max(
                    worst_conditional, std::abs(p[j] - exact.hidden_conditionals[vb * n + j]));
        }
        for (std::size_t hb = 0; hb < (std::size_t{1} << n); ++hb) {
            for (std::size_t j = 0; j < n; ++j) h[j] = (hb >> j) & 1 ? 1.0 : 0.0;
            const auto p = rbm_visible_prob(rbm, h);
            for (std::size_t i = 0; i < m; ++i)
                worst_conditional = std::max(
                    worst_conditional, std::abs(p[i] - exact.visible_conditionals[hb * m + i]));
        }
        worst_mass =
            std::max(worst_mass, std::abs(rbm_exact_distribution(rbm).total() - 1.0));
    }
    CriterionResult r;
    r.id = "AC-2";
    r.passed = worst_conditional < 1e-12 && worst_mass < 1e-12 && watch.seconds() < 10.0;
    r.details = "50 RBMs: worst conditional gap " + fmt(worst_conditional) +
                ", worst probability-mass gap " + fmt(worst_mass) + "; tolerance 1e-12";
    r.seconds = watch.seconds();
    return r;
}

CriterionResult verify_metric_oracle(std::uint64_t seed) {
    Stopwatch watch;
    RngStream rng(seed);
    double worst = 0.0;
    double worst_decomposition = 0.0;
    for (std::size_t trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.next_below(127);
        std::vector<double> a(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform(-2.0, 2.0);
            p[i] = rng.uniform(-2.0, 2.0);
        }
        const auto naive = oracle::naive_metrics(a, p);
        worst = std::max(worst, std::abs(naive.rmse - rmse(a, p)));
        worst = std::max(worst, std::abs(naive.mae - mae(a, p)));
        worst = std::max(worst, std::abs(naive.sde - sde(a, p)));
        worst = std::max(worst, std::abs(*naive.pearson - pearson(a, p)));

        double err_mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) err_mean += a[i] - p[i];
        err_mean /= static_cast<double>(n);
        const double r = rmse(a, p), s = sde(a, p);
        worst_decomposition =
            std::max(worst_decomposition, std::abs(r * r - s * s - err_mean * err_mean));
    }
    CriterionResult r;
    r.id = "AC-3";
    r.passed = worst < 1e-12 && worst_decomposition < 1e-12;
    r.details = "1000 pairs: worst metric gap " + fmt(worst) + ", worst decomposition residual " +
                fmt(worst_decomposition) + "; tolerance 1e-12";
    r.seconds = watch.seconds();
    return r;
}

std::vector<CriterionResult> run_fast_verification(std::uint64_t seed) {
    return {verify_gradient_correctness(seed), verify_rbm_exactness(seed),
            verify_metric_oracle(seed)};
}

std::string verification_to_json(const std::vector<CriterionResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const CriterionResult& r : results) {
        arr.push_back({{"id", r.id},
                       {"passed", r.passed},
                       {"details", r.details},
                       {"seconds", r.seconds}});
        all = all && r.passed;
    }
    return nlohmann::json{{"criteria", arr}, {"all_passed", all}}.dump(2) + "\n";
}

}  // namespace atl
