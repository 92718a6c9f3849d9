#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "atl/dataio.hpp"
#include "atl/error.hpp"
#include "atl/features.hpp"
#include "atl/rng.hpp"

using namespace atl;

namespace {

/// Raw series with a wandering measurement channel and controllable lead
/// channels; leads default to noisy copies of the measurement.
WindFarmSeries make_series(std::size_t n, std::uint64_t seed, double lead_noise = 0.1) {
    RngStream rng(seed);
    WindFarmSeries s("fixture", 0, n);
    auto& power = s.channel_mut(measurement_channel());
    double level = 0.5;
    for (std::size_t t = 0; t < n; ++t) {
        level = 0.9 * level + rng.uniform(-0.1, 0.1);
        power[t] = 10.0 + 5.0 * level;
    }
    for (std::size_t L = 0; L < kLeadHours.size(); ++L) {
        for (std::size_t c = 0; c < kComponentsPerLead; ++c) {
            auto& ch = s.channel_mut(lead_channel(L, static_cast<LeadComponent>(c)));
            for (std::size_t t = 0; t < n; ++t) {
                const double v = power[t] + lead_noise * rng.uniform(-1.0, 1.0);
                ch[t] = c == static_cast<std::size_t>(LeadComponent::Direction)
                            ? std::fmod(std::abs(v) * 10.0, 360.0)
                            : std::abs(v);
            }
        }
    }
    return s;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("MI of a variable with itself equals its histogram entropy") {
    RngStream rng(3);
    std::vector<double> x(1000);
    std::array<std::size_t, 4> counts{};
    for (auto& v : x) {
        const auto k = rng.next_below(4);
        counts[k]++;
        v = static_cast<double>(k);
    }
    double entropy = 0.0;
    for (const std::size_t c : counts) {
        const double p = static_cast<double>(c) / 1000.0;
        entropy -= p * std::log(p);
    }
    const double mi = mutual_information(x, x, 4);
    CHECK(mi == doctest::Approx(entropy).epsilon(1e-12));
    CHECK(mi == doctest::Approx(std::log(4.0)).epsilon(0.01));
}

TEST_CASE("MI of independent uniforms is near zero") {
    RngStream rng(17);
    std::vector<double> x(10000), y(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_unit();
        y[i] = rng.next_unit();
    }
    CHECK(mutual_information(x, y, 8) < 0.02);
}

TEST_CASE("MI with a constant variable is zero") {
    std::vector<double> x(100, 3.0), y(100);
    RngStream rng(5);
    for (auto& v : y) v = rng.next_unit();
    CHECK(mutual_information(x, y, 8) == 0.0);
}

TEST_CASE("MI is symmetric") {
    RngStream rng(23);
    std::vector<double> x(500), y(500);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_unit();
        y[i] = 0.7 * x[i] + 0.3 * rng.next_unit();
    }
    CHECK(std::abs(mutual_information(x, y, 16) - mutual_information(y, x, 16)) < 1e-12);
}

TEST_CASE("MI is invariant under strictly monotone rescaling") {
    RngStream rng(29);
    std::vector<double> x(800), y(800), x2(800);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_unit();
        y[i] = x[i] * x[i] + 0.1 * rng.next_unit();
        x2[i] = 2.0 * x[i] + 1.0;
    }
    CHECK(mutual_information(x, y, 16) ==
          doctest::Approx(mutual_information(x2, y, 16)).epsilon(1e-12));
}

TEST_CASE("MI never exceeds either marginal entropy") {
    RngStream rng(31);
    std::vector<double> x(2000), y(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_unit();
        y[i] = 0.6 * x[i] + 0.4 * rng.next_unit();
    }
    const double hx = mutual_information(x, x, 16);  // MI(x,x) = H(x)
    const double hy = mutual_information(y, y, 16);
    const double mi = mutual_information(x, y, 16);
    CHECK(mi <= std::min(hx, hy) + 1e-12);
    CHECK(mi >= 0.0);
}

TEST_CASE("MI rejects mismatched lengths") {
    CHECK_THROWS_AS(mutual_information(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}, 4),
                    LengthMismatch);
}

TEST_CASE("select_lead_time picks the informative lead") {
    // 12h channels follow the measurement; the other leads are pure noise.
    WindFarmSeries s = make_series(2000, 7);
    RngStream rng(99);
    for (std::size_t L = 1; L < kLeadHours.size(); ++L)
        for (std::size_t c = 0; c < kComponentsPerLead; ++c) {
            auto& ch = s.channel_mut(lead_channel(L, static_cast<LeadComponent>(c)));
            for (auto& v : ch)
                v = c == static_cast<std::size_t>(LeadComponent::Direction)
                        ? rng.uniform(0.0, 360.0)
                        : rng.uniform(0.0, 20.0);
        }
    auto [normalized, params] = normalize(s);
    const MIScore score = select_lead_time(normalized, 16);
    CHECK(score.lead_hours == 12);
    CHECK(score.score > 0.0);
}

TEST_CASE("identical leads tie-break to the smallest") {
    WindFarmSeries s = make_series(1000, 11, 0.0);
    auto [normalized, params] = normalize(s);
    CHECK(select_lead_time(normalized, 16).lead_hours == 12);
}

TEST_CASE("constant measurement gives zero scores and lead 12") {
    WindFarmSeries s = make_series(500, 13);
    auto& power = s.channel_mut(measurement_channel());
    std::fill(power.begin(), power.end(), 4.2);
    auto [normalized, params] = normalize(s);
    const MIScore score = select_lead_time(normalized, 16);
    CHECK(score.lead_hours == 12);
    CHECK(score.score == 0.0);
}

TEST_CASE("select_lead_time requires a normalized series") {
    const WindFarmSeries s = make_series(200, 3);
    CHECK_THROWS_AS(select_lead_time(s, 16), DataError);
}

TEST_CASE("lagged features have the documented shape") {
    WindFarmSeries s = make_series(14400, 19);
    auto [normalized, params] = normalize(s);
    const FeatureMatrix f = build_lagged_features(normalized, 12);
    CHECK(f.x.rows() == 14376);
    CHECK(f.x.cols() == 124);
    CHECK(f.x.cols() == kFeatureColumns);
    CHECK(f.column_labels.size() == 124);
    CHECK(f.y.size() == 14376);
}

TEST_CASE("row indexing: P(t-1) of the first row is the measurement at hour 23") {
    WindFarmSeries s = make_series(100, 23);
    auto [normalized, params] = normalize(s);
    const FeatureMatrix f = build_lagged_features(normalized, 12);
    // Row 0 targets hour 24 (the 25th hour); its first column is P(t-1).
    CHECK(f.column_labels[0] == "P(t-1)");
    CHECK(f.x(0, 0) == normalized.measurement()[23]);
    CHECK(f.y[0] == normalized.measurement()[24]);
    CHECK(f.column_labels[23] == "P(t-24)");
    CHECK(f.x(0, 23) == normalized.measurement()[0]);
    CHECK(f.column_labels[24] == "Dw(t)");
    CHECK(f.x(0, 24) == normalized.channel(lead_channel(0, LeadComponent::Direction))[24]);
}

TEST_CASE("a 24-hour series is too short for lagging") {
    const WindFarmSeries s = make_series(24, 31);
    CHECK_THROWS_AS(build_lagged_features(s, 12), SeriesTooShort);
}

TEST_CASE("no data leak: future perturbations cannot reach a row") {
    WindFarmSeries s = make_series(200, 37);
    auto [normalized, params] = normalize(s);
    const FeatureMatrix base = build_lagged_features(normalized, 12);

    const std::size_t t = 100;           // series hour
    const std::size_t row = t - 24;      // feature row targeting hour t
    WindFarmSeries perturbed_raw = make_series(200, 37);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        auto& ch = perturbed_raw.channel_mut(c);
        for (std::size_t u = t + 1; u < ch.size(); ++u) ch[u] += 100.0;
    }
    const WindFarmSeries perturbed = apply_normalization(perturbed_raw, params);
    const FeatureMatrix shifted = build_lagged_features(perturbed, 12);
    for (std::size_t c = 0; c < base.x.cols(); ++c) CHECK(shifted.x(row, c) == base.x(row, c));
    CHECK(shifted.y[row] == base.y[row]);
}

TEST_CASE("no data leak: present/future power never enters the lag block") {
    WindFarmSeries s = make_series(200, 41);
    auto [normalized, params] = normalize(s);
    const FeatureMatrix base = build_lagged_features(normalized, 12);

    const std::size_t t = 80;
    const std::size_t row = t - 24;
    WindFarmSeries perturbed_raw = make_series(200, 41);
    auto& power = perturbed_raw.channel_mut(measurement_channel());
    for (std::size_t u = t; u < power.size(); ++u) power[u] += 50.0;
    const WindFarmSeries perturbed = apply_normalization(perturbed_raw, params);
    const FeatureMatrix shifted = build_lagged_features(perturbed, 12);
    for (std::size_t c = 0; c < 24; ++c)  // the 24 target-lag columns
        CHECK(shifted.x(row, c) == base.x(row, c));
    CHECK(shifted.y[row] != base.y[row]);  // the target itself does change
}

TEST_CASE("lead selection is deterministic") {
    WindFarmSeries s = make_series(1500, 43);
    auto [normalized, params] = normalize(s);
    CHECK(select_lead_time(normalized, 16).lead_hours ==
          select_lead_time(normalized, 16).lead_hours);
}

TEST_CASE("feature export writes header and rows") {
    WindFarmSeries s = make_series(60, 47);
    auto [normalized, params] = normalize(s);
    const FeatureMatrix f = build_lagged_features(normalized, 24);
    const auto path = std::filesystem::temp_directory_path() / "atl_tests" / "features.csv";
    std::filesystem::create_directories(path.parent_path());
    save_features_csv(f, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.starts_with("P(t-1),"));
    CHECK(header.ends_with(",target"));
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == f.x.rows());
}

TEST_CASE("feature_rows_for maps series windows onto feature rows") {
    WindFarmSeries s = make_series(200, 53);
    auto [normalized, params] = normalize(s);
    const FeatureMatrix f = build_lagged_features(normalized, 12);
    const RowRange r1 = feature_rows_for(f, {0, 100});
    CHECK(r1.begin == 0);
    CHECK(r1.end == 76);
    const RowRange r2 = feature_rows_for(f, {100, 200});
    CHECK(r2.begin == 76);
    CHECK(r2.end == 176);
}

}
