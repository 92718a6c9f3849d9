#include "atl/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "atl/error.hpp"

namespace atl {

namespace {

std::vector<std::size_t> bin_indices(std::span<const double> v, std::size_t bins) {
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<std::size_t> idx(v.size(), 0);
    if (hi == lo) return idx;  // constant variable: all mass in one bin
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto b = static_cast<std::size_t>((v[i] - lo) * scale);
        idx[i] = std::min(b, bins - 1);
    }
    return idx;
}

}  // namespace

double mutual_information(std::span<const double> x, std::span<const double> y,
                          std::size_t bins) {
    if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size(), "mutual_information");
    if (x.size() < 2) throw DataError("mutual_information: need at least 2 samples");
    if (bins < 2) throw DataError("mutual_information: need at least 2 bins");

    const auto bx = bin_indices(x, bins);
    const auto by = bin_indices(y, bins);
    std::vector<double> joint(bins * bins, 0.0);
    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        joint[bx[i] * bins + by[i]] += inv_n;
        px[bx[i]] += inv_n;
        py[by[i]] += inv_n;
    }
    double mi = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        for (std::size_t j = 0; j < bins; ++j) {
            const double p = joint[i * bins + j];
            if (p > 0.0) mi += p * std::log(p / (px[i] * py[j]));
        }
    }
    return std::max(0.0, mi);
}

MIScore select_lead_time(const WindFarmSeries& series, std::size_t bins) {
    if (!series.normalized())
        throw DataError("select_lead_time: series must be normalized first");
    const auto target = series.measurement();

    MIScore best;
    best.bins = bins;
    for (std::size_t L = 0; L < kLeadHours.size(); ++L) {
        double sum = 0.0;
        for (std::size_t c = 0; c < kComponentsPerLead; ++c) {
            const auto ch = series.channel(lead_channel(L, static_cast<LeadComponent>(c)));
            sum += mutual_information(ch, target, bins);
        }
        const double score = sum / static_cast<double>(kComponentsPerLead);
        if (L == 0 || score > best.score) {
            best.lead_hours = kLeadHours[L];
            best.score = score;
        }
    }
    return best;
}

FeatureMatrix build_lagged_features(const WindFarmSeries& series, int lead_hours,
                                    Measurand target) {
    if (series.size() <= kTargetLags) throw SeriesTooShort(kTargetLags + 1, series.size());
    const auto lead_it = std::find(kLeadHours.begin(), kLeadHours.end(), lead_hours);
    if (lead_it == kLeadHours.end())
        throw DataError("build_lagged_features: unknown lead time " + std::to_string(lead_hours));
    const auto L = static_cast<std::size_t>(lead_it - kLeadHours.begin());

    FeatureMatrix out;
    out.lead_hours = lead_hours;
    out.target = target;
    out.first_target_row = kTargetLags;

    const char target_letter = target == Measurand::Power ? 'P' : 'S';
    out.column_labels.reserve(kFeatureColumns);
    for (std::size_t k = 1; k <= kTargetLags; ++k)
        out.column_labels.push_back(std::string(1, target_letter) + "(t-" + std::to_string(k) + ")");
    static const char* weather[kComponentsPerLead] = {"Dw", "Zs", "Ms", "Sw"};
    static const LeadComponent order[kComponentsPerLead] = {
        LeadComponent::Direction, LeadComponent::Zonal, LeadComponent::Meridional,
        LeadComponent::Speed};
    for (std::size_t c = 0; c < kComponentsPerLead; ++c) {
        out.column_labels.push_back(std::string(weather[c]) + "(t)");
        for (std::size_t k = 1; k < kWeatherLags; ++k)
            out.column_labels.push_back(std::string(weather[c]) + "(t-" + std::to_string(k) + ")");
    }

    const auto measurement = series.measurement();
    const std::size_t n_rows = series.size() - kTargetLags;
    out.x = Matrix(n_rows, kFeatureColumns);
    out.y.resize(n_rows);

    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t t = r + kTargetLags;
        double* row = out.x.data() + r * kFeatureColumns;
        std::size_t col = 0;
        for (std::size_t k = 1; k <= kTargetLags; ++k) row[col++] = measurement[t - k];
        for (std::size_t c = 0; c < kComponentsPerLead; ++c) {
            const auto ch = series.channel(lead_channel(L, order[c]));
            for (std::size_t k = 0; k < kWeatherLags; ++k) row[col++] = ch[t - k];
        }
        out.y[r] = measurement[t];
    }
    return out;
}

RowRange feature_rows_for(const FeatureMatrix& features, RowRange series_rows) {
    const std::size_t lags = features.first_target_row;
    const std::size_t begin = series_rows.begin > lags ? series_rows.begin - lags : 0;
    if (series_rows.end <= lags)
        throw SeriesTooShort(lags + 1, series_rows.end);
    const std::size_t end = std::min(series_rows.end - lags, features.x.rows());
    return {begin, end};
}

void save_features_csv(const FeatureMatrix& features, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < features.column_labels.size(); ++c) {
        if (c) out << ',';
        out << features.column_labels[c];
    }
    out << ",target\n";
    char buf[32];
    auto put = [&](double v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, end - buf);
    };
    for (std::size_t r = 0; r < features.x.rows(); ++r) {
        for (std::size_t c = 0; c < features.x.cols(); ++c) {
            if (c) out << ',';
            put(features.x(r, c));
        }
        out << ',';
        put(features.y[r]);
        out << '\n';
    }
}

}  // namespace atl
