#include "atl/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "atl/error.hpp"
#include "atl/rng.hpp"

namespace atl {

namespace {

std::array<std::string, kNumChannels> make_channel_names() {
    std::array<std::string, kNumChannels> names;
    names[0] = "power";
    static const char* comp[kComponentsPerLead] = {"zs", "ms", "dw", "sw"};
    for (std::size_t L = 0; L < kLeadHours.size(); ++L)
        for (std::size_t c = 0; c < kComponentsPerLead; ++c)
            names[1 + L * kComponentsPerLead + c] =
                std::string(comp[c]) + "_" + std::to_string(kLeadHours[L]);
    return names;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

double wrap_degrees(double d) {
    d = std::fmod(d, 360.0);
    if (d < 0.0) d += 360.0;
    return d;
}

}  // namespace

const std::array<std::string, kNumChannels>& channel_names() {
    static const auto names = make_channel_names();
    return names;
}

std::string csv_header() {
    std::string h = "hour";
    for (const auto& n : channel_names()) {
        h += ',';
        h += n;
    }
    return h;
}

std::string to_string(Measurand m) { return m == Measurand::Power ? "power" : "speed"; }

Measurand measurand_from_string(const std::string& s) {
    if (s == "power") return Measurand::Power;
    if (s == "speed") return Measurand::Speed;
    throw DataError("unknown measurand '" + s + "', expected 'power' or 'speed'");
}

double NormParams::to_unit(std::size_t channel, double value) const {
    const ChannelNorm& c = channels[channel];
    if (c.degenerate) return 0.0;
    return (value - c.min) / (c.max - c.min);
}

double NormParams::from_unit(std::size_t channel, double value) const {
    const ChannelNorm& c = channels[channel];
    if (c.degenerate) return c.min;
    return value * (c.max - c.min) + c.min;
}

WindFarmSeries::WindFarmSeries(std::string farm_id, std::int64_t start_hour, std::size_t n_rows)
    : farm_id_(std::move(farm_id)), start_hour_(start_hour), n_rows_(n_rows) {
    for (auto& ch : channels_) ch.assign(n_rows, 0.0);
}

WindFarmRecord WindFarmSeries::record(std::size_t row) const {
    WindFarmRecord r;
    r.hour = start_hour_ + static_cast<std::int64_t>(row);
    r.measurement = channels_[0][row];
    for (std::size_t L = 0; L < kLeadHours.size(); ++L) {
        r.leads[L].zonal = channels_[lead_channel(L, LeadComponent::Zonal)][row];
        r.leads[L].meridional = channels_[lead_channel(L, LeadComponent::Meridional)][row];
        r.leads[L].direction = channels_[lead_channel(L, LeadComponent::Direction)][row];
        r.leads[L].speed = channels_[lead_channel(L, LeadComponent::Speed)][row];
    }
    return r;
}

void WindFarmSeries::set_norm_state(bool normalized, std::optional<NormParams> params) {
    normalized_ = normalized;
    norm_ = std::move(params);
}

WindFarmSeries load_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    // Header must match the documented schema column for column.
    {
        std::stringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ',') || field != "hour") throw MissingColumn("hour");
        for (const auto& expected : channel_names()) {
            if (!std::getline(ss, field, ',') || field != expected)
                throw MissingColumn(expected);
        }
    }

    std::vector<std::int64_t> hours;
    std::array<std::vector<double>, kNumChannels> cols;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0;
        auto next_field = [&](const std::string& column) -> std::string_view {
            if (pos > line.size()) throw MissingColumn(column);
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            std::string_view f(line.data() + pos, comma - pos);
            pos = comma + 1;
            return f;
        };

        const std::string_view hour_field = next_field("hour");
        std::int64_t hour = 0;
        {
            auto [p, ec] = std::from_chars(hour_field.data(), hour_field.data() + hour_field.size(), hour);
            if (ec != std::errc{} || p != hour_field.data() + hour_field.size())
                throw NonNumericCell(row, "hour");
        }
        hours.push_back(hour);

        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const std::string& column = channel_names()[c];
            const std::string_view f = next_field(column);
            double v = 0.0;
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(v))
                throw NonNumericCell(row, column);
            cols[c].push_back(v);
        }
        ++row;
    }
    if (hours.empty()) throw DataError("'" + path.string() + "' has no data rows");

    for (std::size_t i = 1; i < hours.size(); ++i)
        if (hours[i] != hours[i - 1] + 1) throw GapInTimestamps(i);

    // Channel range checks.
    for (std::size_t L = 0; L < kLeadHours.size(); ++L) {
        const std::size_t dw = lead_channel(L, LeadComponent::Direction);
        const std::size_t sw = lead_channel(L, LeadComponent::Speed);
        for (std::size_t i = 0; i < hours.size(); ++i) {
            if (cols[dw][i] < 0.0 || cols[dw][i] >= 360.0)
                throw ValueOutOfRange(i, channel_names()[dw], "direction must be in [0, 360)");
            if (cols[sw][i] < 0.0)
                throw ValueOutOfRange(i, channel_names()[sw], "speed must be >= 0");
        }
    }

    WindFarmSeries series(path.stem().string(), hours.front(), hours.size());
    for (std::size_t c = 0; c < kNumChannels; ++c) series.channel_mut(c) = std::move(cols[c]);
    return series;
}

void save_series_csv(const WindFarmSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << csv_header() << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << (series.start_hour() + static_cast<std::int64_t>(i));
        for (std::size_t c = 0; c < kNumChannels; ++c)
            out << ',' << format_double(series.channel(c)[i]);
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::pair<WindFarmSeries, NormParams> normalize(const WindFarmSeries& series,
                                                std::size_t fit_rows) {
    if (series.normalized()) throw DataError("normalize: series is already normalized");
    if (series.size() == 0) throw EmptyInput("normalize");
    if (fit_rows == 0 || fit_rows > series.size()) fit_rows = series.size();

    NormParams params;
    params.fit_rows = fit_rows;
    WindFarmSeries out(series.farm_id(), series.start_hour(), series.size());
    out.set_measurand(series.measurand());

    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto src = series.channel(c);
        auto& ch = params.channels[c];
        ch.min = src[0];
        ch.max = src[0];
        for (std::size_t i = 1; i < fit_rows; ++i) {
            ch.min = std::min(ch.min, src[i]);
            ch.max = std::max(ch.max, src[i]);
        }
        ch.degenerate = (ch.max == ch.min);
        auto& dst = out.channel_mut(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = params.to_unit(c, src[i]);
    }
    out.set_norm_state(true, params);
    return {std::move(out), params};
}

WindFarmSeries apply_normalization(const WindFarmSeries& series, const NormParams& params) {
    if (series.normalized()) throw DataError("apply_normalization: series is already normalized");
    WindFarmSeries out(series.farm_id(), series.start_hour(), series.size());
    out.set_measurand(series.measurand());
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto src = series.channel(c);
        auto& dst = out.channel_mut(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = params.to_unit(c, src[i]);
    }
    out.set_norm_state(true, params);
    return out;
}

WindFarmSeries denormalize(const WindFarmSeries& series) {
    if (!series.normalized() || !series.norm_params())
        throw DataError("denormalize: series has no normalization parameters");
    const NormParams& params = *series.norm_params();
    WindFarmSeries out(series.farm_id(), series.start_hour(), series.size());
    out.set_measurand(series.measurand());
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto src = series.channel(c);
        auto& dst = out.channel_mut(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = params.from_unit(c, src[i]);
    }
    return out;
}

std::size_t SplitAccessLog::count(Window w, AccessPurpose p) const {
    std::size_t n = 0;
    for (const auto& e : events)
        if (e.window == w && e.purpose == p) ++n;
    return n;
}

const char* window_name(Window w) {
    switch (w) {
        case Window::DS3: return "ds3";
        case Window::DS4: return "ds4";
        case Window::DS5: return "ds5";
        case Window::DS6: return "ds6";
        case Window::DS7: return "ds7";
    }
    return "?";
}

DatasetSplit::DatasetSplit(std::size_t hours_per_month, std::size_t total_rows)
    : hours_per_month_(hours_per_month), total_rows_(total_rows) {}

RowRange DatasetSplit::range(Window w, AccessPurpose purpose) const {
    if (log_) log_->events.push_back({w, purpose});
    const std::size_t m = hours_per_month_;
    switch (w) {
        case Window::DS3: return {0, 4 * m};
        case Window::DS4: return {0, 8 * m};
        case Window::DS5: return {0, 12 * m};
        case Window::DS6: return {12 * m, 16 * m};
        case Window::DS7: return {16 * m, 20 * m};
    }
    throw DataError("unknown window");
}

DatasetSplit split_adaptive(const WindFarmSeries& series, std::size_t hours_per_month) {
    if (hours_per_month == 0) throw DataError("split_adaptive: hours_per_month must be positive");
    const std::size_t required = 20 * hours_per_month;
    if (series.size() < required) throw SeriesTooShort(required, series.size());
    return DatasetSplit(hours_per_month, series.size());
}

void SynthConfig::validate() const {
    if (n_farms == 0) throw DataError("synth: n_farms must be >= 1");
    if (months == 0 || hours_per_month == 0) throw DataError("synth: empty horizon");
    if (!(power_coefficient > 0.0 && power_coefficient < 16.0 / 27.0))
        throw DataError("synth: power coefficient must be in (0, 16/27)");
    if (correlation < 0.0 || correlation > 1.0)
        throw DataError("synth: correlation must be in [0, 1]");
    if (noise < 0.0) throw DataError("synth: noise must be >= 0");
    if (air_density <= 0.0 || rotor_area <= 0.0) throw DataError("synth: rho and A must be positive");
}

namespace {

/// AR(1) path with uniform innovations scaled so the stationary std equals
/// `stationary_std`, for |ar| < 1. Starts at 0.
std::vector<double> ar1_path(std::size_t n, double ar, double stationary_std, RngStream& rng) {
    std::vector<double> x(n, 0.0);
    // var(uniform(-1,1)) = 1/3, so innovation scale s gives stationary
    // variance s^2 / (3 (1 - ar^2)).
    const double s = stationary_std * std::sqrt(3.0 * std::max(1e-12, 1.0 - ar * ar));
    double prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        prev = ar * prev + s * rng.uniform(-1.0, 1.0);
        x[t] = prev;
    }
    return x;
}

double percentile_99(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(values.size()))) - 1;
    return values[std::min(idx, values.size() - 1)];
}

}  // namespace

std::vector<WindFarmSeries> synth_generate(const SynthConfig& config) {
    config.validate();
    const std::size_t n = config.months * config.hours_per_month;
    RngStream root(config.seed);

    // Shared latent factors, drawn once so that per-farm output does not
    // depend on how many farms are requested.
    RngStream shared_rng = root.derive(0);
    const std::vector<double> shared_speed =
        ar1_path(n, config.ar_coefficient, config.speed_volatility, shared_rng);
    const std::vector<double> shared_dir = ar1_path(n, config.ar_coefficient, 1.0, shared_rng);

    std::vector<WindFarmSeries> farms;
    farms.reserve(config.n_farms);
    const double c = config.correlation;

    for (std::size_t f = 0; f < config.n_farms; ++f) {
        RngStream rng = root.derive(f + 1);
        const std::vector<double> own_speed =
            ar1_path(n, config.ar_coefficient, config.speed_volatility, rng);
        const std::vector<double> own_dir = ar1_path(n, config.ar_coefficient, 1.0, rng);

        WindFarmSeries series("farm" + std::to_string(f + 1), 0, n);
        series.set_measurand(config.measurand);

        std::vector<double> speed(n), direction(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double diurnal = config.diurnal_amplitude *
                std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0);
            const double factor = c * shared_speed[t] + (1.0 - c) * own_speed[t];
            speed[t] = std::max(0.0, config.mean_speed + diurnal + factor);
            const double dir_factor = c * shared_dir[t] + (1.0 - c) * own_dir[t];
            direction[t] = wrap_degrees(180.0 + 60.0 * dir_factor);
        }

        const double betz = 0.5 * config.air_density * config.rotor_area * config.power_coefficient;
        std::vector<double> cubic(n);
        for (std::size_t t = 0; t < n; ++t) cubic[t] = betz * speed[t] * speed[t] * speed[t];
        const double rated = percentile_99(cubic);

        auto& measurement = series.channel_mut(measurement_channel());
        for (std::size_t t = 0; t < n; ++t) {
            if (config.measurand == Measurand::Power) {
                const double jitter = config.noise * rated * rng.uniform(-1.0, 1.0);
                measurement[t] = std::clamp(cubic[t] + jitter, 0.0, rated);
            } else {
                const double jitter =
                    config.noise * std::max(1.0, config.mean_speed) * rng.uniform(-1.0, 1.0);
                measurement[t] = std::max(0.0, speed[t] + jitter);
            }
        }

        const double speed_ref = std::max(1.0, config.mean_speed);
        for (std::size_t L = 0; L < kLeadHours.size(); ++L) {
            const double lead_scale = static_cast<double>(kLeadHours[L]) / 12.0;
            auto& zs = series.channel_mut(lead_channel(L, LeadComponent::Zonal));
            auto& ms = series.channel_mut(lead_channel(L, LeadComponent::Meridional));
            auto& dw = series.channel_mut(lead_channel(L, LeadComponent::Direction));
            auto& sw = series.channel_mut(lead_channel(L, LeadComponent::Speed));
            for (std::size_t t = 0; t < n; ++t) {
                const double s_noise =
                    config.noise * lead_scale * speed_ref * rng.uniform(-1.0, 1.0);
                const double d_noise = config.noise * lead_scale * 30.0 * rng.uniform(-1.0, 1.0);
                const double s_f = std::max(0.0, speed[t] + s_noise);
                const double d_f = wrap_degrees(direction[t] + d_noise);
                const double rad = d_f * std::numbers::pi / 180.0;
                zs[t] = s_f * std::cos(rad);
                ms[t] = s_f * std::sin(rad);
                dw[t] = d_f;
                sw[t] = s_f;
            }
        }
        farms.push_back(std::move(series));
    }
    return farms;
}

}  // namespace atl
