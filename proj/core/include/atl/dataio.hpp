#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace atl {

inline constexpr std::array<int, 4> kLeadHours{12, 24, 36, 48};
inline constexpr std::size_t kComponentsPerLead = 4;  // zonal, meridional, direction, speed
inline constexpr std::size_t kNumChannels = 1 + kLeadHours.size() * kComponentsPerLead;

enum class LeadComponent : std::size_t { Zonal = 0, Meridional = 1, Direction = 2, Speed = 3 };

/// Channel 0 is the measurement column; forecast channels follow grouped by
/// lead time: zs_12, ms_12, dw_12, sw_12, zs_24, ...
inline constexpr std::size_t measurement_channel() { return 0; }
inline constexpr std::size_t lead_channel(std::size_t lead_index, LeadComponent c) {
    return 1 + lead_index * kComponentsPerLead + static_cast<std::size_t>(c);
}

const std::array<std::string, kNumChannels>& channel_names();
std::string csv_header();

/// What the measurement column holds: wind power (the default task) or
/// measured wind speed (the cross-task datasets).
enum class Measurand { Power, Speed };

std::string to_string(Measurand m);
Measurand measurand_from_string(const std::string& s);

struct LeadForecast {
    double zonal = 0.0;
    double meridional = 0.0;
    double direction = 0.0;  // degrees, [0, 360)
    double speed = 0.0;      // m/s, >= 0
};

struct WindFarmRecord {
    std::int64_t hour = 0;
    double measurement = 0.0;
    std::array<LeadForecast, kLeadHours.size()> leads;
};

struct ChannelNorm {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = false;  // max == min; channel was zeroed
};

struct NormParams {
    std::array<ChannelNorm, kNumChannels> channels;
    std::size_t fit_rows = 0;  // rows the min/max were computed on

    double to_unit(std::size_t channel, double value) const;
    double from_unit(std::size_t channel, double value) const;
};

/// Hourly multi-channel series for one farm. Timestamps are implicit:
/// start_hour, start_hour + 1, ... with no gaps.
class WindFarmSeries {
public:
    WindFarmSeries() = default;
    WindFarmSeries(std::string farm_id, std::int64_t start_hour, std::size_t n_rows);

    const std::string& farm_id() const { return farm_id_; }
    void set_farm_id(std::string id) { farm_id_ = std::move(id); }
    std::int64_t start_hour() const { return start_hour_; }
    std::size_t size() const { return n_rows_; }

    std::span<const double> channel(std::size_t c) const { return channels_[c]; }
    std::vector<double>& channel_mut(std::size_t c) { return channels_[c]; }
    std::span<const double> measurement() const { return channels_[measurement_channel()]; }

    WindFarmRecord record(std::size_t row) const;

    bool normalized() const { return normalized_; }
    Measurand measurand() const { return measurand_; }
    void set_measurand(Measurand m) { measurand_ = m; }
    const std::optional<NormParams>& norm_params() const { return norm_; }
    void set_norm_state(bool normalized, std::optional<NormParams> params);

private:
    std::string farm_id_;
    std::int64_t start_hour_ = 0;
    std::size_t n_rows_ = 0;
    std::array<std::vector<double>, kNumChannels> channels_;
    bool normalized_ = false;
    Measurand measurand_ = Measurand::Power;
    std::optional<NormParams> norm_;
};

/// Parses the documented CSV schema, verifying hourly continuity and channel
/// ranges. Throws MissingColumn / GapInTimestamps / NonNumericCell /
/// ValueOutOfRange, each naming the offending row or column.
WindFarmSeries load_series(const std::filesystem::path& path);

void save_series_csv(const WindFarmSeries& series, const std::filesystem::path& path);

/// Min-max normalization per channel. When fit_rows > 0 the min/max come from
/// the first fit_rows rows only (the training months) and are applied to the
/// whole series. Channels with max == min are zeroed and flagged degenerate.
std::pair<WindFarmSeries, NormParams> normalize(const WindFarmSeries& series,
                                                std::size_t fit_rows = 0);

/// Exact inverse of normalize; degenerate channels recover their constant.
WindFarmSeries denormalize(const WindFarmSeries& series);

/// Normalizes with previously fitted parameters, e.g. when evaluating a
/// saved model on a freshly loaded dataset.
WindFarmSeries apply_normalization(const WindFarmSeries& series, const NormParams& params);

enum class Window { DS3, DS4, DS5, DS6, DS7 };
enum class AccessPurpose { Training, Evaluation };

const char* window_name(Window w);

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct SplitAccess {
    Window window;
    AccessPurpose purpose;
};

/// Records every materialization of a window so tests can prove that no
/// training phase ever touched the DS7 rows.
struct SplitAccessLog {
    std::vector<SplitAccess> events;
    std::size_t count(Window w, AccessPurpose p) const;
};

/// The rolling dataset windows: DS3 = months 1-4, DS4 = months 1-8,
/// DS5 = months 1-12 (base training, prefix-nested), DS6 = months 13-16
/// (meta training), DS7 = months 17-20 (held-out test).
class DatasetSplit {
public:
    DatasetSplit() = default;
    DatasetSplit(std::size_t hours_per_month, std::size_t total_rows);

    std::size_t hours_per_month() const { return hours_per_month_; }

    /// Window row range; records the access when a log is attached.
    RowRange range(Window w, AccessPurpose purpose) const;

    void attach_log(std::shared_ptr<SplitAccessLog> log) { log_ = std::move(log); }

private:
    std::size_t hours_per_month_ = 0;
    std::size_t total_rows_ = 0;
    std::shared_ptr<SplitAccessLog> log_;
};

/// Throws SeriesTooShort unless the series covers 20 months.
DatasetSplit split_adaptive(const WindFarmSeries& series, std::size_t hours_per_month);

struct SynthConfig {
    std::size_t n_farms = 5;
    std::size_t months = 20;
    std::size_t hours_per_month = 720;
    std::uint64_t seed = 0;
    double air_density = 1.225;      // rho, kg/m^3
    double rotor_area = 1000.0;      // A, m^2
    double power_coefficient = 0.4;  // c_p, must stay below the Betz limit 16/27
    double correlation = 0.8;        // weight of the shared latent factor, [0, 1]
    double noise = 0.05;             // measurement / forecast noise level
    double mean_speed = 9.0;         // m/s
    double diurnal_amplitude = 2.0;  // m/s
    double speed_volatility = 1.5;   // stationary std of the AR(1) factor, m/s
    double ar_coefficient = 0.97;
    Measurand measurand = Measurand::Power;

    void validate() const;
};

/// Deterministic synthetic multi-farm dataset. Wind speed is an AR(1)-plus-
/// diurnal process mixing a shared latent factor (weight: correlation) with a
/// per-farm factor; power follows the speed cubically, clipped at the 99th
/// percentile of the noiseless curve; forecast channels repeat the future
/// truth plus lead-proportional noise.
std::vector<WindFarmSeries> synth_generate(const SynthConfig& config);

}  // namespace atl
