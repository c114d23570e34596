#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace scarcegan {

// One observed counter over 15..45 daily points. Day indices are strictly
// increasing integers; gaps are linearly interpolated before fitting.
struct FeatureSeries {
    std::vector<double> days;
    std::vector<double> values;
    std::string counter;

    void validate() const;
};

// Continuous piecewise-linear trend with evenly spaced candidate
// changepoints and rate deltas shrunk toward zero.
struct TrendFit {
    double intercept = 0.0;
    double base_slope = 0.0;               // growth rate
    std::vector<double> changepoints;      // candidate day positions
    std::vector<double> rate_deltas;       // slope change at each candidate
    std::vector<double> segment_slopes;    // base + running delta sums
    std::vector<double> grid_days;         // regularized daily grid
    std::vector<double> fitted;            // trend evaluated on the grid
    std::vector<double> residual;          // detrended values on the grid
    double residual_std = 0.0;

    double value_at(double day) const;
};

struct Spectrum {
    std::vector<double> frequency;  // cycles per day, k/n up to Nyquist
    std::vector<double> power;      // sums to the series variance (Parseval)

    double total_power() const;
};

struct Harmonic {
    double frequency = 0.0;  // refined peak location
    double power = 0.0;      // periodogram power at the originating bin
};

// Top periodogram harmonics with least-squares cos/sin coefficients, plus an
// optional weekend-indicator regressor.
struct SeasonalFit {
    std::vector<Harmonic> harmonics;   // descending power, at most 3
    std::vector<double> cos_coef;
    std::vector<double> sin_coef;
    double intercept = 0.0;
    double regressor_coef = 0.0;
    bool has_regressor = false;

    double value_at(double day) const;
};

struct FeatureConfig {
    std::size_t max_harmonics = 3;
    bool top_peaks = true;        // false: first 3 Fourier bins instead
    bool weekend_regressor = true;
    double changepoint_spacing = 5.0;  // candidate every 5th day
    double delta_penalty = 0.05;       // shrinkage weight on rate deltas
};

inline constexpr std::size_t kThirdOrderStatCount = 10;

// The 10 per-series hyper-parameters: powers of the top three seasonality
// harmonics, Laplace scale of the rate deltas, change-rate mean and std,
// growth rate, dominant seasonal frequency, trend residual std, and the
// regressor coefficient magnitude.
struct ThirdOrderStats {
    std::array<double, kThirdOrderStatCount> values{};

    static const std::array<std::string, kThirdOrderStatCount>& names();
};

Spectrum periodogram(const std::vector<double>& detrended);

TrendFit fit_piecewise_trend(const FeatureSeries& series, std::size_t n_changepoints,
                             double delta_penalty = 0.05);

SeasonalFit fit_seasonal(const std::vector<double>& grid_days,
                         const std::vector<double>& detrended, const FeatureConfig& cfg = {});

// Two-stage fit: a first trend pass locates the harmonics, then trend,
// harmonics and regressor are refit jointly so the trend cannot absorb the
// seasonal signal. This is what the stats extractor and forecasts use.
struct SeriesModel {
    TrendFit trend;
    SeasonalFit seasonal;
};

SeriesModel fit_series_model(const FeatureSeries& series, const FeatureConfig& cfg = {});

std::vector<double> forecast(const TrendFit& trend, const SeasonalFit& seasonal,
                             std::size_t horizon);

ThirdOrderStats extract_third_order_stats(const FeatureSeries& series,
                                          const FeatureConfig& cfg = {});

// Concatenates per-counter stats in canonical (sorted counter name) order.
// Every expected counter must be present.
std::vector<double> featurize_sample(const std::map<std::string, FeatureSeries>& counters,
                                     const std::vector<std::string>& expected_counters,
                                     const FeatureConfig& cfg = {});

// CSV pipeline: input rows (sample_id,counter_name,day_index,value), output
// one row per sample with 10 columns per counter. Returns the output header.
std::vector<std::string> featurize_csv(const std::string& in_path, const std::string& out_path,
                                       const FeatureConfig& cfg = {});

}  // namespace scarcegan
