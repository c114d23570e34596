#include "scarcegan/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace scarcegan {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Gaussian elimination with partial pivoting; a is n x n row-major.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (std::abs(a[pivot * n + col]) < 1e-12) {
            throw std::runtime_error("trend fit: underdetermined system (rank " +
                                     std::to_string(col) + " of " + std::to_string(n) + ")");
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
            std::swap(b[col], b[pivot]);
        }
        const double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
        x[i] = s / a[i * n + i];
    }
    return x;
}

// least squares (optionally ridge on a subset of columns) via normal equations
std::vector<double> ridge_solve(const std::vector<std::vector<double>>& cols,
                                const std::vector<double>& y,
                                const std::vector<double>& penalty) {
    const std::size_t k = cols.size();
    std::vector<double> ata(k * k, 0.0), aty(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < y.size(); ++t) s += cols[i][t] * cols[j][t];
            ata[i * k + j] = s;
            ata[j * k + i] = s;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < y.size(); ++t) s += cols[i][t] * y[t];
        aty[i] = s;
        ata[i * k + i] += penalty[i];
    }
    return solve_linear(std::move(ata), std::move(aty));
}

std::pair<std::vector<double>, std::vector<double>> regular_grid(const FeatureSeries& s) {
    const double t0 = s.days.front();
    const double t1 = s.days.back();
    const std::size_t n = static_cast<std::size_t>(std::llround(t1 - t0)) + 1;
    std::vector<double> days(n), vals(n);
    std::size_t src = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i);
        days[i] = t;
        while (src + 1 < s.days.size() && s.days[src + 1] <= t) ++src;
        if (s.days[src] == t) {
            vals[i] = s.values[src];
        } else {
            // linear interpolation between neighbors
            const double ta = s.days[src], tb = s.days[src + 1];
            const double va = s.values[src], vb = s.values[src + 1];
            vals[i] = va + (vb - va) * (t - ta) / (tb - ta);
        }
    }
    return {days, vals};
}

double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

// residual sum of squares of a single cos/sin pair at frequency f
double single_harmonic_sse(const std::vector<double>& days, const std::vector<double>& y,
                           double f) {
    std::vector<double> c(y.size()), s(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        c[t] = std::cos(kTwoPi * f * days[t]);
        s[t] = std::sin(kTwoPi * f * days[t]);
    }
    double cc = 0, ss = 0, cs = 0, cy = 0, sy = 0, yy = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        cc += c[t] * c[t];
        ss += s[t] * s[t];
        cs += c[t] * s[t];
        cy += c[t] * y[t];
        sy += s[t] * y[t];
        yy += y[t] * y[t];
    }
    const double det = cc * ss - cs * cs;
    if (std::abs(det) < 1e-12) return yy;
    const double a = (ss * cy - cs * sy) / det;
    const double b = (cc * sy - cs * cy) / det;
    return yy - (a * cy + b * sy);
}

double refine_frequency(const std::vector<double>& days, const std::vector<double>& y,
                        double f_lo, double f_hi) {
    // golden-section search on the single-harmonic residual
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = f_lo, b = f_hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = single_harmonic_sse(days, y, c);
    double fd = single_harmonic_sse(days, y, d);
    for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = single_harmonic_sse(days, y, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = single_harmonic_sse(days, y, d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

void FeatureSeries::validate() const {
    if (days.size() != values.size()) {
        throw std::invalid_argument("series '" + counter + "': " + std::to_string(days.size()) +
                                    " days for " + std::to_string(values.size()) + " values");
    }
    if (days.size() < 15 || days.size() > 45) {
        throw std::invalid_argument("series '" + counter + "': length " +
                                    std::to_string(days.size()) +
                                    " outside the supported 15..45 day range");
    }
    for (std::size_t i = 1; i < days.size(); ++i) {
        if (days[i] <= days[i - 1]) {
            throw std::invalid_argument("series '" + counter +
                                        "': day indices must be strictly increasing");
        }
    }
}

double TrendFit::value_at(double day) const {
    double v = intercept + base_slope * day;
    for (std::size_t j = 0; j < changepoints.size(); ++j) {
        const double h = day - changepoints[j];
        if (h > 0.0) v += rate_deltas[j] * h;
    }
    return v;
}

double Spectrum::total_power() const {
    double s = 0.0;
    for (double p : power) s += p;
    return s;
}

double SeasonalFit::value_at(double day) const {
    double v = intercept;
    for (std::size_t h = 0; h < harmonics.size(); ++h) {
        v += cos_coef[h] * std::cos(kTwoPi * harmonics[h].frequency * day) +
             sin_coef[h] * std::sin(kTwoPi * harmonics[h].frequency * day);
    }
    if (has_regressor) {
        const long dow = static_cast<long>(std::llround(day)) % 7;
        if (dow == 5 || dow == 6) v += regressor_coef;
    }
    return v;
}

const std::array<std::string, kThirdOrderStatCount>& ThirdOrderStats::names() {
    static const std::array<std::string, kThirdOrderStatCount> n = {
        "h1_power",        "h2_power",       "h3_power",    "laplace_scale",
        "change_rate_mean", "change_rate_std", "growth_rate", "dominant_freq",
        "trend_residual_std", "regressor_coef"};
    return n;
}

Spectrum periodogram(const std::vector<double>& detrended) {
    const std::size_t n = detrended.size();
    if (n < 15) {
        throw std::invalid_argument("periodogram: need at least 15 points, got " +
                                    std::to_string(n));
    }
    Spectrum sp;
    const std::size_t half = n / 2;
    const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    for (std::size_t k = 1; k <= half; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = kTwoPi * static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            re += detrended[t] * std::cos(ang);
            im -= detrended[t] * std::sin(ang);
        }
        const double mag2 = re * re + im * im;
        // conjugate bins folded together; the Nyquist bin of an even-length
        // series has no mirror
        const bool nyquist = (n % 2 == 0) && (k == half);
        sp.frequency.push_back(static_cast<double>(k) / static_cast<double>(n));
        sp.power.push_back((nyquist ? 1.0 : 2.0) * mag2 * inv_n2);
    }
    return sp;
}

TrendFit fit_piecewise_trend(const FeatureSeries& series, std::size_t n_changepoints,
                             double delta_penalty) {
    series.validate();
    if (n_changepoints >= series.days.size() / 3) {
        throw std::invalid_argument("trend fit: " + std::to_string(n_changepoints) +
                                    " changepoints for a series of length " +
                                    std::to_string(series.days.size()));
    }
    auto [grid_days, grid_vals] = regular_grid(series);
    const std::size_t n = grid_days.size();
    const double t0 = grid_days.front();
    const double span = grid_days.back() - t0;

    TrendFit fit;
    fit.grid_days = grid_days;
    for (std::size_t j = 1; j <= n_changepoints; ++j) {
        fit.changepoints.push_back(t0 + span * static_cast<double>(j) /
                                            static_cast<double>(n_changepoints + 1));
    }

    const std::size_t k = 2 + n_changepoints;
    if (k > n) {
        throw std::runtime_error("trend fit: underdetermined system (" + std::to_string(k) +
                                 " unknowns over " + std::to_string(n) + " observations)");
    }
    // the penalty weight is meaningful on a normalized problem: days scaled
    // to [0,1] and values by their peak magnitude
    double y_scale = 0.0;
    for (double v : grid_vals) y_scale = std::max(y_scale, std::abs(v));
    if (y_scale <= 0.0) y_scale = 1.0;
    std::vector<double> y_s(n);
    for (std::size_t t = 0; t < n; ++t) y_s[t] = grid_vals[t] / y_scale;

    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<double> penalty(k, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double ts = (grid_days[t] - t0) / span;
        cols[0][t] = 1.0;
        cols[1][t] = ts;
        for (std::size_t j = 0; j < n_changepoints; ++j) {
            const double h = (grid_days[t] - fit.changepoints[j]) / span;
            cols[2 + j][t] = h > 0.0 ? h : 0.0;
        }
    }
    for (std::size_t j = 0; j < n_changepoints; ++j) penalty[2 + j] = delta_penalty;

    const std::vector<double> beta = ridge_solve(cols, y_s, penalty);
    const double unscale = y_scale / span;
    fit.intercept = y_scale * beta[0] - y_scale * beta[1] * t0 / span;
    fit.base_slope = beta[1] * unscale;
    fit.rate_deltas.resize(n_changepoints);
    for (std::size_t j = 0; j < n_changepoints; ++j) fit.rate_deltas[j] = beta[2 + j] * unscale;

    fit.segment_slopes.resize(n_changepoints + 1);
    double slope = fit.base_slope;
    fit.segment_slopes[0] = slope;
    for (std::size_t j = 0; j < n_changepoints; ++j) {
        slope += fit.rate_deltas[j];
        fit.segment_slopes[j + 1] = slope;
    }

    fit.fitted.resize(n);
    fit.residual.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        fit.fitted[t] = fit.value_at(grid_days[t]);
        fit.residual[t] = grid_vals[t] - fit.fitted[t];
    }
    fit.residual_std = population_std(fit.residual);
    return fit;
}

SeasonalFit fit_seasonal(const std::vector<double>& grid_days,
                         const std::vector<double>& detrended, const FeatureConfig& cfg) {
    if (grid_days.size() != detrended.size()) {
        throw std::invalid_argument("fit_seasonal: day/value length mismatch");
    }
    const std::size_t n = detrended.size();
    Spectrum sp = periodogram(detrended);

    SeasonalFit fit;
    fit.has_regressor = cfg.weekend_regressor;

    // bin selection: top peaks by power, or the first bins
    std::vector<std::size_t> order(sp.power.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (cfg.top_peaks) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sp.power[a] > sp.power[b]; });
    }
    const double floor_power = 1e-12 * std::max(1.0, sp.total_power());
    std::vector<double> offsets(n);
    for (std::size_t t = 0; t < n; ++t) offsets[t] = grid_days[t] - grid_days.front();
    for (std::size_t r = 0; r < order.size() && fit.harmonics.size() < cfg.max_harmonics; ++r) {
        const std::size_t bin = order[r];
        if (sp.power[bin] <= floor_power) continue;
        const double k = static_cast<double>(bin + 1);
        const double f_lo = std::max(0.5, k - 1.0) / static_cast<double>(n);
        const double f_hi = std::min(static_cast<double>(n) / 2.0, k + 1.0) /
                            static_cast<double>(n);
        const double f = refine_frequency(offsets, detrended, f_lo, f_hi);
        // spectral leakage makes neighboring bins refine to the same peak;
        // keep the first (highest-power) occurrence only
        bool duplicate = false;
        for (const Harmonic& hh : fit.harmonics) {
            if (std::abs(hh.frequency - f) < 0.5 / static_cast<double>(n)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) fit.harmonics.push_back({f, sp.power[bin]});
    }

    // joint least squares for the coefficients (plus intercept and regressor)
    const std::size_t h = fit.harmonics.size();
    const std::size_t kcols = 1 + 2 * h + (fit.has_regressor ? 1 : 0);
    std::vector<std::vector<double>> cols(kcols, std::vector<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
        cols[0][t] = 1.0;
        for (std::size_t i = 0; i < h; ++i) {
            const double ang = kTwoPi * fit.harmonics[i].frequency * grid_days[t];
            cols[1 + 2 * i][t] = std::cos(ang);
            cols[2 + 2 * i][t] = std::sin(ang);
        }
        if (fit.has_regressor) {
            const long dow = static_cast<long>(std::llround(grid_days[t])) % 7;
            cols[kcols - 1][t] = (dow == 5 || dow == 6) ? 1.0 : 0.0;
        }
    }
    std::vector<double> penalty(kcols, 0.0);
    std::vector<double> beta;
    try {
        beta = ridge_solve(cols, detrended, penalty);
    } catch (const std::runtime_error&) {
        // degenerate design (e.g. constant series): keep an all-zero fit
        beta.assign(kcols, 0.0);
    }
    fit.intercept = beta[0];
    fit.cos_coef.resize(h);
    fit.sin_coef.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
        fit.cos_coef[i] = beta[1 + 2 * i];
        fit.sin_coef[i] = beta[2 + 2 * i];
    }
    if (fit.has_regressor) fit.regressor_coef = beta[kcols - 1];
    return fit;
}

namespace {

std::size_t default_changepoints(const FeatureSeries& series, double span,
                                 const FeatureConfig& cfg) {
    const std::size_t cap = series.days.size() / 3 > 0 ? series.days.size() / 3 - 1 : 0;
    return std::min<std::size_t>(static_cast<std::size_t>(span / cfg.changepoint_spacing), cap);
}

// full design: [1, t, hinges..., cos/sin per frequency..., regressor?] with
// the shrinkage weight on the hinge columns only, solved on the same
// normalized problem as fit_piecewise_trend. Returns the residual sum of
// squares (raw units); beta comes back already unscaled.
double joint_fit_sse(const std::vector<double>& days, const std::vector<double>& y,
                     const std::vector<double>& changepoints, const std::vector<double>& freqs,
                     bool regressor, double delta_penalty, std::vector<double>* beta_out) {
    const std::size_t n = days.size();
    const std::size_t m = changepoints.size();
    const std::size_t h = freqs.size();
    const std::size_t k = 2 + m + 2 * h + (regressor ? 1 : 0);
    const double t0 = days.front();
    const double span = days.back() - t0;
    double y_scale = 0.0;
    for (double v : y) y_scale = std::max(y_scale, std::abs(v));
    if (y_scale <= 0.0) y_scale = 1.0;
    std::vector<double> y_s(n);
    for (std::size_t t = 0; t < n; ++t) y_s[t] = y[t] / y_scale;

    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<double> penalty(k, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        cols[0][t] = 1.0;
        cols[1][t] = (days[t] - t0) / span;
        for (std::size_t j = 0; j < m; ++j) {
            const double hg = (days[t] - changepoints[j]) / span;
            cols[2 + j][t] = hg > 0.0 ? hg : 0.0;
        }
        for (std::size_t i = 0; i < h; ++i) {
            const double ang = kTwoPi * freqs[i] * days[t];
            cols[2 + m + 2 * i][t] = std::cos(ang);
            cols[2 + m + 2 * i + 1][t] = std::sin(ang);
        }
        if (regressor) {
            const long dow = static_cast<long>(std::llround(days[t])) % 7;
            cols[k - 1][t] = (dow == 5 || dow == 6) ? 1.0 : 0.0;
        }
    }
    for (std::size_t j = 0; j < m; ++j) penalty[2 + j] = delta_penalty;

    std::vector<double> beta;
    try {
        beta = ridge_solve(cols, y_s, penalty);
    } catch (const std::runtime_error&) {
        return 1e300;  // collinear trial frequency; steer the search away
    }
    double sse = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double fit = 0.0;
        for (std::size_t c = 0; c < k; ++c) fit += beta[c] * cols[c][t];
        const double r = (y_s[t] - fit) * y_scale;
        sse += r * r;
    }
    if (beta_out) {
        // back to raw units: intercept, slope and hinges carry the day and
        // value scaling; harmonic and regressor coefficients only the value
        const double unscale = y_scale / span;
        std::vector<double> raw(k);
        raw[0] = y_scale * beta[0] - y_scale * beta[1] * t0 / span;
        raw[1] = beta[1] * unscale;
        for (std::size_t j = 0; j < m; ++j) raw[2 + j] = beta[2 + j] * unscale;
        for (std::size_t i = 0; i < 2 * h; ++i) raw[2 + m + i] = beta[2 + m + i] * y_scale;
        if (regressor) raw[k - 1] = beta[k - 1] * y_scale;
        *beta_out = std::move(raw);
    }
    return sse;
}

}  // namespace

SeriesModel fit_series_model(const FeatureSeries& series, const FeatureConfig& cfg) {
    series.validate();
    auto [grid_days, grid_vals] = regular_grid(series);
    const std::size_t n = grid_days.size();
    const double span = grid_days.back() - grid_days.front();
    const std::size_t n_cp = default_changepoints(series, span, cfg);

    SeriesModel model;
    model.trend = fit_piecewise_trend(series, n_cp, cfg.delta_penalty);
    model.seasonal = SeasonalFit{};
    model.seasonal.has_regressor = cfg.weekend_regressor;

    std::vector<double> freqs;
    std::vector<double> bin_powers;
    std::vector<double> beta;

    // candidate harmonics come from the periodogram of the current trend
    // residual; each frequency is then tuned against the full joint model so
    // the hinge columns cannot trade signal with the harmonics
    for (int round = 0; round < 2; ++round) {
        std::vector<double> trend_residual(n);
        for (std::size_t t = 0; t < n; ++t)
            trend_residual[t] = grid_vals[t] - model.trend.value_at(grid_days[t]);
        Spectrum sp = periodogram(trend_residual);

        std::vector<std::size_t> order(sp.power.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (cfg.top_peaks) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return sp.power[a] > sp.power[b];
            });
        }
        const double floor_power = 1e-12 * std::max(1.0, sp.total_power());

        freqs.clear();
        bin_powers.clear();
        for (std::size_t r = 0; r < order.size() && freqs.size() < cfg.max_harmonics; ++r) {
            const std::size_t bin = order[r];
            if (sp.power[bin] <= floor_power) continue;
            const double k = static_cast<double>(bin + 1);
            const double f_lo = std::max(0.5, k - 1.0) / static_cast<double>(n);
            const double f_hi =
                std::min(static_cast<double>(n) / 2.0, k + 1.0) / static_cast<double>(n);

            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            std::vector<double> trial = freqs;
            trial.push_back(0.0);
            auto sse_at = [&](double f) {
                trial.back() = f;
                return joint_fit_sse(grid_days, grid_vals, model.trend.changepoints, trial,
                                     cfg.weekend_regressor, cfg.delta_penalty, nullptr);
            };
            double a = f_lo, b = f_hi;
            double c = b - gr * (b - a), d = a + gr * (b - a);
            double fc = sse_at(c), fd = sse_at(d);
            for (int it = 0; it < 48; ++it) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - gr * (b - a);
                    fc = sse_at(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + gr * (b - a);
                    fd = sse_at(d);
                }
            }
            const double f = 0.5 * (a + b);
            bool duplicate = false;
            for (double existing : freqs)
                if (std::abs(existing - f) < 0.5 / static_cast<double>(n)) duplicate = true;
            if (duplicate) continue;
            freqs.push_back(f);
            bin_powers.push_back(sp.power[bin]);
        }

        const double sse = joint_fit_sse(grid_days, grid_vals, model.trend.changepoints, freqs,
                                         cfg.weekend_regressor, cfg.delta_penalty, &beta);
        if (sse >= 1e300) break;  // keep the previous decomposition
        model.trend.intercept = beta[0];
        model.trend.base_slope = beta[1];
        model.trend.rate_deltas.assign(beta.begin() + 2, beta.begin() + 2 + n_cp);
        model.seasonal.harmonics.clear();
        model.seasonal.cos_coef.clear();
        model.seasonal.sin_coef.clear();
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            model.seasonal.harmonics.push_back({freqs[i], bin_powers[i]});
            model.seasonal.cos_coef.push_back(beta[2 + n_cp + 2 * i]);
            model.seasonal.sin_coef.push_back(beta[2 + n_cp + 2 * i + 1]);
        }
        model.seasonal.intercept = 0.0;  // the trend carries the level
        if (cfg.weekend_regressor) model.seasonal.regressor_coef = beta.back();
        if (freqs.empty()) break;
    }

    double slope = model.trend.base_slope;
    model.trend.segment_slopes.assign(1, slope);
    for (std::size_t j = 0; j < n_cp; ++j) {
        slope += model.trend.rate_deltas[j];
        model.trend.segment_slopes.push_back(slope);
    }
    for (std::size_t t = 0; t < n; ++t) {
        model.trend.fitted[t] = model.trend.value_at(grid_days[t]);
        model.trend.residual[t] = grid_vals[t] - model.trend.fitted[t];
    }
    model.trend.residual_std = population_std(model.trend.residual);
    return model;
}

std::vector<double> forecast(const TrendFit& trend, const SeasonalFit& seasonal,
                             std::size_t horizon) {
    std::vector<double> out;
    out.reserve(horizon);
    const double last = trend.grid_days.empty() ? 0.0 : trend.grid_days.back();
    for (std::size_t i = 1; i <= horizon; ++i) {
        const double day = last + static_cast<double>(i);
        out.push_back(trend.value_at(day) + seasonal.value_at(day));
    }
    return out;
}

ThirdOrderStats extract_third_order_stats(const FeatureSeries& series, const FeatureConfig& cfg) {
    series.validate();
    auto [grid_days, grid_vals] = regular_grid(series);

    const SeriesModel model = fit_series_model(series, cfg);
    const TrendFit& trend = model.trend;
    const SeasonalFit& seasonal = model.seasonal;

    // harmonic powers come straight from the periodogram bins
    Spectrum sp = periodogram(trend.residual);
    std::vector<double> powers = sp.power;
    if (cfg.top_peaks) {
        std::stable_sort(powers.begin(), powers.end(), std::greater<double>());
    }

    // daily change rate of the interpolated series
    std::vector<double> diffs;
    diffs.reserve(grid_vals.size() - 1);
    for (std::size_t t = 1; t < grid_vals.size(); ++t)
        diffs.push_back(grid_vals[t] - grid_vals[t - 1]);
    double diff_mean = 0.0;
    for (double d : diffs) diff_mean += d;
    diff_mean /= static_cast<double>(diffs.size());

    double laplace = 0.0;
    for (double d : trend.rate_deltas) laplace += std::abs(d);
    if (!trend.rate_deltas.empty()) laplace /= static_cast<double>(trend.rate_deltas.size());

    ThirdOrderStats st;
    for (std::size_t i = 0; i < 3; ++i) st.values[i] = i < powers.size() ? powers[i] : 0.0;
    st.values[3] = laplace;
    st.values[4] = diff_mean;
    st.values[5] = population_std(diffs);
    st.values[6] = trend.base_slope;
    st.values[7] = seasonal.harmonics.empty() ? 0.0 : seasonal.harmonics.front().frequency;
    st.values[8] = trend.residual_std;
    st.values[9] = std::abs(seasonal.regressor_coef);
    for (double v : st.values) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("third-order stats: non-finite value for counter '" +
                                     series.counter + "'");
        }
    }
    return st;
}

std::vector<double> featurize_sample(const std::map<std::string, FeatureSeries>& counters,
                                     const std::vector<std::string>& expected_counters,
                                     const FeatureConfig& cfg) {
    std::vector<double> out;
    out.reserve(expected_counters.size() * kThirdOrderStatCount);
    for (const std::string& name : expected_counters) {
        auto it = counters.find(name);
        if (it == counters.end()) {
            throw std::invalid_argument("featurize: missing counter '" + name + "'");
        }
        const ThirdOrderStats st = extract_third_order_stats(it->second, cfg);
        out.insert(out.end(), st.values.begin(), st.values.end());
    }
    return out;
}

std::vector<std::string> featurize_csv(const std::string& in_path, const std::string& out_path,
                                       const FeatureConfig& cfg) {
    std::ifstream is(in_path);
    if (!is) throw std::runtime_error("cannot open " + in_path);

    // sample -> counter -> (day, value), insertion-ordered samples
    std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>> raw;
    std::vector<std::string> sample_order;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("sample_id") != std::string::npos) continue;  // header
        }
        std::istringstream ls(line);
        std::string sample, counter, day_s, value_s;
        if (!std::getline(ls, sample, ',') || !std::getline(ls, counter, ',') ||
            !std::getline(ls, day_s, ',') || !std::getline(ls, value_s)) {
            throw std::runtime_error("featurize: malformed line " + std::to_string(line_no) +
                                     " in " + in_path);
        }
        if (raw.find(sample) == raw.end()) sample_order.push_back(sample);
        raw[sample][counter].emplace_back(std::stod(day_s), std::stod(value_s));
    }

    std::vector<std::string> counter_names;
    for (const auto& [sample, counters] : raw)
        for (const auto& [name, pts] : counters)
            if (std::find(counter_names.begin(), counter_names.end(), name) ==
                counter_names.end())
                counter_names.push_back(name);
    std::sort(counter_names.begin(), counter_names.end());

    std::vector<std::string> header = {"sample_id"};
    for (const std::string& c : counter_names)
        for (const std::string& s : ThirdOrderStats::names()) header.push_back(c + "_" + s);

    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open " + out_path + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    os.precision(17);
    for (const std::string& sample : sample_order) {
        std::map<std::string, FeatureSeries> series;
        for (auto& [name, pts] : raw[sample]) {
            std::sort(pts.begin(), pts.end());
            FeatureSeries s;
            s.counter = name;
            for (auto& [d, v] : pts) {
                s.days.push_back(d);
                s.values.push_back(v);
            }
            series[name] = std::move(s);
        }
        std::vector<double> feats;
        try {
            feats = featurize_sample(series, counter_names, cfg);
        } catch (const std::exception& e) {
            throw std::runtime_error("featurize: sample '" + sample + "': " + e.what());
        }
        os << sample;
        for (double v : feats) os << "," << v;
        os << "\n";
    }
    return header;
}

}  // namespace scarcegan
