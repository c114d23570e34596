#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "scarcegan/features.hpp"

using namespace scarcegan;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

FeatureSeries make_series(std::size_t days, const std::function<double(double)>& f,
                          const std::string& name = "c") {
    FeatureSeries s;
    s.counter = name;
    for (std::size_t t = 0; t < days; ++t) {
        s.days.push_back(static_cast<double>(t));
        s.values.push_back(f(static_cast<double>(t)));
    }
    return s;
}

double mape(const std::vector<double>& pred, const std::vector<double>& truth) {
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        sum += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
    return sum / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("periodogram of a pure weekly sine peaks at 1/7") {
    std::vector<double> x(42);
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = std::sin(kTwoPi * static_cast<double>(t) / 7.0);
    Spectrum sp = periodogram(x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < sp.power.size(); ++i)
        if (sp.power[i] > sp.power[best]) best = i;
    CHECK(sp.frequency[best] == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    // a unit-amplitude sinusoid carries variance 1/2
    CHECK(sp.power[best] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("periodogram of a constant series is identically zero") {
    std::vector<double> x(30, 3.25);
    Spectrum sp = periodogram(x);
    for (double p : sp.power) CHECK(std::abs(p) <= 1e-18);
}

TEST_CASE("two sinusoids keep their squared-amplitude power ratio") {
    std::vector<double> x(42);
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double d = static_cast<double>(t);
        x[t] = 2.0 * std::sin(kTwoPi * d / 7.0) + 1.0 * std::sin(kTwoPi * d / 3.0);
    }
    Spectrum sp = periodogram(x);
    double p7 = 0, p3 = 0;
    for (std::size_t i = 0; i < sp.frequency.size(); ++i) {
        if (std::abs(sp.frequency[i] - 1.0 / 7.0) < 1e-9) p7 = sp.power[i];
        if (std::abs(sp.frequency[i] - 1.0 / 3.0) < 1e-9) p3 = sp.power[i];
    }
    CHECK(p7 / p3 == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("Parseval: spectral power equals variance") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> d;
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 15 + static_cast<std::size_t>(rep * 3);
        std::vector<double> x(n);
        for (double& v : x) v = d(rng);
        double mean = 0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
        double var = 0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        Spectrum sp = periodogram(x);
        CHECK(sp.total_power() == doctest::Approx(var).epsilon(1e-9));
    }
}

TEST_CASE("periodogram rejects short series") {
    std::vector<double> x(10, 1.0);
    CHECK_THROWS_AS(periodogram(x), std::invalid_argument);
}

TEST_CASE("an exact line is recovered perfectly") {
    FeatureSeries s = make_series(30, [](double t) { return 1.0 + 2.0 * t; });
    TrendFit fit = fit_piecewise_trend(s, 4);
    CHECK(fit.base_slope == doctest::Approx(2.0).epsilon(1e-6));
    for (double d : fit.rate_deltas) CHECK(std::abs(d) <= 1e-6);
    for (double r : fit.residual) CHECK(std::abs(r) <= 1e-6);
    CHECK(fit.residual_std <= 1e-6);
    for (double sl : fit.segment_slopes) CHECK(sl == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("a two-segment line is recovered at a matching candidate") {
    // slope 1 for days 0..20, slope 3 afterwards; candidates at multiples of 5
    FeatureSeries s = make_series(41, [](double t) {
        return t <= 20.0 ? t : 20.0 + 3.0 * (t - 20.0);
    });
    TrendFit fit = fit_piecewise_trend(s, 7);  // candidates every 5 days
    REQUIRE(fit.segment_slopes.size() == 8);
    CHECK(fit.segment_slopes.front() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.segment_slopes.back() == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("a strong penalty flattens white-noise slopes") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> d;
    FeatureSeries s = make_series(45, [&](double) { return d(rng); });
    TrendFit fit = fit_piecewise_trend(s, 6, /*delta_penalty=*/1e9);
    for (double delta : fit.rate_deltas) CHECK(std::abs(delta) <= 1e-4);
    for (double sl : fit.segment_slopes) CHECK(std::abs(sl) <= 0.05);
}

TEST_CASE("residuals are orthogonal to the fitted basis") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> d;
    FeatureSeries s = make_series(40, [&](double t) { return 0.5 * t + d(rng); });

    SUBCASE("unpenalized fit: orthogonal to every column") {
        TrendFit fit = fit_piecewise_trend(s, 5, 0.0);
        const std::size_t n = fit.grid_days.size();
        double dot1 = 0, dot_t = 0;
        std::vector<double> dot_h(fit.changepoints.size(), 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            dot1 += fit.residual[t];
            dot_t += fit.residual[t] * fit.grid_days[t];
            for (std::size_t j = 0; j < fit.changepoints.size(); ++j) {
                const double h = fit.grid_days[t] - fit.changepoints[j];
                dot_h[j] += fit.residual[t] * (h > 0 ? h : 0);
            }
        }
        CHECK(std::abs(dot1) <= 1e-8);
        CHECK(std::abs(dot_t) <= 1e-8);
        for (double v : dot_h) CHECK(std::abs(v) <= 1e-8);
    }

    SUBCASE("shrunk fit: still orthogonal to the unpenalized columns") {
        TrendFit fit = fit_piecewise_trend(s, 5, 0.05);
        double dot1 = 0, dot_t = 0;
        for (std::size_t t = 0; t < fit.grid_days.size(); ++t) {
            dot1 += fit.residual[t];
            dot_t += fit.residual[t] * fit.grid_days[t];
        }
        CHECK(std::abs(dot1) <= 1e-8);
        CHECK(std::abs(dot_t) <= 1e-8);
    }
}

TEST_CASE("underdetermined trend systems are rejected") {
    FeatureSeries s = make_series(15, [](double t) { return t; });
    CHECK_THROWS_AS(fit_piecewise_trend(s, 5), std::invalid_argument);
}

TEST_CASE("third-order stats of a clean line") {
    FeatureSeries s = make_series(30, [](double t) { return 4.0 + 2.0 * t; });
    ThirdOrderStats st = extract_third_order_stats(s);
    CHECK(st.values[6] == doctest::Approx(2.0).epsilon(1e-6));   // growth rate
    CHECK(st.values[4] == doctest::Approx(2.0).epsilon(1e-6));   // change-rate mean
    CHECK(std::abs(st.values[5]) <= 1e-6);                       // change-rate std
    for (int i = 0; i < 3; ++i) CHECK(std::abs(st.values[i]) <= 1e-9);  // harmonic powers
}

TEST_CASE("line plus weekly sine keeps growth and finds the harmonic") {
    FeatureSeries s = make_series(42, [](double t) {
        return 10.0 + 2.0 * t + 3.0 * std::sin(kTwoPi * t / 7.0);
    });
    ThirdOrderStats st = extract_third_order_stats(s);
    CHECK(st.values[6] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(st.values[7] == doctest::Approx(1.0 / 7.0).epsilon(0.02));  // dominant frequency
    CHECK(st.values[0] > st.values[1]);  // descending harmonic powers
    CHECK(st.values[1] >= st.values[2]);
}

TEST_CASE("harmonic recovery survives noise at SNR 3") {
    std::mt19937_64 rng(47);
    // seasonal amplitude a gives power a^2/2; SNR 3 means a^2/2 = 3 * sigma^2
    const double sigma = 1.0;
    const double amp = std::sqrt(6.0) * sigma;
    std::normal_distribution<double> d(0.0, sigma);
    FeatureSeries s = make_series(45, [&](double t) {
        return 20.0 + 0.5 * t + amp * std::sin(kTwoPi * t / 9.0) + d(rng);
    });
    ThirdOrderStats st = extract_third_order_stats(s);
    CHECK(st.values[7] == doctest::Approx(1.0 / 9.0).epsilon(0.05));
}

TEST_CASE("stats are shift equivariant") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> nd;
    FeatureSeries s = make_series(35, [&](double t) {
        return 5.0 + 0.7 * t + 2.0 * std::sin(kTwoPi * t / 7.0) + nd(rng);
    });
    FeatureSeries shifted = s;
    for (double& v : shifted.values) v += 100.0;
    ThirdOrderStats a = extract_third_order_stats(s);
    ThirdOrderStats b = extract_third_order_stats(shifted);
    // every statistic except none should match: the shift lands in the intercept
    for (std::size_t i = 0; i < kThirdOrderStatCount; ++i) {
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-6));
    }
}

TEST_CASE("stats are deterministic") {
    FeatureSeries s = make_series(28, [](double t) { return 3.0 * t + std::cos(t); });
    ThirdOrderStats a = extract_third_order_stats(s);
    ThirdOrderStats b = extract_third_order_stats(s);
    CHECK(a.values == b.values);
}

TEST_CASE("short series are rejected") {
    FeatureSeries s = make_series(14, [](double t) { return t; });
    CHECK_THROWS_AS(extract_third_order_stats(s), std::invalid_argument);
}

TEST_CASE("gaps are interpolated before fitting") {
    FeatureSeries s;
    s.counter = "gappy";
    for (std::size_t t = 0; t < 30; ++t) {
        if (t % 3 == 1 && t > 4 && t < 25) continue;  // drop some days
        s.days.push_back(static_cast<double>(t));
        s.values.push_back(1.0 + 2.0 * static_cast<double>(t));
    }
    REQUIRE(s.days.size() >= 15);
    ThirdOrderStats st = extract_third_order_stats(s);
    CHECK(st.values[6] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("noiseless forecast is essentially exact") {
    const auto truth_fn = [](double t) {
        return 50.0 + 1.5 * t + 4.0 * std::sin(kTwoPi * t / 7.0) + 2.0 * std::cos(kTwoPi * t / 7.0);
    };
    for (std::size_t len : {42u, 45u}) {
        FeatureSeries s = make_series(len, truth_fn);
        FeatureConfig cfg;
        cfg.weekend_regressor = false;
        SeriesModel model = fit_series_model(s, cfg);
        std::vector<double> pred = forecast(model.trend, model.seasonal, 7);
        std::vector<double> truth;
        for (std::size_t i = 1; i <= 7; ++i)
            truth.push_back(truth_fn(static_cast<double>(len - 1 + i)));
        INFO("len ", len, " mape ", mape(pred, truth));
        CHECK(mape(pred, truth) <= 0.01);
    }
}

TEST_CASE("forecast under five percent noise stays within ten percent error") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> d(0.0, 1.0);
    const auto truth_fn = [](double t) {
        return 60.0 + 1.0 * t + 5.0 * std::sin(kTwoPi * t / 7.0);
    };
    FeatureSeries s;
    s.counter = "noisy";
    for (std::size_t t = 0; t < 45; ++t) {
        const double clean = truth_fn(static_cast<double>(t));
        s.days.push_back(static_cast<double>(t));
        s.values.push_back(clean * (1.0 + 0.05 * d(rng)));
    }
    FeatureConfig cfg;
    cfg.weekend_regressor = false;
    SeriesModel model = fit_series_model(s, cfg);
    std::vector<double> pred = forecast(model.trend, model.seasonal, 7);
    std::vector<double> truth;
    for (std::size_t i = 1; i <= 7; ++i) truth.push_back(truth_fn(static_cast<double>(44 + i)));
    INFO("mape ", mape(pred, truth));
    CHECK(mape(pred, truth) <= 0.10);
}

TEST_CASE("zero horizon forecasts nothing") {
    FeatureSeries s = make_series(20, [](double t) { return t; });
    TrendFit trend = fit_piecewise_trend(s, 2);
    SeasonalFit seasonal = fit_seasonal(trend.grid_days, trend.residual);
    CHECK(forecast(trend, seasonal, 0).empty());
}

TEST_CASE("featurize_sample concatenates counters in canonical order") {
    std::map<std::string, FeatureSeries> counters;
    std::vector<std::string> names;
    for (int c = 0; c < 11; ++c) {
        const std::string name = "counter_" + std::to_string(c);
        names.push_back(name);
        counters[name] = make_series(20, [c](double t) { return c + 0.1 * t; }, name);
    }
    std::vector<double> v = featurize_sample(counters, names);
    CHECK(v.size() == 110);

    SUBCASE("a missing counter is rejected by name") {
        counters.erase("counter_7");
        CHECK_THROWS_WITH_AS(featurize_sample(counters, names), doctest::Contains("counter_7"),
                             std::invalid_argument);
    }

    SUBCASE("a constant-zero counter stays finite") {
        counters["counter_3"] = make_series(20, [](double) { return 0.0; }, "counter_3");
        std::vector<double> v3 = featurize_sample(counters, names);
        for (double x : v3) CHECK(std::isfinite(x));
    }
}

TEST_CASE("csv featurization writes ten columns per counter") {
    {
        std::ofstream os("series_test.csv");
        os << "sample_id,counter_name,day_index,value\n";
        for (int sample = 0; sample < 3; ++sample) {
            for (const char* counter : {"games", "loss"}) {
                for (int day = 0; day < 21; ++day) {
                    const double v = sample + (counter[0] == 'g' ? 2.0 : 0.5) * day;
                    os << "s" << sample << "," << counter << "," << day << "," << v << "\n";
                }
            }
        }
    }
    std::vector<std::string> header = featurize_csv("series_test.csv", "features_test.csv");
    CHECK(header.size() == 1 + 2 * kThirdOrderStatCount);
    CHECK(header[1] == "games_h1_power");

    std::ifstream is("features_test.csv");
    std::string line;
    std::getline(is, line);
    std::size_t rows = 0;
    std::vector<std::string> body;
    while (std::getline(is, line)) {
        ++rows;
        body.push_back(line);
    }
    CHECK(rows == 3);

    SUBCASE("permuting the input row order changes nothing") {
        std::vector<std::string> lines;
        {
            std::ifstream in("series_test.csv");
            std::getline(in, line);  // header
            while (std::getline(in, line)) lines.push_back(line);
        }
        std::mt19937_64 rng(3);
        std::shuffle(lines.begin(), lines.end(), rng);
        {
            std::ofstream os("series_shuffled.csv");
            os << "sample_id,counter_name,day_index,value\n";
            for (const std::string& l : lines) os << l << "\n";
        }
        featurize_csv("series_shuffled.csv", "features_shuffled.csv");
        std::ifstream shuffled("features_shuffled.csv");
        std::getline(shuffled, line);  // header
        std::map<std::string, std::string> by_sample;
        while (std::getline(shuffled, line))
            by_sample[line.substr(0, line.find(','))] = line;
        for (const std::string& original : body) {
            CHECK(by_sample[original.substr(0, original.find(','))] == original);
        }
    }
}
