#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scarcegan/model.hpp"
#include "scarcegan/trainer.hpp"

namespace scarcegan {

// Positive-vs-all metrics over the supervised head's argmax decisions.
// positive = predicted R; everything else (including U) counts negative.
struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double verbosity = 0.0;           // fraction of samples flagged positive
    double unknown_occupancy = 0.0;   // fraction assigned to U
    bool precision_degenerate = false;  // no positive predictions at all
    std::vector<std::vector<std::size_t>> confusion;  // true x predicted, layout order
    std::vector<std::string> class_names;
    std::size_t test_size = 0;
    std::uint64_t seed = 0;
};

// argmax over the supervised probabilities; ties go to the lowest class
// index (the documented D < N < H < R < U order)
std::size_t classify_row(const Matrix& sup_probs, std::size_t row);
std::vector<std::size_t> classify(Discriminator& model, const Matrix& x);

MetricsReport metrics_from_predictions(const ClassLayout& layout,
                                       const std::vector<std::size_t>& predictions,
                                       const std::vector<std::size_t>& labels);

MetricsReport evaluate(Discriminator& model, const Matrix& x,
                       const std::vector<std::size_t>& labels);

struct ExperimentReport {
    std::string task;
    std::string config_digest;
    std::string environment;
    std::string config_text;
    std::vector<std::uint64_t> seeds;
    std::vector<MetricsReport> runs;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    double mean_verbosity = 0.0;
    double mean_unknown_occupancy = 0.0;
};

// Trains and evaluates `runs` seeded runs (seed = base_seed + run index) on
// fixed data and averages the per-run metrics arithmetically.
ExperimentReport run_experiment(const std::string& task_name, const LabeledPrior& prior,
                                const Matrix& unlabeled, const Matrix& test_x,
                                const std::vector<std::size_t>& test_y, TrainConfig cfg,
                                std::size_t runs, std::uint64_t base_seed);

std::string report_to_json(const ExperimentReport& report);
void write_report(const std::string& path, const ExperimentReport& report);
ExperimentReport read_report(const std::string& path);
std::string render_report(const ExperimentReport& report);  // human-readable summary

std::string config_digest(const TrainConfig& cfg, const std::string& task_name);

}  // namespace scarcegan
