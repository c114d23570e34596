#include "scarcegan/metrics.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scarcegan {

using nlohmann::json;

std::size_t classify_row(const Matrix& sup_probs, std::size_t row) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < sup_probs.cols; ++j)
        if (sup_probs(row, j) > sup_probs(row, arg)) arg = j;
    return arg;
}

std::vector<std::size_t> classify(Discriminator& model, const Matrix& x) {
    std::vector<std::size_t> out(x.rows);
    const std::size_t chunk = 512;
    for (std::size_t start = 0; start < x.rows; start += chunk) {
        const std::size_t end = std::min(x.rows, start + chunk);
        std::vector<std::size_t> rows(end - start);
        for (std::size_t i = start; i < end; ++i) rows[i - start] = i;
        Matrix part = take_rows(x, rows);
        DiscOutput o = model.forward(part, Head::Supervised, /*cache=*/false);
        for (std::size_t i = 0; i < part.rows; ++i) out[start + i] = classify_row(o.sup, i);
    }
    return out;
}

MetricsReport metrics_from_predictions(const ClassLayout& layout,
                                       const std::vector<std::size_t>& predictions,
                                       const std::vector<std::size_t>& labels) {
    if (predictions.empty()) throw std::invalid_argument("evaluate: empty test set");
    if (labels.size() != predictions.size()) {
        throw std::invalid_argument("evaluate: label count mismatch");
    }
    const std::size_t k = layout.size();
    const std::size_t pos = layout.positive_index();
    const std::size_t unk = layout.unknown_index();

    MetricsReport rep;
    rep.class_names = layout.names;
    rep.test_size = predictions.size();
    rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (labels[i] >= k) throw std::invalid_argument("evaluate: label out of range");
        if (predictions[i] >= k) throw std::invalid_argument("evaluate: prediction out of range");
        rep.confusion[labels[i]][predictions[i]] += 1;
    }

    std::size_t tp = rep.confusion[pos][pos];
    std::size_t fp = 0, fn = 0, unk_total = 0;
    for (std::size_t t = 0; t < k; ++t) {
        if (t != pos) fp += rep.confusion[t][pos];
        unk_total += rep.confusion[t][unk];
    }
    for (std::size_t p = 0; p < k; ++p)
        if (p != pos) fn += rep.confusion[pos][p];

    if (tp + fp == 0) {
        rep.precision = 0.0;
        rep.precision_degenerate = true;
    } else {
        rep.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    rep.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    rep.f1 = rep.precision + rep.recall > 0.0
                 ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
                 : 0.0;
    rep.verbosity = static_cast<double>(tp + fp) / static_cast<double>(rep.test_size);
    rep.unknown_occupancy = static_cast<double>(unk_total) / static_cast<double>(rep.test_size);
    return rep;
}

MetricsReport evaluate(Discriminator& model, const Matrix& x,
                       const std::vector<std::size_t>& labels) {
    if (x.rows == 0) throw std::invalid_argument("evaluate: empty test set");
    return metrics_from_predictions(model.layout(), classify(model, x), labels);
}

std::string config_digest(const TrainConfig& cfg, const std::string& task_name) {
    const std::string text = task_name + "\n" + serialize_config(cfg);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

ExperimentReport run_experiment(const std::string& task_name, const LabeledPrior& prior,
                                const Matrix& unlabeled, const Matrix& test_x,
                                const std::vector<std::size_t>& test_y, TrainConfig cfg,
                                std::size_t runs, std::uint64_t base_seed) {
    if (runs == 0) throw std::invalid_argument("run_experiment: need at least one run");
    ExperimentReport report;
    report.task = task_name;
    report.config_digest = config_digest(cfg, task_name);
    report.config_text = serialize_config(cfg);
    report.environment = std::string("compiler=") + __VERSION__;
    for (std::size_t r = 0; r < runs; ++r) {
        const std::uint64_t seed = base_seed + r;
        cfg.seed = seed;
        TrainState state;
        try {
            state = train(cfg, prior, unlabeled);
        } catch (const std::exception& e) {
            throw std::runtime_error("run with seed " + std::to_string(seed) +
                                     " failed: " + e.what());
        }
        MetricsReport m = evaluate(state.disc, test_x, test_y);
        m.seed = seed;
        report.seeds.push_back(seed);
        report.runs.push_back(std::move(m));
    }
    const double n = static_cast<double>(report.runs.size());
    for (const MetricsReport& m : report.runs) {
        report.mean_precision += m.precision / n;
        report.mean_recall += m.recall / n;
        report.mean_f1 += m.f1 / n;
        report.mean_verbosity += m.verbosity / n;
        report.mean_unknown_occupancy += m.unknown_occupancy / n;
    }
    return report;
}

namespace {

json metrics_to_json(const MetricsReport& m) {
    return json{{"seed", m.seed},
                {"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1},
                {"verbosity", m.verbosity},
                {"unknown_occupancy", m.unknown_occupancy},
                {"precision_degenerate", m.precision_degenerate},
                {"test_size", m.test_size},
                {"class_names", m.class_names},
                {"confusion", m.confusion}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.verbosity = j.at("verbosity").get<double>();
    m.unknown_occupancy = j.at("unknown_occupancy").get<double>();
    m.precision_degenerate = j.at("precision_degenerate").get<bool>();
    m.test_size = j.at("test_size").get<std::size_t>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    return m;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["schema_version"] = 1;
    j["task"] = report.task;
    j["config_digest"] = report.config_digest;
    j["environment"] = report.environment;
    j["config"] = report.config_text;
    j["seeds"] = report.seeds;
    j["runs"] = json::array();
    for (const MetricsReport& m : report.runs) j["runs"].push_back(metrics_to_json(m));
    j["mean"] = {{"precision", report.mean_precision},
                 {"recall", report.mean_recall},
                 {"f1", report.mean_f1},
                 {"verbosity", report.mean_verbosity},
                 {"unknown_occupancy", report.mean_unknown_occupancy}};
    return j.dump(2);
}

void write_report(const std::string& path, const ExperimentReport& report) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << report_to_json(report) << "\n";
}

ExperimentReport read_report(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    json j;
    is >> j;
    ExperimentReport report;
    report.task = j.at("task").get<std::string>();
    report.config_digest = j.at("config_digest").get<std::string>();
    report.environment = j.at("environment").get<std::string>();
    report.config_text = j.at("config").get<std::string>();
    report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const json& r : j.at("runs")) report.runs.push_back(metrics_from_json(r));
    report.mean_precision = j.at("mean").at("precision").get<double>();
    report.mean_recall = j.at("mean").at("recall").get<double>();
    report.mean_f1 = j.at("mean").at("f1").get<double>();
    report.mean_verbosity = j.at("mean").at("verbosity").get<double>();
    report.mean_unknown_occupancy = j.at("mean").at("unknown_occupancy").get<double>();
    return report;
}

std::string render_report(const ExperimentReport& report) {
    std::ostringstream os;
    os.precision(4);
    os << "task: " << report.task << "  (config " << report.config_digest << ")\n";
    os << "runs: " << report.runs.size() << "\n";
    for (const MetricsReport& m : report.runs) {
        os << "  seed " << m.seed << ": precision " << m.precision << ", recall " << m.recall
           << ", f1 " << m.f1 << ", verbosity " << m.verbosity << ", unknown "
           << m.unknown_occupancy << (m.precision_degenerate ? " (no positive predictions)" : "")
           << "\n";
    }
    os << "mean: precision " << report.mean_precision << ", recall " << report.mean_recall
       << ", f1 " << report.mean_f1 << ", verbosity " << report.mean_verbosity << ", unknown "
       << report.mean_unknown_occupancy << "\n";
    return os.str();
}

}  // namespace scarcegan
