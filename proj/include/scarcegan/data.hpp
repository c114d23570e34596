#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scarcegan/matrix.hpp"
#include "scarcegan/trainer.hpp"

namespace scarcegan {

inline constexpr std::size_t kKddNumericCount = 38;
inline constexpr std::size_t kKddSymbolicCount = 3;  // protocol_type, service, flag

enum class KddCategory { Normal, Dos, Probe, R2l, U2r };
std::string kdd_category_name(KddCategory c);
// throws on labels outside the documented attack/normal catalogue
KddCategory kdd_category_for_label(const std::string& label);

// Parsed KDDCUP99 records in compact columnar form. Symbolic attributes and
// labels are interned against per-column vocabularies discovered on load.
struct KddDataset {
    std::vector<std::array<double, kKddNumericCount>> numeric;
    std::vector<std::array<std::uint16_t, kKddSymbolicCount>> symbolic;
    std::vector<KddCategory> category;
    std::vector<std::string> labels;  // per record, period stripped
    std::vector<bool> duplicate;      // true when an identical record appeared earlier

    std::array<std::vector<std::string>, kKddSymbolicCount> sym_vocab;

    std::size_t size() const { return numeric.size(); }
    std::map<std::string, std::size_t> category_counts(bool distinct_only) const;
    std::vector<std::size_t> rows_of(KddCategory c, bool distinct_only) const;
};

KddDataset load_kdd(const std::string& path);

// Train-fitted encoder state: symbolic vocabularies (sorted, plus an unseen
// bucket per column) and per-column min-max scale parameters.
struct EncoderMetadata {
    std::array<std::vector<std::string>, kKddSymbolicCount> vocab;
    std::array<double, kKddNumericCount> num_min{};
    std::array<double, kKddNumericCount> num_max{};

    std::size_t encoded_width() const;
    std::uint64_t checksum() const;
};

EncoderMetadata fit_encoder(const KddDataset& data);
// one-hot symbolic columns (unseen categories routed to the extra bucket),
// numeric columns min-max scaled by the train statistics
Matrix encode(const KddDataset& data, const std::vector<std::size_t>& rows,
              const EncoderMetadata& meta);

struct TaskSpec {
    std::string positive_category = "r2l";
    std::size_t labeled_positive = 900;
    std::size_t labeled_negative = 30000;
    std::size_t unlabeled_negative = 67000;  // cap; remainder if fewer available
    std::size_t batch_size = 64;
    double subsample = 1.0;  // thins the majority class in the train pool
    std::uint64_t seed = 7;
};

// A fully assembled experiment input: two-class labeled prior, unlabeled
// pool, and an encoded test set with layout-space labels.
struct TaskData {
    std::string name;
    LabeledPrior prior;
    Matrix unlabeled;
    Matrix test_x;
    std::vector<std::size_t> test_y;  // 0 = negative, 1 = positive (R)
    EncoderMetadata meta;
    std::map<std::string, std::string> manifest;
};

TaskData build_rare_class_task(const KddDataset& train, const KddDataset& test,
                               const TaskSpec& spec);
// normal as the positive class, all intrusions pooled as the negative; prior
// sizes reuse the rare-class recipe's fractions
TaskData build_imbalance_task(const KddDataset& train, const KddDataset& test, double subsample,
                              std::uint64_t seed);

void write_task_manifest(const std::string& path, const TaskData& task);

// Synthetic five-class analog of the gaming data: Gaussian mixture per class
// with designated overlapping / partially overlapping / non-overlapping
// dimensions across the negative subclasses and the positive class nested
// inside negative support.
struct SyntheticSpec {
    std::size_t dims = 6;
    std::vector<std::string> class_names = {"D", "N", "H", "R"};
    std::vector<double> weights = {0.3, 0.3, 0.3, 0.1};
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> stds;
    double label_noise = 0.0;  // fraction of negative labels permuted among the negatives

    static SyntheticSpec defaults();
    void validate() const;
};

SyntheticSpec parse_synthetic_spec(const std::string& text);
std::string serialize_synthetic_spec(const SyntheticSpec& spec);

struct SyntheticData {
    Matrix x;
    std::vector<std::size_t> labels;       // possibly noisy (the training view)
    std::vector<std::size_t> true_labels;  // generating component
    std::vector<std::string> class_names;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed);

// Assembles a full experiment from the synthetic generator: a weak labeled
// prior (noisy labels), an unlabeled pool, and a clean-label test set.
struct SyntheticTaskSpec {
    SyntheticSpec data = SyntheticSpec::defaults();
    std::size_t prior_per_negative = 500;
    std::size_t prior_positive = 100;
    std::size_t unlabeled = 20000;
    std::size_t test = 4000;
    std::uint64_t seed = 7;
};

TaskData build_synthetic_task(const SyntheticTaskSpec& spec);

// CSV with header f0..f{d-1},label; labels written as class names
void write_labeled_csv(const std::string& path, const Matrix& x,
                       const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& class_names);
struct LabeledCsv {
    Matrix x;
    std::vector<std::size_t> labels;
    std::vector<std::string> class_names;
};
LabeledCsv read_labeled_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& x);
Matrix read_matrix_csv(const std::string& path);

}  // namespace scarcegan
