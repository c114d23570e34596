#include "scarcegan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace scarcegan {

namespace {

// the standard KDDCUP99 attack catalogue (train 10% plus the corrected test
// file's additional attack names)
const std::unordered_map<std::string, KddCategory>& label_catalogue() {
    static const std::unordered_map<std::string, KddCategory> m = {
        {"normal", KddCategory::Normal},
        // DoS
        {"back", KddCategory::Dos},
        {"land", KddCategory::Dos},
        {"neptune", KddCategory::Dos},
        {"pod", KddCategory::Dos},
        {"smurf", KddCategory::Dos},
        {"teardrop", KddCategory::Dos},
        {"apache2", KddCategory::Dos},
        {"udpstorm", KddCategory::Dos},
        {"processtable", KddCategory::Dos},
        {"mailbomb", KddCategory::Dos},
        // Probe
        {"ipsweep", KddCategory::Probe},
        {"nmap", KddCategory::Probe},
        {"portsweep", KddCategory::Probe},
        {"satan", KddCategory::Probe},
        {"mscan", KddCategory::Probe},
        {"saint", KddCategory::Probe},
        // R2L
        {"ftp_write", KddCategory::R2l},
        {"guess_passwd", KddCategory::R2l},
        {"imap", KddCategory::R2l},
        {"multihop", KddCategory::R2l},
        {"phf", KddCategory::R2l},
        {"spy", KddCategory::R2l},
        {"warezclient", KddCategory::R2l},
        {"warezmaster", KddCategory::R2l},
        {"snmpgetattack", KddCategory::R2l},
        {"named", KddCategory::R2l},
        {"xlock", KddCategory::R2l},
        {"xsnoop", KddCategory::R2l},
        {"sendmail", KddCategory::R2l},
        {"httptunnel", KddCategory::R2l},
        {"worm", KddCategory::R2l},
        {"snmpguess", KddCategory::R2l},
        // U2R
        {"buffer_overflow", KddCategory::U2r},
        {"loadmodule", KddCategory::U2r},
        {"perl", KddCategory::U2r},
        {"rootkit", KddCategory::U2r},
        {"xterm", KddCategory::U2r},
        {"ps", KddCategory::U2r},
        {"sqlattack", KddCategory::U2r},
    };
    return m;
}

// 0-based positions of the symbolic attributes in the 41-column schema
constexpr std::array<std::size_t, kKddSymbolicCount> kSymbolicCols = {1, 2, 3};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct U128Hash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const {
        return p.first ^ (p.second * 0x9e3779b97f4a7c15ULL);
    }
};

std::uint16_t intern(std::vector<std::string>& vocab, const std::string& v) {
    for (std::size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i] == v) return static_cast<std::uint16_t>(i);
    vocab.push_back(v);
    return static_cast<std::uint16_t>(vocab.size() - 1);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

}  // namespace

std::string kdd_category_name(KddCategory c) {
    switch (c) {
        case KddCategory::Normal: return "normal";
        case KddCategory::Dos: return "dos";
        case KddCategory::Probe: return "probe";
        case KddCategory::R2l: return "r2l";
        case KddCategory::U2r: return "u2r";
    }
    return "normal";
}

KddCategory kdd_category_for_label(const std::string& label) {
    auto it = label_catalogue().find(label);
    if (it == label_catalogue().end()) {
        throw std::invalid_argument("unknown KDD label '" + label + "'");
    }
    return it->second;
}

std::map<std::string, std::size_t> KddDataset::category_counts(bool distinct_only) const {
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < size(); ++i) {
        if (distinct_only && duplicate[i]) continue;
        counts[kdd_category_name(category[i])] += 1;
    }
    return counts;
}

std::vector<std::size_t> KddDataset::rows_of(KddCategory c, bool distinct_only) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
        if (category[i] != c) continue;
        if (distinct_only && duplicate[i]) continue;
        rows.push_back(i);
    }
    return rows;
}

KddDataset load_kdd(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open KDD file " + path);
    KddDataset ds;
    std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, U128Hash> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::array<double, kKddNumericCount> nums{};
        std::array<std::uint16_t, kKddSymbolicCount> syms{};
        std::size_t field = 0, num_i = 0, sym_i = 0;
        std::size_t start = 0;
        std::string label;
        bool bad = false;
        while (start <= line.size() && !bad) {
            std::size_t comma = line.find(',', start);
            const bool last = comma == std::string::npos;
            std::string tok = line.substr(start, last ? std::string::npos : comma - start);
            if (field < 41) {
                bool symbolic = false;
                for (std::size_t s = 0; s < kKddSymbolicCount; ++s) {
                    if (field == kSymbolicCols[s]) {
                        syms[sym_i++] = intern(ds.sym_vocab[s], tok);
                        symbolic = true;
                        break;
                    }
                }
                if (!symbolic) {
                    try {
                        nums[num_i++] = std::stod(tok);
                    } catch (...) {
                        bad = true;
                    }
                }
            } else if (field == 41) {
                if (tok.empty() || tok.back() != '.') {
                    bad = true;
                } else {
                    label = tok.substr(0, tok.size() - 1);
                }
            } else {
                bad = true;  // too many fields
            }
            ++field;
            if (last) break;
            start = comma + 1;
        }
        if (bad || field != 42) {
            throw std::runtime_error("malformed KDD record at line " + std::to_string(line_no) +
                                     " of " + path + " (" + std::to_string(field) + " fields)");
        }
        const KddCategory cat = kdd_category_for_label(label);  // throws on unknown labels

        const std::pair<std::uint64_t, std::uint64_t> key = {
            fnv1a(line, 14695981039346656037ULL), fnv1a(line, 0x51ed270b7a2cf345ULL)};
        const bool dup = !seen.insert(key).second;

        ds.numeric.push_back(nums);
        ds.symbolic.push_back(syms);
        ds.category.push_back(cat);
        ds.labels.push_back(label);
        ds.duplicate.push_back(dup);
    }
    return ds;
}

std::size_t EncoderMetadata::encoded_width() const {
    std::size_t w = kKddNumericCount;
    for (const auto& v : vocab) w += v.size() + 1;  // +1 unseen bucket
    return w;
}

std::uint64_t EncoderMetadata::checksum() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& v : vocab)
        for (const std::string& s : v) h = fnv1a(s + ";", h);
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < kKddNumericCount; ++i) os << num_min[i] << "," << num_max[i] << ";";
    return fnv1a(os.str(), h);
}

EncoderMetadata fit_encoder(const KddDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("fit_encoder: empty dataset");
    EncoderMetadata meta;
    for (std::size_t s = 0; s < kKddSymbolicCount; ++s) {
        meta.vocab[s] = data.sym_vocab[s];
        std::sort(meta.vocab[s].begin(), meta.vocab[s].end());
    }
    for (std::size_t j = 0; j < kKddNumericCount; ++j) {
        meta.num_min[j] = data.numeric[0][j];
        meta.num_max[j] = data.numeric[0][j];
    }
    for (const auto& row : data.numeric) {
        for (std::size_t j = 0; j < kKddNumericCount; ++j) {
            meta.num_min[j] = std::min(meta.num_min[j], row[j]);
            meta.num_max[j] = std::max(meta.num_max[j], row[j]);
        }
    }
    return meta;
}

Matrix encode(const KddDataset& data, const std::vector<std::size_t>& rows,
              const EncoderMetadata& meta) {
    Matrix out(rows.size(), meta.encoded_width());
    // per-column vocab lookup, sorted vocab -> one-hot position
    std::array<std::unordered_map<std::string, std::size_t>, kKddSymbolicCount> lookup;
    for (std::size_t s = 0; s < kKddSymbolicCount; ++s)
        for (std::size_t i = 0; i < meta.vocab[s].size(); ++i) lookup[s][meta.vocab[s][i]] = i;

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t i = rows[r];
        if (i >= data.size()) throw std::out_of_range("encode: row index out of range");
        double* dst = out.row_ptr(r);
        for (std::size_t j = 0; j < kKddNumericCount; ++j) {
            const double range = meta.num_max[j] - meta.num_min[j];
            dst[j] = range > 0.0 ? (data.numeric[i][j] - meta.num_min[j]) / range : 0.0;
        }
        std::size_t base = kKddNumericCount;
        for (std::size_t s = 0; s < kKddSymbolicCount; ++s) {
            const std::string& v = data.sym_vocab[s][data.symbolic[i][s]];
            auto it = lookup[s].find(v);
            const std::size_t slot = it != lookup[s].end() ? it->second : meta.vocab[s].size();
            dst[base + slot] = 1.0;
            base += meta.vocab[s].size() + 1;
        }
    }
    return out;
}

namespace {

void put(std::map<std::string, std::string>& m, const std::string& k, std::size_t v) {
    m[k] = std::to_string(v);
}

}  // namespace

TaskData build_rare_class_task(const KddDataset& train, const KddDataset& test,
                               const TaskSpec& spec) {
    const KddCategory pos_cat = [&] {
        for (KddCategory c : {KddCategory::Normal, KddCategory::Dos, KddCategory::Probe,
                              KddCategory::R2l, KddCategory::U2r}) {
            if (kdd_category_name(c) == spec.positive_category) return c;
        }
        throw std::invalid_argument("unknown positive category '" + spec.positive_category + "'");
    }();

    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> pos_rows = train.rows_of(pos_cat, /*distinct_only=*/true);
    std::vector<std::size_t> neg_rows = train.rows_of(KddCategory::Normal, /*distinct_only=*/true);
    if (pos_cat == KddCategory::Normal) {
        throw std::invalid_argument("rare-class task: positive category cannot be normal");
    }

    // seeded split order
    std::shuffle(pos_rows.begin(), pos_rows.end(), rng);
    std::shuffle(neg_rows.begin(), neg_rows.end(), rng);
    if (spec.subsample < 1.0) {
        const std::size_t keep =
            static_cast<std::size_t>(std::llround(spec.subsample * static_cast<double>(neg_rows.size())));
        neg_rows.resize(std::max<std::size_t>(keep, 1));
    }
    if (pos_rows.size() < spec.labeled_positive) {
        throw std::invalid_argument("rare-class task: " + std::to_string(spec.labeled_positive) +
                                    " labeled positives requested but only " +
                                    std::to_string(pos_rows.size()) + " distinct available");
    }
    if (neg_rows.size() < spec.labeled_negative) {
        throw std::invalid_argument("rare-class task: " + std::to_string(spec.labeled_negative) +
                                    " labeled negatives requested but only " +
                                    std::to_string(neg_rows.size()) + " available");
    }

    const std::vector<std::size_t> prior_pos(pos_rows.begin(),
                                             pos_rows.begin() + spec.labeled_positive);
    const std::vector<std::size_t> unlab_pos(pos_rows.begin() + spec.labeled_positive,
                                             pos_rows.end());
    const std::vector<std::size_t> prior_neg(neg_rows.begin(),
                                             neg_rows.begin() + spec.labeled_negative);
    const std::size_t unlab_neg_count =
        std::min(spec.unlabeled_negative, neg_rows.size() - spec.labeled_negative);
    const std::vector<std::size_t> unlab_neg(neg_rows.begin() + spec.labeled_negative,
                                             neg_rows.begin() + spec.labeled_negative +
                                                 unlab_neg_count);

    const EncoderMetadata meta = fit_encoder(train);

    TaskData task;
    task.name = "kdd-" + spec.positive_category;
    task.meta = meta;
    task.prior.class_names = {"NEG", "R"};
    task.prior.samples = {encode(train, prior_neg, meta), encode(train, prior_pos, meta)};

    std::vector<std::size_t> unlab = unlab_neg;
    unlab.insert(unlab.end(), unlab_pos.begin(), unlab_pos.end());
    std::shuffle(unlab.begin(), unlab.end(), rng);
    task.unlabeled = encode(train, unlab, meta);

    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (test.category[i] == pos_cat || test.category[i] == KddCategory::Normal)
            test_rows.push_back(i);
    }
    task.test_x = encode(test, test_rows, meta);
    task.test_y.resize(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i)
        task.test_y[i] = test.category[test_rows[i]] == pos_cat ? 1 : 0;

    put(task.manifest, "labeled_positive", prior_pos.size());
    put(task.manifest, "labeled_negative", prior_neg.size());
    put(task.manifest, "unlabeled_positive", unlab_pos.size());
    put(task.manifest, "unlabeled_negative", unlab_neg.size());
    put(task.manifest, "test_rows", test_rows.size());
    put(task.manifest, "encoded_width", meta.encoded_width());
    task.manifest["seed"] = std::to_string(spec.seed);
    task.manifest["subsample"] = std::to_string(spec.subsample);
    task.manifest["positive_category"] = spec.positive_category;
    task.manifest["encoder_checksum"] = std::to_string(meta.checksum());
    return task;
}

TaskData build_imbalance_task(const KddDataset& train, const KddDataset& test, double subsample,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pos_rows = train.rows_of(KddCategory::Normal, /*distinct_only=*/true);
    std::vector<std::size_t> neg_rows;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.category[i] != KddCategory::Normal && !train.duplicate[i]) neg_rows.push_back(i);
    }
    std::shuffle(pos_rows.begin(), pos_rows.end(), rng);
    std::shuffle(neg_rows.begin(), neg_rows.end(), rng);
    if (subsample < 1.0) {
        const std::size_t keep =
            static_cast<std::size_t>(std::llround(subsample * static_cast<double>(neg_rows.size())));
        neg_rows.resize(std::max<std::size_t>(keep, 1));
    }

    // the rare-class recipe's labeled fractions, rescaled to this task
    const double pos_frac = 900.0 / 999.0;
    const double neg_frac = 30000.0 / 97278.0;
    const std::size_t labeled_pos =
        static_cast<std::size_t>(std::llround(pos_frac * static_cast<double>(pos_rows.size())));
    const std::size_t labeled_neg = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(neg_frac * static_cast<double>(neg_rows.size()))));

    const EncoderMetadata meta = fit_encoder(train);

    TaskData task;
    task.name = "kdd-imbalance";
    task.meta = meta;
    task.prior.class_names = {"NEG", "R"};
    const std::vector<std::size_t> prior_pos(pos_rows.begin(), pos_rows.begin() + labeled_pos);
    const std::vector<std::size_t> prior_neg(neg_rows.begin(), neg_rows.begin() + labeled_neg);
    task.prior.samples = {encode(train, prior_neg, meta), encode(train, prior_pos, meta)};

    std::vector<std::size_t> unlab(pos_rows.begin() + labeled_pos, pos_rows.end());
    unlab.insert(unlab.end(), neg_rows.begin() + labeled_neg, neg_rows.end());
    std::shuffle(unlab.begin(), unlab.end(), rng);
    task.unlabeled = encode(train, unlab, meta);

    std::vector<std::size_t> test_rows(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) test_rows[i] = i;
    task.test_x = encode(test, test_rows, meta);
    task.test_y.resize(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        task.test_y[i] = test.category[i] == KddCategory::Normal ? 1 : 0;

    put(task.manifest, "labeled_positive", prior_pos.size());
    put(task.manifest, "labeled_negative", prior_neg.size());
    put(task.manifest, "unlabeled_pool", unlab.size());
    put(task.manifest, "test_rows", test_rows.size());
    put(task.manifest, "encoded_width", meta.encoded_width());
    task.manifest["seed"] = std::to_string(seed);
    task.manifest["subsample"] = std::to_string(subsample);
    task.manifest["positive_category"] = "normal";
    task.manifest["labeled_positive_fraction"] = std::to_string(pos_frac);
    task.manifest["labeled_negative_fraction"] = std::to_string(neg_frac);
    task.manifest["encoder_checksum"] = std::to_string(meta.checksum());
    return task;
}

void write_task_manifest(const std::string& path, const TaskData& task) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "task=" << task.name << "\n";
    for (const auto& [k, v] : task.manifest) os << k << "=" << v << "\n";
}

SyntheticSpec SyntheticSpec::defaults() {
    SyntheticSpec s;
    s.dims = 6;
    s.class_names = {"D", "N", "H", "R"};
    s.weights = {0.3, 0.3, 0.3, 0.1};
    // dim 0: non-overlapping across the negatives; dim 1: fully overlapping;
    // dim 2: partially overlapping; dims 3-5: where R separates (moderately)
    // from every negative. R itself is nested inside negative support.
    s.means = {
        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},  // D
        {4.0, 0.0, 1.5, 0.0, 0.0, 0.0},  // N
        {8.0, 0.0, 3.0, 0.0, 0.0, 0.0},  // H
        {4.0, 0.0, 1.5, 1.8, 1.8, 1.8},  // R
    };
    s.stds = {
        {0.5, 1.0, 1.0, 1.0, 1.0, 1.0},
        {0.5, 1.0, 1.0, 1.0, 1.0, 1.0},
        {0.5, 1.0, 1.0, 1.0, 1.0, 1.0},
        {1.0, 1.0, 1.0, 0.8, 0.8, 0.8},
    };
    return s;
}

void SyntheticSpec::validate() const {
    if (class_names.size() < 2) throw std::invalid_argument("synthetic spec: need >= 2 classes");
    if (class_names.back() != "R") {
        throw std::invalid_argument("synthetic spec: last class must be R");
    }
    if (weights.size() != class_names.size() || means.size() != class_names.size() ||
        stds.size() != class_names.size()) {
        throw std::invalid_argument("synthetic spec: per-class field count mismatch");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (w <= 0.0) throw std::invalid_argument("synthetic spec: weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw std::invalid_argument("synthetic spec: weights must sum to 1");
    }
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        if (means[c].size() != dims || stds[c].size() != dims) {
            throw std::invalid_argument("synthetic spec: class '" + class_names[c] +
                                        "' has wrong dimension count");
        }
        for (double s : stds[c])
            if (s <= 0.0) throw std::invalid_argument("synthetic spec: stds must be positive");
    }
    if (label_noise < 0.0 || label_noise >= 1.0) {
        throw std::invalid_argument("synthetic spec: label_noise must be in [0,1)");
    }
}

std::string serialize_synthetic_spec(const SyntheticSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << "dims=" << spec.dims << "\n";
    os << "classes=";
    for (std::size_t i = 0; i < spec.class_names.size(); ++i)
        os << (i ? "," : "") << spec.class_names[i];
    os << "\n";
    os << "label_noise=" << spec.label_noise << "\n";
    for (std::size_t c = 0; c < spec.class_names.size(); ++c) {
        os << "weight." << spec.class_names[c] << "=" << spec.weights[c] << "\n";
        os << "mean." << spec.class_names[c] << "=";
        for (std::size_t d = 0; d < spec.dims; ++d) os << (d ? "," : "") << spec.means[c][d];
        os << "\n";
        os << "std." << spec.class_names[c] << "=";
        for (std::size_t d = 0; d < spec.dims; ++d) os << (d ? "," : "") << spec.stds[c][d];
        os << "\n";
    }
    return os.str();
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
    SyntheticSpec spec = SyntheticSpec::defaults();
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("synthetic spec: expected key=value, got '" + line + "'");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::istringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(tok);
        return out;
    };
    if (kv.count("dims")) spec.dims = std::stoul(kv["dims"]);
    if (kv.count("classes")) {
        spec.class_names = split(kv["classes"]);
        spec.weights.assign(spec.class_names.size(), 1.0 / spec.class_names.size());
        spec.means.assign(spec.class_names.size(), std::vector<double>(spec.dims, 0.0));
        spec.stds.assign(spec.class_names.size(), std::vector<double>(spec.dims, 1.0));
    }
    if (kv.count("label_noise")) spec.label_noise = std::stod(kv["label_noise"]);
    for (std::size_t c = 0; c < spec.class_names.size(); ++c) {
        const std::string& name = spec.class_names[c];
        if (kv.count("weight." + name)) spec.weights[c] = std::stod(kv["weight." + name]);
        if (kv.count("mean." + name)) {
            const auto toks = split(kv["mean." + name]);
            spec.means[c].clear();
            for (const auto& t : toks) spec.means[c].push_back(std::stod(t));
        }
        if (kv.count("std." + name)) {
            const auto toks = split(kv["std." + name]);
            spec.stds[c].clear();
            for (const auto& t : toks) spec.stds[c].push_back(std::stod(t));
        }
    }
    spec.validate();
    return spec;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    const std::size_t k = spec.class_names.size();
    // largest-remainder apportionment keeps proportions exact
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = spec.weights[c] * static_cast<double>(n);
        counts[c] = static_cast<std::size_t>(exact);
        assigned += counts[c];
        remainders.push_back({exact - std::floor(exact), c});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) counts[remainders[i % k].second] += 1;

    std::mt19937_64 rng(seed);
    Matrix x(n, spec.dims);
    std::vector<std::size_t> true_labels(n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::size_t row = 0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < counts[c]; ++i, ++row) {
            double* dst = x.row_ptr(row);
            for (std::size_t d = 0; d < spec.dims; ++d)
                dst[d] = spec.means[c][d] + spec.stds[c][d] * gauss(rng);
            true_labels[row] = c;
        }
    }
    const std::vector<std::size_t> perm = shuffled_indices(n, rng);
    SyntheticData out;
    out.class_names = spec.class_names;
    out.x = take_rows(x, perm);
    out.true_labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.true_labels[i] = true_labels[perm[i]];
    out.labels = out.true_labels;

    if (spec.label_noise > 0.0 && k > 2) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> pick(0, k - 3);  // among the other negatives
        const std::size_t n_neg = k - 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (out.labels[i] >= n_neg) continue;  // positives stay clean
            if (coin(rng) >= spec.label_noise) continue;
            std::size_t other = pick(rng);
            if (other >= out.labels[i]) ++other;  // skip the current label
            out.labels[i] = other;
        }
    }
    return out;
}

TaskData build_synthetic_task(const SyntheticTaskSpec& spec) {
    spec.data.validate();
    const std::size_t k = spec.data.class_names.size();
    const std::size_t n_neg = k - 1;
    const std::size_t prior_total = spec.prior_per_negative * n_neg + spec.prior_positive;
    const std::size_t n = prior_total + spec.unlabeled + spec.test;
    // oversample so every noisy-label quota can be met
    const SyntheticData d = generate_synthetic(spec.data, n + n / 4 + 64, spec.seed);

    std::vector<std::size_t> quota(k, spec.prior_per_negative);
    quota[k - 1] = spec.prior_positive;
    std::vector<std::vector<std::size_t>> prior_rows(k);
    std::vector<std::size_t> unlab_rows, test_rows;
    for (std::size_t i = 0; i < d.x.rows; ++i) {
        const std::size_t noisy = d.labels[i];
        if (prior_rows[noisy].size() < quota[noisy]) {
            prior_rows[noisy].push_back(i);
        } else if (unlab_rows.size() < spec.unlabeled) {
            unlab_rows.push_back(i);
        } else if (test_rows.size() < spec.test) {
            test_rows.push_back(i);
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (prior_rows[c].size() < quota[c]) {
            throw std::invalid_argument("synthetic task: class '" + d.class_names[c] +
                                        "' quota not met; increase n or rebalance weights");
        }
    }
    if (test_rows.size() < spec.test) {
        throw std::invalid_argument("synthetic task: not enough samples for the test split");
    }

    TaskData task;
    task.name = "synthetic";
    task.prior.class_names = d.class_names;
    for (std::size_t c = 0; c < k; ++c)
        task.prior.samples.push_back(take_rows(d.x, prior_rows[c]));
    task.unlabeled = take_rows(d.x, unlab_rows);
    task.test_x = take_rows(d.x, test_rows);
    task.test_y.resize(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i)
        task.test_y[i] = d.true_labels[test_rows[i]];  // the test set keeps clean labels

    put(task.manifest, "prior_per_negative", spec.prior_per_negative);
    put(task.manifest, "prior_positive", spec.prior_positive);
    put(task.manifest, "unlabeled", unlab_rows.size());
    put(task.manifest, "test", test_rows.size());
    task.manifest["seed"] = std::to_string(spec.seed);
    task.manifest["label_noise"] = std::to_string(spec.data.label_noise);
    return task;
}

void write_labeled_csv(const std::string& path, const Matrix& x,
                       const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& class_names) {
    if (labels.size() != x.rows) throw std::invalid_argument("labeled csv: label count mismatch");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t j = 0; j < x.cols; ++j) os << "f" << j << ",";
    os << "label\n";
    os.precision(17);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) os << x(i, j) << ",";
        os << class_names.at(labels[i]) << "\n";
    }
}

LabeledCsv read_labeled_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("labeled csv: empty file " + path);
    std::size_t cols = 0;
    for (char c : line) cols += c == ',' ? 1 : 0;  // features = commas (last column is the label)

    LabeledCsv out;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::getline(ls, tok, ',')) {
                throw std::runtime_error("labeled csv: short row " + std::to_string(rows + 2));
            }
            values.push_back(std::stod(tok));
        }
        if (!std::getline(ls, tok)) {
            throw std::runtime_error("labeled csv: missing label on row " + std::to_string(rows + 2));
        }
        std::size_t cls = out.class_names.size();
        for (std::size_t c = 0; c < out.class_names.size(); ++c)
            if (out.class_names[c] == tok) cls = c;
        if (cls == out.class_names.size()) out.class_names.push_back(tok);
        out.labels.push_back(cls);
        ++rows;
    }
    out.x.rows = rows;
    out.x.cols = cols;
    out.x.data = std::move(values);
    return out;
}

void write_matrix_csv(const std::string& path, const Matrix& x) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t j = 0; j < x.cols; ++j) os << (j ? "," : "") << "f" << j;
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) os << (j ? "," : "") << x(i, j);
        os << "\n";
    }
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("matrix csv: empty file " + path);
    std::size_t cols = 1;
    for (char c : line) cols += c == ',' ? 1 : 0;
    Matrix out;
    out.cols = cols;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::size_t got = 0;
        while (std::getline(ls, tok, ',')) {
            out.data.push_back(std::stod(tok));
            ++got;
        }
        if (got != cols) {
            throw std::runtime_error("matrix csv: row with " + std::to_string(got) +
                                     " fields, expected " + std::to_string(cols));
        }
        out.rows += 1;
    }
    return out;
}

}  // namespace scarcegan
