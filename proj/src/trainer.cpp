#include "scarcegan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace scarcegan {

std::string ablation_name(Ablation a) {
    switch (a) {
        case Ablation::Full: return "full";
        case Ablation::VanillaSsgan: return "vanilla_ssgan";
        case Ablation::TwoClass: return "two_class";
        case Ablation::NoBadGenerator: return "no_bad_generator";
        case Ablation::NoLeeway: return "no_leeway";
    }
    return "full";
}

Ablation ablation_from_name(const std::string& name) {
    if (name == "full") return Ablation::Full;
    if (name == "vanilla_ssgan") return Ablation::VanillaSsgan;
    if (name == "two_class") return Ablation::TwoClass;
    if (name == "no_bad_generator") return Ablation::NoBadGenerator;
    if (name == "no_leeway") return Ablation::NoLeeway;
    throw std::invalid_argument("unknown ablation: " + name);
}

double TrainConfig::effective_alpha(std::uint64_t step, std::size_t total_steps) const {
    if (ablation == Ablation::NoLeeway || ablation == Ablation::VanillaSsgan) return 1.0;
    double a = leeway.alpha;
    if (alpha_end >= 0.0 && total_steps > 1) {
        const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
        a = leeway.alpha + (alpha_end - leeway.alpha) * std::min(1.0, t);
    }
    return a;
}

double TrainConfig::effective_reward() const {
    return ablation == Ablation::VanillaSsgan ? 0.0 : reward_weight;
}

bool TrainConfig::complement_generator() const {
    return ablation != Ablation::VanillaSsgan && ablation != Ablation::NoBadGenerator;
}

std::string serialize_config(const TrainConfig& cfg) {
    std::ostringstream os;
    os << "batch_size=" << cfg.batch_size << "\n";
    os << "steps=" << cfg.steps << "\n";
    os << "epochs=" << cfg.epochs << "\n";
    os << "seed=" << cfg.seed << "\n";
    os << "alpha=" << cfg.leeway.alpha << "\n";
    os << "alpha_end=" << cfg.alpha_end << "\n";
    os << "epsilon=" << cfg.gen_cfg.epsilon << "\n";
    os << "entropy_weight=" << cfg.gen_cfg.entropy_weight << "\n";
    os << "low_density_weight=" << cfg.gen_cfg.low_density_weight << "\n";
    os << "feature_matching_weight=" << cfg.gen_cfg.feature_matching_weight << "\n";
    os << "reward_weight=" << cfg.reward_weight << "\n";
    os << "lr_initial=" << cfg.lr_schedule.initial_rate << "\n";
    os << "lr_decay_rate=" << cfg.lr_schedule.decay_rate << "\n";
    os << "lr_decay_steps=" << cfg.lr_schedule.decay_steps << "\n";
    os << "ablation=" << ablation_name(cfg.ablation) << "\n";
    os << "disc_base_widths=";
    for (std::size_t i = 0; i < cfg.disc_base_widths.size(); ++i) {
        if (i) os << ",";
        os << cfg.disc_base_widths[i];
    }
    os << "\n";
    os << "gen_hidden=" << cfg.gen_hidden << "\n";
    os << "noise_dim=" << cfg.noise_dim << "\n";
    return os.str();
}

TrainConfig parse_config(const std::string& text) {
    TrainConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected key=value, got '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "batch_size") cfg.batch_size = std::stoul(val);
        else if (key == "steps") cfg.steps = std::stoul(val);
        else if (key == "epochs") cfg.epochs = std::stoul(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "alpha") cfg.leeway.alpha = std::stod(val);
        else if (key == "alpha_end") cfg.alpha_end = std::stod(val);
        else if (key == "epsilon") cfg.gen_cfg.epsilon = std::stod(val);
        else if (key == "entropy_weight") cfg.gen_cfg.entropy_weight = std::stod(val);
        else if (key == "low_density_weight") cfg.gen_cfg.low_density_weight = std::stod(val);
        else if (key == "feature_matching_weight") cfg.gen_cfg.feature_matching_weight = std::stod(val);
        else if (key == "reward_weight") cfg.reward_weight = std::stod(val);
        else if (key == "lr_initial") cfg.lr_schedule.initial_rate = std::stod(val);
        else if (key == "lr_decay_rate") cfg.lr_schedule.decay_rate = std::stod(val);
        else if (key == "lr_decay_steps") cfg.lr_schedule.decay_steps = std::stoul(val);
        else if (key == "ablation") cfg.ablation = ablation_from_name(val);
        else if (key == "disc_base_widths") {
            cfg.disc_base_widths.clear();
            std::istringstream ws(val);
            std::string tok;
            while (std::getline(ws, tok, ',')) cfg.disc_base_widths.push_back(std::stoul(tok));
        } else if (key == "gen_hidden") cfg.gen_hidden = std::stoul(val);
        else if (key == "noise_dim") cfg.noise_dim = std::stoul(val);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

TrainConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::size_t LabeledPrior::feature_width() const {
    return samples.empty() ? 0 : samples.front().cols;
}

ClassLayout LabeledPrior::layout() const {
    ClassLayout l;
    l.names = class_names;
    l.names.push_back("U");
    return l;
}

void LabeledPrior::validate() const {
    if (class_names.size() != samples.size()) {
        throw std::invalid_argument("prior: " + std::to_string(class_names.size()) +
                                    " class names for " + std::to_string(samples.size()) +
                                    " sample sets");
    }
    if (class_names.size() < 2) throw std::invalid_argument("prior: need at least two classes");
    if (class_names.back() != "R") {
        throw std::invalid_argument("prior: last class must be the positive class R, got '" +
                                    class_names.back() + "'");
    }
    for (std::size_t c = 0; c < samples.size(); ++c) {
        if (samples[c].rows == 0) {
            throw std::invalid_argument("prior: class '" + class_names[c] + "' is empty");
        }
        if (samples[c].cols != feature_width()) {
            throw std::invalid_argument("prior: class '" + class_names[c] +
                                        "' has inconsistent feature width");
        }
        if (class_names[c] == "U") throw std::invalid_argument("prior: no sample may be labeled U");
    }
}

LabeledPrior LabeledPrior::collapse_negatives() const {
    validate();
    LabeledPrior out;
    out.class_names = {"NEG", "R"};
    Matrix neg;
    for (std::size_t c = 0; c + 1 < samples.size(); ++c) append_rows(neg, samples[c]);
    out.samples = {std::move(neg), samples.back()};
    return out;
}

namespace {

// need distinct indices when the class is large enough; shuffled cyclic
// repetition otherwise so every scarce sample still appears
std::vector<std::size_t> draw_indices(std::size_t population, std::size_t need,
                                      std::mt19937_64& rng) {
    std::vector<std::size_t> idx(population);
    for (std::size_t i = 0; i < population; ++i) idx[i] = i;
    if (population >= need) {
        for (std::size_t i = 0; i < need; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, population - 1);
            std::swap(idx[i], idx[d(rng)]);
        }
        idx.resize(need);
        return idx;
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> out;
    out.reserve(need);
    while (out.size() < need) {
        for (std::size_t i = 0; i < population && out.size() < need; ++i) out.push_back(idx[i]);
    }
    return out;
}

void check_finite_loss(double v, const char* term) {
    if (!std::isfinite(v)) {
        throw std::runtime_error(std::string("train_step: non-finite loss term '") + term + "'");
    }
}

}  // namespace

SupBatch compose_supervised_batch(const LabeledPrior& prior, std::size_t batch_size,
                                  std::mt19937_64& rng) {
    prior.validate();
    const std::size_t n_classes = prior.class_names.size();
    if (batch_size % n_classes != 0) {
        throw std::invalid_argument("batch size " + std::to_string(batch_size) +
                                    " is not divisible by " + std::to_string(n_classes) +
                                    " supervised classes");
    }
    const std::size_t per_class = batch_size / n_classes;
    SupBatch batch;
    batch.x = Matrix(batch_size, prior.feature_width());
    batch.labels.resize(batch_size);
    std::size_t row = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::vector<std::size_t> idx = draw_indices(prior.samples[c].rows, per_class, rng);
        for (std::size_t k : idx) {
            const double* src = prior.samples[c].row_ptr(k);
            std::copy(src, src + batch.x.cols, batch.x.row_ptr(row));
            batch.labels[row] = c;
            ++row;
        }
    }
    // shuffle rows and labels together
    std::vector<std::size_t> perm(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    SupBatch shuffled;
    shuffled.x = take_rows(batch.x, perm);
    shuffled.labels.resize(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) shuffled.labels[i] = batch.labels[perm[i]];
    return shuffled;
}

TrainState init_train_state(const TrainConfig& cfg, const LabeledPrior& prior) {
    prior.validate();
    const std::size_t in_width = prior.feature_width();
    const std::size_t noise_dim = cfg.noise_dim ? cfg.noise_dim : in_width;
    TrainState st;
    st.rng.seed(cfg.seed);
    st.disc = Discriminator(in_width, cfg.disc_base_widths, prior.layout(),
                            cfg.disc_base_widths.size() - 1);
    st.disc.init(st.rng);
    st.gen = Generator(noise_dim, cfg.gen_hidden, in_width);
    st.gen.init(st.rng);
    {
        auto dp = st.disc.params();
        st.disc_adam.init(dp);
        auto gp = st.gen.params();
        st.gen_adam.init(gp);
    }
    return st;
}

StepRecord train_step(TrainState& state, const SupBatch& sup, const Matrix& unsup_batch,
                      const TrainConfig& cfg) {
    const ClassLayout& layout = state.disc.layout();
    const std::size_t pos_idx = layout.positive_index();
    const double alpha = cfg.effective_alpha(state.step, state.total_steps);
    const double reward = cfg.effective_reward();
    const double lr = cfg.lr_schedule.rate(state.step);

    StepRecord rec;
    rec.step = state.step;
    rec.lr = lr;

    // ---- phase 1: supervised discriminator, L_D^S = L_D^{S+} + L_D^{S-}
    state.disc.zero_grad();
    DiscOutput sup_out = state.disc.forward(sup.x, Head::Supervised);
    std::vector<bool> pos_mask(sup.labels.size());
    std::vector<std::size_t> neg_rows;
    std::vector<std::size_t> neg_labels;
    for (std::size_t i = 0; i < sup.labels.size(); ++i) {
        pos_mask[i] = sup.labels[i] == pos_idx;
        if (!pos_mask[i]) {
            neg_rows.push_back(i);
            neg_labels.push_back(sup.labels[i]);
        }
    }
    LossGrad lp = loss_sup_positive(sup_out.sup, pos_mask, pos_idx, reward);
    LossGrad ln = loss_sup_negative(take_rows(sup_out.sup, neg_rows), neg_labels, layout,
                                    LeewayConfig{alpha});
    Matrix sup_grad = lp.grad;  // zero on negative rows
    for (std::size_t k = 0; k < neg_rows.size(); ++k) {
        double* dst = sup_grad.row_ptr(neg_rows[k]);
        const double* src = ln.grad.row_ptr(k);
        for (std::size_t j = 0; j < sup_grad.cols; ++j) dst[j] += src[j];
    }
    rec.sup_pos = lp.value;
    rec.sup_neg = ln.value;
    rec.sup_total = lp.value + ln.value;
    rec.batch_recall = hard_recall(sup_out.sup, pos_mask, pos_idx);
    check_finite_loss(rec.sup_pos, "L_D^{S+}");
    check_finite_loss(rec.sup_neg, "L_D^{S-}");
    state.disc.backward(sup_grad, std::nullopt);
    {
        auto dp = state.disc.params();
        adam_step(dp, state.disc_adam, lr);
    }
    rec.phases.push_back("sup");

    // ---- phase 2: unsupervised discriminator, real first, then fake
    state.disc.zero_grad();
    DiscOutput real_out = state.disc.forward(unsup_batch, Head::Unsupervised);
    LossGrad lreal = loss_unsup_real(real_out.unsup, LeewayConfig{alpha});
    rec.unsup_real = lreal.value;
    check_finite_loss(rec.unsup_real, "L_D^{US real}");
    state.disc.backward(std::nullopt, lreal.grad);
    {
        auto dp = state.disc.params();
        adam_step(dp, state.disc_adam, lr);
    }
    rec.phases.push_back("unsup_real");

    Matrix z_fake = sample_noise(cfg.batch_size, state.gen.noise_dim(), state.rng);
    Matrix fake = state.gen.forward(z_fake, /*train=*/true, /*cache=*/false);
    state.disc.zero_grad();
    DiscOutput fake_out = state.disc.forward(fake, Head::Unsupervised);
    LossGrad lfake = loss_unsup_fake(fake_out.unsup);
    rec.unsup_fake = lfake.value;
    check_finite_loss(rec.unsup_fake, "L_D^{US fake}");
    state.disc.backward(std::nullopt, lfake.grad);
    {
        auto dp = state.disc.params();
        adam_step(dp, state.disc_adam, lr);
    }
    rec.unsup_total = loss_unsup_total(rec.unsup_real, rec.unsup_fake);
    rec.phases.push_back("unsup_fake");

    // ---- phase 3: generator with the discriminator frozen
    Matrix z_gen = sample_noise(cfg.batch_size, state.gen.noise_dim(), state.rng);
    state.gen.zero_grad();
    Matrix input_grad;
    if (cfg.complement_generator()) {
        // real-batch features first so the fake pass owns the caches
        Matrix f_real = state.disc.forward(unsup_batch, Head::Supervised, /*cache=*/false).features;
        Matrix xg = state.gen.forward(z_gen, /*train=*/true);
        DiscOutput gen_out = state.disc.forward(xg, Head::Supervised);
        std::size_t skipped = 0;
        LossGrad pt;
        bool have_pt = false;
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < gen_out.features.rows; ++i) {
            double s = 0.0;
            const double* f = gen_out.features.row_ptr(i);
            for (std::size_t k = 0; k < gen_out.features.cols; ++k) s += f[k] * f[k];
            if (s > 0.0) ++nonzero;
        }
        if (nonzero >= 2) {
            pt = gen_pull_away(gen_out.features, &skipped);
            have_pt = true;
            if (skipped > 0) {
                std::cerr << "warning: pull-away skipped " << skipped
                          << " zero-norm feature rows at step " << state.step << "\n";
            }
        } else {
            std::cerr << "warning: pull-away term disabled at step " << state.step
                      << " (fewer than 2 nonzero feature rows)\n";
            pt.grad = Matrix::zeros(gen_out.features.rows, gen_out.features.cols);
        }
        LossGrad ld = gen_low_density(gen_out.sup, cfg.gen_cfg);
        LossGrad fm = gen_feature_matching(gen_out.features, f_real);
        rec.gen_pull_away = have_pt ? pt.value : 0.0;
        rec.gen_low_density = ld.value;
        rec.gen_feature_matching = fm.value;
        rec.gen_total = gen_total_loss(rec.gen_pull_away, rec.gen_low_density,
                                       rec.gen_feature_matching, cfg.gen_cfg);
        check_finite_loss(rec.gen_pull_away, "generator pull-away");
        check_finite_loss(rec.gen_low_density, "generator low-density");
        check_finite_loss(rec.gen_feature_matching, "generator feature-matching");

        Matrix head_grad = ld.grad;
        scale_inplace(head_grad, cfg.gen_cfg.low_density_weight);
        Matrix tap_grad = pt.grad;
        scale_inplace(tap_grad, cfg.gen_cfg.entropy_weight);
        Matrix fm_grad = fm.grad;
        scale_inplace(fm_grad, cfg.gen_cfg.feature_matching_weight);
        add_inplace(tap_grad, fm_grad);
        state.disc.zero_grad();  // discriminator stays frozen; its grads are scratch here
        input_grad = state.disc.backward(head_grad, std::nullopt, tap_grad);
    } else {
        // fooling objective: CCE toward the known-real class on the fakes
        Matrix xg = state.gen.forward(z_gen, /*train=*/true);
        DiscOutput gen_out = state.disc.forward(xg, Head::Unsupervised);
        LossGrad fool = cce_uniform_target_grad(gen_out.unsup, kUnsupKnown);
        rec.gen_total = fool.value;
        check_finite_loss(rec.gen_total, "generator CCE");
        state.disc.zero_grad();
        input_grad = state.disc.backward(std::nullopt, fool.grad);
    }
    state.gen.backward(input_grad);
    {
        auto gp = state.gen.params();
        adam_step(gp, state.gen_adam, lr);
    }
    rec.phases.push_back("gen");

    state.step += 1;
    return rec;
}

namespace {

Matrix next_unlabeled_batch(TrainState& state, const Matrix& unlabeled, std::size_t batch_size) {
    const std::size_t n = unlabeled.rows;
    std::vector<std::size_t> pick(batch_size);
    if (n >= batch_size) {
        if (state.unlabeled_order.size() != n) {
            state.unlabeled_order.resize(n);
            for (std::size_t i = 0; i < n; ++i) state.unlabeled_order[i] = i;
            std::shuffle(state.unlabeled_order.begin(), state.unlabeled_order.end(), state.rng);
            state.unlabeled_pos = 0;
        }
        if (state.unlabeled_pos + batch_size > n) {
            std::shuffle(state.unlabeled_order.begin(), state.unlabeled_order.end(), state.rng);
            state.unlabeled_pos = 0;
        }
        for (std::size_t i = 0; i < batch_size; ++i)
            pick[i] = state.unlabeled_order[state.unlabeled_pos + i];
        state.unlabeled_pos += batch_size;
    } else {
        std::uniform_int_distribution<std::size_t> d(0, n - 1);
        for (std::size_t i = 0; i < batch_size; ++i) pick[i] = d(state.rng);
    }
    return take_rows(unlabeled, pick);
}

void run_steps(TrainState& state, const TrainConfig& cfg, const LabeledPrior& prior,
               const Matrix& unlabeled, std::size_t steps) {
    for (std::size_t s = 0; s < steps; ++s) {
        SupBatch sup = compose_supervised_batch(prior, cfg.batch_size, state.rng);
        Matrix unsup = next_unlabeled_batch(state, unlabeled, cfg.batch_size);
        state.history.push_back(train_step(state, sup, unsup, cfg));
    }
}

}  // namespace

TrainState train(const TrainConfig& cfg, const LabeledPrior& prior, const Matrix& unlabeled) {
    if (unlabeled.rows == 0) throw std::invalid_argument("train: unlabeled set is empty");
    const LabeledPrior* effective = &prior;
    LabeledPrior collapsed;
    if (cfg.ablation == Ablation::TwoClass && prior.class_names.size() > 2) {
        collapsed = prior.collapse_negatives();
        effective = &collapsed;
    }
    effective->validate();
    if (unlabeled.cols != effective->feature_width()) {
        throw std::invalid_argument("train: unlabeled width " + std::to_string(unlabeled.cols) +
                                    " does not match prior width " +
                                    std::to_string(effective->feature_width()));
    }
    TrainState state = init_train_state(cfg, *effective);
    std::size_t steps = cfg.steps;
    if (steps == 0) {
        const std::size_t per_epoch = std::max<std::size_t>(1, unlabeled.rows / cfg.batch_size);
        steps = cfg.epochs * per_epoch;
    }
    state.total_steps = steps;
    run_steps(state, cfg, *effective, unlabeled, steps);
    return state;
}

void train_continue(TrainState& state, const TrainConfig& cfg, const LabeledPrior& prior,
                    const Matrix& unlabeled, std::size_t extra_steps) {
    const LabeledPrior* effective = &prior;
    LabeledPrior collapsed;
    if (cfg.ablation == Ablation::TwoClass && prior.class_names.size() > 2) {
        collapsed = prior.collapse_negatives();
        effective = &collapsed;
    }
    run_steps(state, cfg, *effective, unlabeled, extra_steps);
}

Checkpoint make_checkpoint(const TrainState& state) {
    Checkpoint ck;
    ck.disc = state.disc;
    ck.gen = state.gen;
    ck.disc_adam = state.disc_adam;
    ck.gen_adam = state.gen_adam;
    ck.step = state.step;
    std::ostringstream os;
    os << state.rng;
    ck.rng_state = os.str();
    return ck;
}

TrainState state_from_checkpoint(const Checkpoint& ck) {
    TrainState st;
    st.disc = ck.disc;
    if (ck.gen) st.gen = *ck.gen;
    if (ck.disc_adam) st.disc_adam = *ck.disc_adam;
    if (ck.gen_adam) st.gen_adam = *ck.gen_adam;
    st.step = ck.step;
    if (!ck.rng_state.empty()) {
        std::istringstream is(ck.rng_state);
        is >> st.rng;
    }
    return st;
}

void write_history_csv(const std::string& path, const std::vector<StepRecord>& history) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "step,term,value\n";
    os.precision(17);
    for (const StepRecord& r : history) {
        os << r.step << ",sup_pos," << r.sup_pos << "\n";
        os << r.step << ",sup_neg," << r.sup_neg << "\n";
        os << r.step << ",sup_total," << r.sup_total << "\n";
        os << r.step << ",unsup_real," << r.unsup_real << "\n";
        os << r.step << ",unsup_fake," << r.unsup_fake << "\n";
        os << r.step << ",unsup_total," << r.unsup_total << "\n";
        os << r.step << ",gen_pull_away," << r.gen_pull_away << "\n";
        os << r.step << ",gen_low_density," << r.gen_low_density << "\n";
        os << r.step << ",gen_feature_matching," << r.gen_feature_matching << "\n";
        os << r.step << ",gen_total," << r.gen_total << "\n";
        os << r.step << ",lr," << r.lr << "\n";
        os << r.step << ",batch_recall," << r.batch_recall << "\n";
    }
}

}  // namespace scarcegan
