#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scarcegan/checkpoint.hpp"
#include "scarcegan/losses.hpp"
#include "scarcegan/model.hpp"
#include "scarcegan/optim.hpp"

namespace scarcegan {

enum class Ablation { Full, VanillaSsgan, TwoClass, NoBadGenerator, NoLeeway };

std::string ablation_name(Ablation a);
Ablation ablation_from_name(const std::string& name);

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t steps = 0;        // takes precedence when nonzero
    std::size_t epochs = 1;       // used when steps == 0
    std::uint64_t seed = 1;
    LeewayConfig leeway;
    GenLossConfig gen_cfg;
    double reward_weight = 1.0;
    LRSchedule lr_schedule{1e-3, 0.97, 200};
    Ablation ablation = Ablation::Full;
    std::vector<std::size_t> disc_base_widths = {128, 64, 32};
    std::size_t gen_hidden = 64;
    std::size_t noise_dim = 0;    // 0 -> data feature width
    double alpha_end = -1.0;      // optional linear alpha schedule target; < 0 keeps alpha fixed

    // effective settings once the ablation switches are applied
    double effective_alpha(std::uint64_t step, std::size_t total_steps) const;
    double effective_reward() const;
    bool complement_generator() const;
};

std::string serialize_config(const TrainConfig& cfg);
TrainConfig parse_config(const std::string& text);
TrainConfig load_config_file(const std::string& path);

// Per-class sample matrices, negatives first, positive class "R" last.
// The leeway class U never appears here.
struct LabeledPrior {
    std::vector<std::string> class_names;
    std::vector<Matrix> samples;

    std::size_t feature_width() const;
    ClassLayout layout() const;  // class_names + "U"
    void validate() const;
    // folds all negative classes into a single "NEG" class
    LabeledPrior collapse_negatives() const;
};

struct SupBatch {
    Matrix x;
    std::vector<std::size_t> labels;  // indices into the layout
};

SupBatch compose_supervised_batch(const LabeledPrior& prior, std::size_t batch_size,
                                  std::mt19937_64& rng);

struct StepRecord {
    std::uint64_t step = 0;
    double sup_pos = 0, sup_neg = 0, sup_total = 0;
    double unsup_real = 0, unsup_fake = 0, unsup_total = 0;
    double gen_pull_away = 0, gen_low_density = 0, gen_feature_matching = 0, gen_total = 0;
    double lr = 0;
    double batch_recall = 0;  // hard argmax recall on the supervised batch
    std::vector<std::string> phases;  // update order actually applied
};

struct TrainState {
    Discriminator disc;
    Generator gen;
    AdamState disc_adam;
    AdamState gen_adam;
    std::mt19937_64 rng;
    std::uint64_t step = 0;
    std::size_t total_steps = 0;
    std::vector<StepRecord> history;
    std::vector<std::size_t> unlabeled_order;
    std::size_t unlabeled_pos = 0;
};

TrainState init_train_state(const TrainConfig& cfg, const LabeledPrior& prior);

// One full update: supervised D, unsupervised D on real then fake, then G
// with D frozen. Throws if any loss term goes non-finite, naming the term.
StepRecord train_step(TrainState& state, const SupBatch& sup, const Matrix& unsup_batch,
                      const TrainConfig& cfg);

// Runs cfg.steps (or epochs over the unlabeled pool) from scratch.
TrainState train(const TrainConfig& cfg, const LabeledPrior& prior, const Matrix& unlabeled);
// Continues an existing state for extra_steps more steps.
void train_continue(TrainState& state, const TrainConfig& cfg, const LabeledPrior& prior,
                    const Matrix& unlabeled, std::size_t extra_steps);

Checkpoint make_checkpoint(const TrainState& state);
TrainState state_from_checkpoint(const Checkpoint& ck);

void write_history_csv(const std::string& path, const std::vector<StepRecord>& history);

}  // namespace scarcegan
