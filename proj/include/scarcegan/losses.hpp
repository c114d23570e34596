#pragma once

#include <cstddef>
#include <vector>

#include "scarcegan/matrix.hpp"
#include "scarcegan/model.hpp"

namespace scarcegan {

// Probabilities are clamped to this floor before any log. The forced-U term
// evaluates log of a near-zero probability by construction, so training must
// stay finite.
inline constexpr double kLogClamp = 1e-12;

// Weight splitting the known-negative loss from the forced-Unknown loss.
// alpha = 1 disables the leeway entirely.
struct LeewayConfig {
    double alpha = 0.65;
};

struct GenLossConfig {
    double epsilon = 0.75;  // confidence threshold of the low-density indicator
    double entropy_weight = 1.0;
    double low_density_weight = 1.0;
    double feature_matching_weight = 1.0;
};

// Loss value plus its gradient with respect to the probability (or feature)
// matrix it was computed from.
struct LossGrad {
    double value = 0.0;
    Matrix grad;
};

// Mean negative log probability of each row's target class.
double cce(const Matrix& probs, const std::vector<std::size_t>& targets);
LossGrad cce_grad(const Matrix& probs, const std::vector<std::size_t>& targets);
// Every row shares one target column.
double cce_uniform_target(const Matrix& probs, std::size_t target);
LossGrad cce_uniform_target_grad(const Matrix& probs, std::size_t target);

// Differentiable recall surrogate: mean positive-class probability over the
// masked rows. The hard argmax recall is a separate metric (hard_recall).
double soft_positive_recall(const Matrix& sup_probs, const std::vector<bool>& positive_rows,
                            std::size_t positive_index);
double hard_recall(const Matrix& sup_probs, const std::vector<bool>& positive_rows,
                   std::size_t positive_index);

// L_D^{S+}: CCE toward R on the positive rows minus the recall reward.
LossGrad loss_sup_positive(const Matrix& sup_probs, const std::vector<bool>& positive_rows,
                           std::size_t positive_index, double reward_weight);

// L_D^{S-}: alpha * CCE against the true known-negative class plus
// (1 - alpha) * CCE against a force-assigned U target. labels index the
// negative classes only.
LossGrad loss_sup_negative(const Matrix& sup_probs, const std::vector<std::size_t>& labels,
                           const ClassLayout& layout, const LeewayConfig& cfg);

// L_D^{US real}: alpha * CCE(->K) + (1 - alpha) * CCE(->U) over real rows.
LossGrad loss_unsup_real(const Matrix& unsup_probs, const LeewayConfig& cfg);
// L_D^{US fake}: CCE(->F).
LossGrad loss_unsup_fake(const Matrix& unsup_probs);
// L_D^{US}: exact midpoint of the two.
double loss_unsup_total(double real_loss, double fake_loss);

// Pull-away term: mean squared cosine similarity over ordered row pairs of
// the generated batch's tap features. Zero-norm rows are excluded (counted
// out of the pairing) and reported through zero_rows_skipped.
LossGrad gen_pull_away(const Matrix& gen_features, std::size_t* zero_rows_skipped = nullptr);

// Low-density term: mean over rows of log p(x) where p(x), the max supervised
// class probability, exceeds epsilon; rows at or below the threshold
// contribute zero. Always <= 0; its gradient pushes confident rows down.
LossGrad gen_low_density(const Matrix& sup_probs, const GenLossConfig& cfg);

// Squared distance between the column means of fake and real tap features.
// grad is with respect to f_fake.
LossGrad gen_feature_matching(const Matrix& f_fake, const Matrix& f_real);

// Weighted sum of the three generator terms.
double gen_total_loss(double pull_away, double low_density, double feature_matching,
                      const GenLossConfig& cfg);

}  // namespace scarcegan
