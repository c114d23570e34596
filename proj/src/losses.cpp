#include "scarcegan/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace scarcegan {

namespace {

double clamped(double p) { return p < kLogClamp ? kLogClamp : p; }

void check_targets(const Matrix& probs, const std::vector<std::size_t>& targets) {
    if (targets.size() != probs.rows) {
        throw std::invalid_argument("cce: " + std::to_string(targets.size()) + " targets for " +
                                    std::to_string(probs.rows) + " rows");
    }
    for (std::size_t t : targets) {
        if (t >= probs.cols) {
            throw std::invalid_argument("cce: target class " + std::to_string(t) +
                                        " out of range for " + std::to_string(probs.cols) +
                                        " columns");
        }
    }
}

std::size_t mask_count(const std::vector<bool>& mask) {
    std::size_t n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
}

}  // namespace

double cce(const Matrix& probs, const std::vector<std::size_t>& targets) {
    check_targets(probs, targets);
    if (probs.rows == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) sum -= std::log(clamped(probs(i, targets[i])));
    return sum / static_cast<double>(probs.rows);
}

LossGrad cce_grad(const Matrix& probs, const std::vector<std::size_t>& targets) {
    check_targets(probs, targets);
    LossGrad out;
    out.grad = Matrix::zeros(probs.rows, probs.cols);
    if (probs.rows == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(probs.rows);
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double p = probs(i, targets[i]);
        sum -= std::log(clamped(p));
        // constant below the clamp, so no gradient there
        if (p > kLogClamp) out.grad(i, targets[i]) = -inv_n / p;
    }
    out.value = sum * inv_n;
    return out;
}

double cce_uniform_target(const Matrix& probs, std::size_t target) {
    return cce(probs, std::vector<std::size_t>(probs.rows, target));
}

LossGrad cce_uniform_target_grad(const Matrix& probs, std::size_t target) {
    return cce_grad(probs, std::vector<std::size_t>(probs.rows, target));
}

double soft_positive_recall(const Matrix& sup_probs, const std::vector<bool>& positive_rows,
                            std::size_t positive_index) {
    if (positive_rows.size() != sup_probs.rows) {
        throw std::invalid_argument("soft_positive_recall: mask size mismatch");
    }
    const std::size_t n = mask_count(positive_rows);
    if (n == 0) throw std::invalid_argument("soft_positive_recall: empty positive mask");
    double sum = 0.0;
    for (std::size_t i = 0; i < sup_probs.rows; ++i)
        if (positive_rows[i]) sum += sup_probs(i, positive_index);
    return sum / static_cast<double>(n);
}

double hard_recall(const Matrix& sup_probs, const std::vector<bool>& positive_rows,
                   std::size_t positive_index) {
    std::size_t n = 0, hit = 0;
    for (std::size_t i = 0; i < sup_probs.rows; ++i) {
        if (!positive_rows[i]) continue;
        ++n;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < sup_probs.cols; ++j)
            if (sup_probs(i, j) > sup_probs(i, arg)) arg = j;
        if (arg == positive_index) ++hit;
    }
    if (n == 0) throw std::invalid_argument("hard_recall: empty positive mask");
    return static_cast<double>(hit) / static_cast<double>(n);
}

LossGrad loss_sup_positive(const Matrix& sup_probs, const std::vector<bool>& positive_rows,
                           std::size_t positive_index, double reward_weight) {
    if (positive_rows.size() != sup_probs.rows) {
        throw std::invalid_argument("loss_sup_positive: mask size mismatch");
    }
    const std::size_t n = mask_count(positive_rows);
    if (n == 0) throw std::invalid_argument("loss_sup_positive: no positive rows in batch");
    const double inv_n = 1.0 / static_cast<double>(n);

    LossGrad out;
    out.grad = Matrix::zeros(sup_probs.rows, sup_probs.cols);
    double sum = 0.0, reward = 0.0;
    for (std::size_t i = 0; i < sup_probs.rows; ++i) {
        if (!positive_rows[i]) continue;
        const double p = sup_probs(i, positive_index);
        sum -= std::log(clamped(p));
        reward += p;
        double g = 0.0;
        if (p > kLogClamp) g = -inv_n / p;
        // the reward enters with a minus sign under minimization
        g -= reward_weight * inv_n;
        out.grad(i, positive_index) = g;
    }
    out.value = sum * inv_n - reward_weight * reward * inv_n;
    return out;
}

LossGrad loss_sup_negative(const Matrix& sup_probs, const std::vector<std::size_t>& labels,
                           const ClassLayout& layout, const LeewayConfig& cfg) {
    if (labels.size() != sup_probs.rows) {
        throw std::invalid_argument("loss_sup_negative: label count mismatch");
    }
    if (sup_probs.cols != layout.size()) {
        throw std::invalid_argument("loss_sup_negative: probability width " +
                                    std::to_string(sup_probs.cols) + " does not match layout of " +
                                    std::to_string(layout.size()) + " classes");
    }
    for (std::size_t l : labels) {
        if (!layout.is_negative(l)) {
            throw std::invalid_argument("loss_sup_negative: label '" +
                                        (l < layout.size() ? layout.names[l] : std::to_string(l)) +
                                        "' is not a known negative class");
        }
    }
    const double a = cfg.alpha;
    LossGrad known = cce_grad(sup_probs, labels);
    LossGrad forced = cce_uniform_target_grad(sup_probs, layout.unknown_index());
    LossGrad out;
    out.value = a * known.value + (1.0 - a) * forced.value;
    out.grad = known.grad;
    scale_inplace(out.grad, a);
    scale_inplace(forced.grad, 1.0 - a);
    add_inplace(out.grad, forced.grad);
    return out;
}

LossGrad loss_unsup_real(const Matrix& unsup_probs, const LeewayConfig& cfg) {
    if (unsup_probs.cols != kUnsupClasses) {
        throw std::invalid_argument("loss_unsup_real: expected 3 columns, got " +
                                    std::to_string(unsup_probs.cols));
    }
    const double a = cfg.alpha;
    LossGrad known = cce_uniform_target_grad(unsup_probs, kUnsupKnown);
    LossGrad unknown = cce_uniform_target_grad(unsup_probs, kUnsupUnknown);
    LossGrad out;
    out.value = a * known.value + (1.0 - a) * unknown.value;
    out.grad = known.grad;
    scale_inplace(out.grad, a);
    scale_inplace(unknown.grad, 1.0 - a);
    add_inplace(out.grad, unknown.grad);
    return out;
}

LossGrad loss_unsup_fake(const Matrix& unsup_probs) {
    if (unsup_probs.cols != kUnsupClasses) {
        throw std::invalid_argument("loss_unsup_fake: expected 3 columns, got " +
                                    std::to_string(unsup_probs.cols));
    }
    return cce_uniform_target_grad(unsup_probs, kUnsupFake);
}

double loss_unsup_total(double real_loss, double fake_loss) {
    return 0.5 * (real_loss + fake_loss);
}

LossGrad gen_pull_away(const Matrix& gen_features, std::size_t* zero_rows_skipped) {
    LossGrad out;
    out.grad = Matrix::zeros(gen_features.rows, gen_features.cols);
    std::vector<std::size_t> rows;
    std::vector<double> norms(gen_features.rows, 0.0);
    for (std::size_t i = 0; i < gen_features.rows; ++i) {
        double s = 0.0;
        const double* f = gen_features.row_ptr(i);
        for (std::size_t k = 0; k < gen_features.cols; ++k) s += f[k] * f[k];
        norms[i] = std::sqrt(s);
        if (norms[i] > 0.0) rows.push_back(i);
    }
    if (zero_rows_skipped) *zero_rows_skipped = gen_features.rows - rows.size();
    const std::size_t m = rows.size();
    if (m < 2) {
        throw std::invalid_argument("gen_pull_away: need at least 2 nonzero feature rows, have " +
                                    std::to_string(m));
    }
    const double denom = static_cast<double>(m) * static_cast<double>(m - 1);
    double sum = 0.0;
    for (std::size_t ai = 0; ai < m; ++ai) {
        const std::size_t i = rows[ai];
        const double* fi = gen_features.row_ptr(i);
        double* gi = out.grad.row_ptr(i);
        for (std::size_t bj = 0; bj < m; ++bj) {
            if (bj == ai) continue;
            const std::size_t j = rows[bj];
            const double* fj = gen_features.row_ptr(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < gen_features.cols; ++k) dot += fi[k] * fj[k];
            const double c = dot / (norms[i] * norms[j]);
            sum += c * c;
            // d(c^2)/df_i for the ordered pairs (i,j) and (j,i) combined
            const double s1 = 2.0 * c / (norms[i] * norms[j]);
            const double s2 = 2.0 * c * c / (norms[i] * norms[i]);
            for (std::size_t k = 0; k < gen_features.cols; ++k)
                gi[k] += (s1 * fj[k] - s2 * fi[k]) * 2.0 / denom;
        }
    }
    out.value = sum / denom;
    return out;
}

LossGrad gen_low_density(const Matrix& sup_probs, const GenLossConfig& cfg) {
    LossGrad out;
    out.grad = Matrix::zeros(sup_probs.rows, sup_probs.cols);
    if (sup_probs.rows == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(sup_probs.rows);
    double sum = 0.0;
    for (std::size_t i = 0; i < sup_probs.rows; ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < sup_probs.cols; ++j)
            if (sup_probs(i, j) > sup_probs(i, arg)) arg = j;
        const double p = sup_probs(i, arg);
        if (p > cfg.epsilon) {
            sum += std::log(p);
            out.grad(i, arg) = inv_n / p;
        }
    }
    out.value = sum * inv_n;
    return out;
}

LossGrad gen_feature_matching(const Matrix& f_fake, const Matrix& f_real) {
    if (f_fake.cols != f_real.cols) {
        throw std::invalid_argument("gen_feature_matching: feature widths differ, " +
                                    f_fake.shape_str() + " vs " + f_real.shape_str());
    }
    const std::vector<double> mu_fake = col_mean(f_fake);
    const std::vector<double> mu_real = col_mean(f_real);
    LossGrad out;
    out.grad = Matrix::zeros(f_fake.rows, f_fake.cols);
    double sum = 0.0;
    const double inv_m = f_fake.rows > 0 ? 1.0 / static_cast<double>(f_fake.rows) : 0.0;
    for (std::size_t k = 0; k < mu_fake.size(); ++k) {
        const double d = mu_fake[k] - mu_real[k];
        sum += d * d;
        for (std::size_t i = 0; i < f_fake.rows; ++i) out.grad(i, k) = 2.0 * d * inv_m;
    }
    out.value = sum;
    return out;
}

double gen_total_loss(double pull_away, double low_density, double feature_matching,
                      const GenLossConfig& cfg) {
    return cfg.entropy_weight * pull_away + cfg.low_density_weight * low_density +
           cfg.feature_matching_weight * feature_matching;
}

}  // namespace scarcegan
