#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scarcegan/nn.hpp"

namespace scarcegan {

// Supervised class order. In the full task the negatives are D, N, H; with a
// collapsed negative prior there is a single negative class. The positive
// class R always sits right after the negatives and the leeway class U is
// last. U is never a training label.
struct ClassLayout {
    std::vector<std::string> names;  // negatives..., "R", "U"

    static ClassLayout full() { return {{"D", "N", "H", "R", "U"}}; }
    static ClassLayout two_class() { return {{"NEG", "R", "U"}}; }

    std::size_t size() const { return names.size(); }
    std::size_t negative_count() const { return names.size() - 2; }
    std::size_t positive_index() const { return names.size() - 2; }
    std::size_t unknown_index() const { return names.size() - 1; }
    bool is_negative(std::size_t cls) const { return cls < negative_count(); }
};

// Unsupervised head order: Known real, Unknown real, Fake.
inline constexpr std::size_t kUnsupKnown = 0;
inline constexpr std::size_t kUnsupUnknown = 1;
inline constexpr std::size_t kUnsupFake = 2;
inline constexpr std::size_t kUnsupClasses = 3;

enum class Head { Supervised, Unsupervised, Both };

struct DiscOutput {
    Matrix sup;       // rows x n_sup, row-stochastic (when requested)
    Matrix unsup;     // rows x 3, row-stochastic (when requested)
    Matrix features;  // tap-layer activations f(x)
};

// Shared dense base with a 5-way (or 3-way in the collapsed task) supervised
// softmax head, a 3-way unsupervised softmax head, and an intermediate
// feature tap used by the generator objectives.
class Discriminator {
public:
    Discriminator() = default;
    Discriminator(std::size_t input_width, const std::vector<std::size_t>& base_widths,
                  const ClassLayout& layout, std::size_t tap_index);

    void init(std::mt19937_64& rng);

    DiscOutput forward(const Matrix& x, Head head, bool cache = true);

    // Backpropagates whichever gradients are present. sup_grad / unsup_grad
    // are dL/d(probabilities); tap_grad is dL/d(f(x)). Shared base gradients
    // accumulate across the provided paths. Returns dL/dx.
    Matrix backward(const std::optional<Matrix>& sup_grad, const std::optional<Matrix>& unsup_grad,
                    const std::optional<Matrix>& tap_grad = std::nullopt);

    void zero_grad();
    std::vector<TensorRef> params();

    std::size_t input_width() const { return base_.empty() ? 0 : base_.front().in_width(); }
    std::size_t tap_index() const { return tap_; }
    std::size_t tap_width() const { return base_[tap_].out_width(); }
    const ClassLayout& layout() const { return layout_; }

    std::vector<DenseLayer>& base() { return base_; }
    const std::vector<DenseLayer>& base() const { return base_; }
    DenseLayer& sup_head() { return sup_head_; }
    const DenseLayer& sup_head() const { return sup_head_; }
    DenseLayer& unsup_head() { return unsup_head_; }
    const DenseLayer& unsup_head() const { return unsup_head_; }

private:
    std::vector<DenseLayer> base_;
    DenseLayer sup_head_;
    DenseLayer unsup_head_;
    std::size_t tap_ = 0;
    ClassLayout layout_;
    bool sup_cached_ = false;
    bool unsup_cached_ = false;
};

// dense(leaky-relu) -> batch-norm -> dense(relu)
class Generator {
public:
    Generator() = default;
    Generator(std::size_t noise_dim, std::size_t hidden, std::size_t output_dim);

    void init(std::mt19937_64& rng);

    // train mode uses batch statistics in the norm layer and caches for
    // backward; inference mode uses the running estimates.
    Matrix forward(const Matrix& z, bool train, bool cache = true);
    void backward(const Matrix& grad_out);

    void zero_grad();
    std::vector<TensorRef> params();

    std::size_t noise_dim() const { return fc1_.in_width(); }
    std::size_t output_dim() const { return fc2_.out_width(); }

    DenseLayer& fc1() { return fc1_; }
    const DenseLayer& fc1() const { return fc1_; }
    BatchNorm& bn() { return bn_; }
    const BatchNorm& bn() const { return bn_; }
    DenseLayer& fc2() { return fc2_; }
    const DenseLayer& fc2() const { return fc2_; }

private:
    DenseLayer fc1_;
    BatchNorm bn_;
    DenseLayer fc2_;
};

struct NoiseSpec {
    std::size_t dim = 0;
    std::uint64_t seed = 0;
};

// n i.i.d. standard normal rows drawn from the spec's own seeded stream.
Matrix sample_noise(std::size_t n, const NoiseSpec& spec);
// Same, but advancing a caller-owned engine (used by the training loop).
Matrix sample_noise(std::size_t n, std::size_t dim, std::mt19937_64& rng);

}  // namespace scarcegan
