#include "scarcegan/model.hpp"

#include <stdexcept>

namespace scarcegan {

Discriminator::Discriminator(std::size_t input_width, const std::vector<std::size_t>& base_widths,
                             const ClassLayout& layout, std::size_t tap_index)
    : tap_(tap_index), layout_(layout) {
    if (base_widths.empty()) throw std::invalid_argument("discriminator needs at least one base layer");
    if (tap_index >= base_widths.size()) {
        throw std::invalid_argument("feature tap index " + std::to_string(tap_index) +
                                    " addresses no base layer (depth " +
                                    std::to_string(base_widths.size()) + ")");
    }
    std::size_t in = input_width;
    for (std::size_t w : base_widths) {
        base_.emplace_back(in, w, Activation::LeakyRelu);
        in = w;
    }
    sup_head_ = DenseLayer(in, layout.size(), Activation::Softmax);
    unsup_head_ = DenseLayer(in, kUnsupClasses, Activation::Softmax);
}

void Discriminator::init(std::mt19937_64& rng) {
    for (DenseLayer& l : base_) l.init(rng);
    sup_head_.init(rng);
    unsup_head_.init(rng);
}

DiscOutput Discriminator::forward(const Matrix& x, Head head, bool cache) {
    if (x.cols != input_width()) {
        throw std::invalid_argument("disc_forward: input width " + x.shape_str() +
                                    " does not match network input " +
                                    std::to_string(input_width()));
    }
    DiscOutput out;
    Matrix h = x;
    for (std::size_t i = 0; i < base_.size(); ++i) {
        h = base_[i].forward(h, cache);
        if (i == tap_) out.features = h;
    }
    sup_cached_ = false;
    unsup_cached_ = false;
    if (head == Head::Supervised || head == Head::Both) {
        out.sup = sup_head_.forward(h, cache);
        sup_cached_ = cache;
    }
    if (head == Head::Unsupervised || head == Head::Both) {
        out.unsup = unsup_head_.forward(h, cache);
        unsup_cached_ = cache;
    }
    return out;
}

Matrix Discriminator::backward(const std::optional<Matrix>& sup_grad,
                               const std::optional<Matrix>& unsup_grad,
                               const std::optional<Matrix>& tap_grad) {
    Matrix grad;  // dL/d(base output)
    bool have = false;
    if (sup_grad) {
        if (!sup_cached_) throw std::logic_error("backward: supervised head has no cached forward");
        grad = sup_head_.backward(*sup_grad);
        have = true;
    }
    if (unsup_grad) {
        if (!unsup_cached_) throw std::logic_error("backward: unsupervised head has no cached forward");
        Matrix g = unsup_head_.backward(*unsup_grad);
        if (have) add_inplace(grad, g); else { grad = std::move(g); have = true; }
    }
    if (!have) {
        if (!tap_grad) throw std::invalid_argument("backward: no gradient provided");
        grad = Matrix::zeros(tap_grad->rows, base_.back().out_width());
    }
    for (std::size_t i = base_.size(); i-- > 0;) {
        if (tap_grad && i == tap_) add_inplace(grad, *tap_grad);
        grad = base_[i].backward(grad);
    }
    return grad;
}

void Discriminator::zero_grad() {
    for (DenseLayer& l : base_) l.zero_grad();
    sup_head_.zero_grad();
    unsup_head_.zero_grad();
}

std::vector<TensorRef> Discriminator::params() {
    std::vector<TensorRef> out;
    for (std::size_t i = 0; i < base_.size(); ++i) {
        for (TensorRef& r : base_[i].params("base" + std::to_string(i))) out.push_back(r);
    }
    for (TensorRef& r : sup_head_.params("sup_head")) out.push_back(r);
    for (TensorRef& r : unsup_head_.params("unsup_head")) out.push_back(r);
    return out;
}

Generator::Generator(std::size_t noise_dim, std::size_t hidden, std::size_t output_dim)
    : fc1_(noise_dim, hidden, Activation::LeakyRelu),
      bn_(hidden),
      fc2_(hidden, output_dim, Activation::Relu) {}

void Generator::init(std::mt19937_64& rng) {
    fc1_.init(rng);
    fc2_.init(rng);
}

Matrix Generator::forward(const Matrix& z, bool train, bool cache) {
    if (z.cols != noise_dim()) {
        throw std::invalid_argument("gen_forward: noise width " + z.shape_str() +
                                    " does not match noise_dim " + std::to_string(noise_dim()));
    }
    Matrix h = fc1_.forward(z, cache);
    h = bn_.forward(h, train, cache && train);
    return fc2_.forward(h, cache);
}

void Generator::backward(const Matrix& grad_out) {
    Matrix g = fc2_.backward(grad_out);
    g = bn_.backward(g);
    fc1_.backward(g);
}

void Generator::zero_grad() {
    fc1_.zero_grad();
    bn_.zero_grad();
    fc2_.zero_grad();
}

std::vector<TensorRef> Generator::params() {
    std::vector<TensorRef> out;
    for (TensorRef& r : fc1_.params("gen_fc1")) out.push_back(r);
    for (TensorRef& r : bn_.params("gen_bn")) out.push_back(r);
    for (TensorRef& r : fc2_.params("gen_fc2")) out.push_back(r);
    return out;
}

Matrix sample_noise(std::size_t n, const NoiseSpec& spec) {
    if (n < 1) throw std::invalid_argument("sample_noise: need n >= 1");
    std::mt19937_64 rng(spec.seed);
    return sample_noise(n, spec.dim, rng);
}

Matrix sample_noise(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    Matrix z(n, dim);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : z.data) v = dist(rng);
    return z;
}

}  // namespace scarcegan
