#pragma once

#include <random>
#include <string>
#include <vector>

#include "scarcegan/matrix.hpp"

namespace scarcegan {

enum class Activation { Identity, Relu, LeakyRelu, Softmax };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Row-wise softmax, stabilized by subtracting each row's max.
Matrix softmax(const Matrix& logits);

// Named view into a parameter tensor and its gradient buffer. The pointers
// stay valid for the lifetime of the owning layer.
struct TensorRef {
    std::string name;
    double* value = nullptr;
    double* grad = nullptr;
    std::size_t size = 0;
};

// Fully connected layer, y = act(x W + b). Forward caches what backward
// needs; backward accumulates into the grad buffers.
class DenseLayer {
public:
    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, Activation act, double leaky_slope = 0.2);

    // scaled uniform init with bound sqrt(6 / (fan_in + fan_out)), zero bias
    void init(std::mt19937_64& rng);

    Matrix forward(const Matrix& x, bool cache = true);
    // grad_out is dL/dy (post-activation). Returns dL/dx.
    Matrix backward(const Matrix& grad_out);

    void zero_grad();
    std::vector<TensorRef> params(const std::string& prefix);

    std::size_t in_width() const { return weights.rows; }
    std::size_t out_width() const { return weights.cols; }
    Activation activation() const { return act_; }
    double leaky_slope() const { return slope_; }
    const Matrix& cached_preactivation() const { return z_cache_; }
    bool has_cache() const { return has_cache_; }

    Matrix weights;             // in x out
    std::vector<double> bias;   // out
    Matrix weight_grad;
    std::vector<double> bias_grad;

private:
    Activation act_ = Activation::Identity;
    double slope_ = 0.2;
    Matrix x_cache_, z_cache_, y_cache_;
    bool has_cache_ = false;
};

// Per-feature batch normalization. Train mode normalizes with batch
// statistics and updates the running estimates; inference mode uses the
// running estimates only.
class BatchNorm {
public:
    BatchNorm() = default;
    explicit BatchNorm(std::size_t width, double momentum = 0.9, double epsilon = 1e-5);

    Matrix forward(const Matrix& x, bool train, bool cache = true);
    Matrix backward(const Matrix& grad_out);

    void zero_grad();
    std::vector<TensorRef> params(const std::string& prefix);

    std::size_t width() const { return gamma.size(); }
    double momentum() const { return momentum_; }
    double epsilon() const { return epsilon_; }

    std::vector<double> gamma, beta;
    std::vector<double> running_mean, running_var;
    std::vector<double> gamma_grad, beta_grad;

private:
    double momentum_ = 0.9;
    double epsilon_ = 1e-5;
    Matrix xhat_cache_;
    std::vector<double> batch_std_;   // sqrt(var + eps) per feature
    bool has_cache_ = false;
};

}  // namespace scarcegan
