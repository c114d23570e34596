#include "scarcegan/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scarcegan {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky-relu";
        case Activation::Softmax: return "softmax";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "leaky-relu") return Activation::LeakyRelu;
    if (name == "softmax") return Activation::Softmax;
    throw std::invalid_argument("unknown activation: " + name);
}

Matrix softmax(const Matrix& logits) {
    if (!all_finite(logits)) throw std::invalid_argument("softmax: non-finite input");
    Matrix out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* in = logits.row_ptr(i);
        double* o = out.row_ptr(i);
        double mx = in[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < logits.cols; ++j) o[j] /= sum;
    }
    return out;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act, double leaky_slope)
    : weights(in, out),
      bias(out, 0.0),
      weight_grad(in, out),
      bias_grad(out, 0.0),
      act_(act),
      slope_(leaky_slope) {}

void DenseLayer::init(std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(weights.rows + weights.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : weights.data) w = dist(rng);
    std::fill(bias.begin(), bias.end(), 0.0);
}

Matrix DenseLayer::forward(const Matrix& x, bool cache) {
    if (x.cols != weights.rows) {
        throw std::invalid_argument("dense_forward: input width " + x.shape_str() +
                                    " does not match layer weights " + weights.shape_str());
    }
    Matrix z = matmul(x, weights);
    add_rowwise(z, bias);
    Matrix y;
    switch (act_) {
        case Activation::Identity:
            y = z;
            break;
        case Activation::Relu:
            y = z;
            for (double& v : y.data) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::LeakyRelu:
            y = z;
            for (double& v : y.data) v = v > 0.0 ? v : slope_ * v;
            break;
        case Activation::Softmax:
            y = softmax(z);
            break;
    }
    if (cache) {
        x_cache_ = x;
        z_cache_ = z;
        y_cache_ = y;
        has_cache_ = true;
    }
    return y;
}

Matrix DenseLayer::backward(const Matrix& grad_out) {
    if (!has_cache_) throw std::logic_error("dense backward called without a cached forward");
    if (grad_out.rows != z_cache_.rows || grad_out.cols != z_cache_.cols) {
        throw std::invalid_argument("dense backward: gradient shape " + grad_out.shape_str() +
                                    " does not match cached output " + z_cache_.shape_str());
    }
    // dL/dz from dL/dy
    Matrix dz(grad_out.rows, grad_out.cols);
    switch (act_) {
        case Activation::Identity:
            dz = grad_out;
            break;
        case Activation::Relu:
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                dz.data[i] = z_cache_.data[i] > 0.0 ? grad_out.data[i] : 0.0;
            break;
        case Activation::LeakyRelu:
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                dz.data[i] = z_cache_.data[i] > 0.0 ? grad_out.data[i] : slope_ * grad_out.data[i];
            break;
        case Activation::Softmax:
            // dz_j = y_j * (g_j - sum_k g_k y_k), row-wise
            for (std::size_t i = 0; i < dz.rows; ++i) {
                const double* y = y_cache_.row_ptr(i);
                const double* g = grad_out.row_ptr(i);
                double dot = 0.0;
                for (std::size_t j = 0; j < dz.cols; ++j) dot += g[j] * y[j];
                double* d = dz.row_ptr(i);
                for (std::size_t j = 0; j < dz.cols; ++j) d[j] = y[j] * (g[j] - dot);
            }
            break;
    }
    add_inplace(weight_grad, matmul_at_b(x_cache_, dz));
    const std::vector<double> db = col_sum(dz);
    for (std::size_t j = 0; j < bias_grad.size(); ++j) bias_grad[j] += db[j];
    return matmul_a_bt(dz, weights);
}

void DenseLayer::zero_grad() {
    std::fill(weight_grad.data.begin(), weight_grad.data.end(), 0.0);
    std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

std::vector<TensorRef> DenseLayer::params(const std::string& prefix) {
    return {
        {prefix + ".w", weights.data.data(), weight_grad.data.data(), weights.data.size()},
        {prefix + ".b", bias.data(), bias_grad.data(), bias.size()},
    };
}

BatchNorm::BatchNorm(std::size_t width, double momentum, double epsilon)
    : gamma(width, 1.0),
      beta(width, 0.0),
      running_mean(width, 0.0),
      running_var(width, 1.0),
      gamma_grad(width, 0.0),
      beta_grad(width, 0.0),
      momentum_(momentum),
      epsilon_(epsilon) {}

Matrix BatchNorm::forward(const Matrix& x, bool train, bool cache) {
    if (x.cols != gamma.size()) {
        throw std::invalid_argument("batch_norm: input width " + x.shape_str() +
                                    " does not match layer width " + std::to_string(gamma.size()));
    }
    const std::size_t n = x.rows;
    std::vector<double> mean(x.cols), var(x.cols);
    if (train) {
        mean = col_mean(x);
        std::fill(var.begin(), var.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = x.row_ptr(i);
            for (std::size_t j = 0; j < x.cols; ++j) {
                const double d = xi[j] - mean[j];
                var[j] += d * d;
            }
        }
        for (double& v : var) v /= static_cast<double>(n);
        for (std::size_t j = 0; j < x.cols; ++j) {
            running_mean[j] = momentum_ * running_mean[j] + (1.0 - momentum_) * mean[j];
            running_var[j] = momentum_ * running_var[j] + (1.0 - momentum_) * var[j];
        }
    } else {
        mean = running_mean;
        var = running_var;
    }

    Matrix xhat(x.rows, x.cols);
    std::vector<double> stds(x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) stds[j] = std::sqrt(var[j] + epsilon_);
    Matrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row_ptr(i);
        double* h = xhat.row_ptr(i);
        double* yi = y.row_ptr(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            h[j] = (xi[j] - mean[j]) / stds[j];
            yi[j] = gamma[j] * h[j] + beta[j];
        }
    }
    if (cache) {
        xhat_cache_ = xhat;
        batch_std_ = stds;
        has_cache_ = true;
    }
    return y;
}

Matrix BatchNorm::backward(const Matrix& grad_out) {
    if (!has_cache_) throw std::logic_error("batch_norm backward called without a cached forward");
    const std::size_t n = grad_out.rows;
    const std::size_t w = grad_out.cols;
    if (n != xhat_cache_.rows || w != xhat_cache_.cols) {
        throw std::invalid_argument("batch_norm backward: gradient shape mismatch");
    }
    // per-feature sums over the batch
    std::vector<double> sum_g(w, 0.0), sum_gx(w, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* g = grad_out.row_ptr(i);
        const double* h = xhat_cache_.row_ptr(i);
        for (std::size_t j = 0; j < w; ++j) {
            sum_g[j] += g[j];
            sum_gx[j] += g[j] * h[j];
        }
    }
    for (std::size_t j = 0; j < w; ++j) {
        gamma_grad[j] += sum_gx[j];
        beta_grad[j] += sum_g[j];
    }
    Matrix dx(n, w);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* g = grad_out.row_ptr(i);
        const double* h = xhat_cache_.row_ptr(i);
        double* d = dx.row_ptr(i);
        for (std::size_t j = 0; j < w; ++j) {
            d[j] = gamma[j] / batch_std_[j] *
                   (g[j] - inv_n * sum_g[j] - h[j] * inv_n * sum_gx[j]);
        }
    }
    return dx;
}

void BatchNorm::zero_grad() {
    std::fill(gamma_grad.begin(), gamma_grad.end(), 0.0);
    std::fill(beta_grad.begin(), beta_grad.end(), 0.0);
}

std::vector<TensorRef> BatchNorm::params(const std::string& prefix) {
    return {
        {prefix + ".gamma", gamma.data(), gamma_grad.data(), gamma.size()},
        {prefix + ".beta", beta.data(), beta_grad.data(), beta.size()},
    };
}

}  // namespace scarcegan
