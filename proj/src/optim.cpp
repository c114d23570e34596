#include "scarcegan/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace scarcegan {

void AdamState::init(const std::vector<TensorRef>& params) {
    m.clear();
    v.clear();
    step = 0;
    for (const TensorRef& p : params) {
        m.emplace_back(p.size, 0.0);
        v.emplace_back(p.size, 0.0);
    }
}

void adam_step(std::vector<TensorRef>& params, AdamState& state, double lr) {
    if (lr <= 0.0) throw std::invalid_argument("adam_step: learning rate must be positive");
    if (!state.initialized()) state.init(params);
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state has " + std::to_string(state.m.size()) +
                                    " moment buffers for " + std::to_string(params.size()) +
                                    " parameter tensors");
    }
    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        TensorRef& p = params[t];
        if (state.m[t].size() != p.size) {
            throw std::invalid_argument("adam_step: moment shape mismatch for tensor " + p.name);
        }
        double* mt = state.m[t].data();
        double* vt = state.v[t].data();
        for (std::size_t i = 0; i < p.size; ++i) {
            const double g = p.grad[i];
            mt[i] = b1 * mt[i] + (1.0 - b1) * g;
            vt[i] = b2 * vt[i] + (1.0 - b2) * g * g;
            const double mhat = mt[i] / bc1;
            const double vhat = vt[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

double LRSchedule::rate(std::uint64_t step) const {
    if (decay_steps == 0) return initial_rate;
    const double exponent = static_cast<double>(step) / static_cast<double>(decay_steps);
    return initial_rate * std::pow(decay_rate, exponent);
}

}  // namespace scarcegan
