#pragma once

#include <cstdint>
#include <vector>

#include "scarcegan/nn.hpp"

namespace scarcegan {

// Adam with the GAN-style betas (0.5, 0.9). Moment buffers are laid out to
// match the parameter list handed to init().
struct AdamState {
    double beta1 = 0.5;
    double beta2 = 0.9;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    void init(const std::vector<TensorRef>& params);
    bool initialized() const { return !m.empty(); }
};

// One bias-corrected Adam update over all parameters; increments state.step.
void adam_step(std::vector<TensorRef>& params, AdamState& state, double lr);

// Exponentially decayed learning rate: rate(s) = initial * decay^(s / steps).
struct LRSchedule {
    double initial_rate = 1e-3;
    double decay_rate = 0.97;
    std::uint64_t decay_steps = 100;

    double rate(std::uint64_t step) const;
};

}  // namespace scarcegan
