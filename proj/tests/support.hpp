#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "scarcegan/nn.hpp"

namespace testsupport {

struct GradCheck {
    double max_rel = 0.0;
    std::string worst;
};

// Central finite differences against the analytic gradients. `eval` runs a
// full forward/backward with the current parameter values, accumulates into
// the grad buffers, and returns the loss. Grad buffers must be zeroed by
// `eval` itself (or be freshly zeroed) so the analytic snapshot is clean.
inline GradCheck fd_check(std::vector<scarcegan::TensorRef> params,
                          const std::function<double()>& eval, double h = 1e-5) {
    GradCheck out;
    eval();
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.emplace_back(p.grad, p.grad + p.size);

    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].size; ++i) {
            double& theta = params[t].value[i];
            const double saved = theta;
            theta = saved + h;
            const double fp = eval();
            theta = saved - h;
            const double fm = eval();
            theta = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[t][i];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-5});
            if (rel > out.max_rel) {
                out.max_rel = rel;
                out.worst = params[t].name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return out;
}

}  // namespace testsupport
