#pragma once

#include <cmath>
#include <cstddef>

#include "predbeam/clrnet.hpp"
#include "predbeam/errors.hpp"

namespace predbeam {

/// Adaptive-moment gradient descent with bias-corrected first and second
/// moment estimates.
struct OptimizerState {
    ClrnetParams first_moment;
    ClrnetParams second_moment;
    std::size_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState create(const ClrnetArch& arch, double learning_rate = 1e-3) {
        OptimizerState s;
        s.first_moment = zeros_like(arch);
        s.second_moment = zeros_like(arch);
        s.learning_rate = learning_rate;
        return s;
    }
};

/// One in-place update of `params` from `grads`. Throws
/// training_diverged_error if any gradient entry is non-finite.
inline void optimizer_step(ClrnetParams& params, const ClrnetParams& grads,
                           OptimizerState& state) {
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    auto pts = params.tensors();
    auto gts = grads.tensors();
    auto mts = state.first_moment.tensors();
    auto vts = state.second_moment.tensors();
    for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i) {
        auto& p = *pts[i];
        const auto& g = *gts[i];
        auto& m = *mts[i];
        auto& v = *vts[i];
        if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
            throw std::invalid_argument("optimizer_step: tensor shape mismatch");
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!std::isfinite(g[j]))
                throw training_diverged_error("non-finite gradient in optimizer step " +
                                              std::to_string(state.step_count));
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace predbeam
