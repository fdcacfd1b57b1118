#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "predbeam/clrnet.hpp"
#include "predbeam/rng.hpp"

namespace predbeam {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t scalars_checked = 0;
    std::size_t nets_checked = 0;
};

/// Compares every analytic parameter gradient against central finite
/// differences of the per-example loss on freshly sampled small networks.
/// Relative error is |ga - gn| / max(|ga|, |gn|, 1e-3). The 1e-3 floor
/// absorbs the difference quotient's round-off (about eps * loss / (2 step)
/// ~= 1e-10 in absolute terms, which would otherwise dominate entries whose
/// true gradient is tiny) while still flagging structural mistakes, whose
/// absolute effect sits at the gradient scale itself: dropping the cell
/// recurrence, the forget-gate term, or the ReLU mask each scores > 1 here.
inline GradCheckReport run_gradient_check(std::size_t nets = 20,
                                          std::uint64_t seed = 7,
                                          double step = 1e-6) {
    ClrnetArch arch;
    arch.num_vehicles = 4;
    arch.window = 2;
    arch.conv_filters = 2;
    arch.lstm_hidden = 8;
    arch.validate();

    GradCheckReport report;
    for (std::size_t net = 0; net < nets; ++net) {
        RandomStream rng = derive_stream(seed, "gradcheck", net);
        ClrnetParams params = init_params(arch, rng);
        // Biases included: zero-initialized tensors would otherwise only be
        // checked at the origin.
        for (double& b : params.conv_b) b = rng.uniform(-0.3, 0.3);
        for (auto* t : {&params.bi, &params.bf, &params.bg, &params.bo, &params.fc_b})
            for (double& b : *t) b = rng.uniform(-0.3, 0.3);

        AngleHistory history;
        history.num_vehicles = arch.num_vehicles;
        history.window = arch.window;
        history.slot_index = arch.window;
        history.values.resize(arch.num_vehicles * arch.window);
        for (double& v : history.values) v = rng.gaussian(0.4, 0.6);
        std::vector<double> label(arch.num_vehicles);
        for (double& v : label) v = rng.gaussian(0.4, 0.6);

        const ForwardTape tape = clrnet_forward(history, params, arch);
        const ClrnetParams analytic = backward(tape, label, params, arch);

        auto loss_at = [&]() {
            const ForwardTape t = clrnet_forward(history, params, arch);
            double acc = 0.0;
            for (std::size_t k = 0; k < label.size(); ++k) {
                const double e = t.prediction[k] - label[k];
                acc += e * e;
            }
            return 0.5 * acc;
        };

        auto pts = params.tensors();
        auto gts = analytic.tensors();
        for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i) {
            auto& tensor = *pts[i];
            const auto& grad = *gts[i];
            for (std::size_t j = 0; j < tensor.size(); ++j) {
                const double saved = tensor[j];
                tensor[j] = saved + step;
                const double lp = loss_at();
                tensor[j] = saved - step;
                const double lm = loss_at();
                tensor[j] = saved;
                const double numeric = (lp - lm) / (2.0 * step);
                const double ga = grad[j];
                const double rel = std::fabs(ga - numeric) /
                                   std::max({std::fabs(ga), std::fabs(numeric), 1e-3});
                if (rel > report.max_rel_error) report.max_rel_error = rel;
                ++report.scalars_checked;
            }
        }
        ++report.nets_checked;
    }
    return report;
}

} // namespace predbeam
