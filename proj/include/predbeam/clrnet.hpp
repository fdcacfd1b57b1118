#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "predbeam/rng.hpp"
#include "predbeam/sensing.hpp"

namespace predbeam {

/// Architecture of the conv + LSTM + linear predictor. Each slot's K-vector
/// of angle estimates is reshaped row-major into a (K/2) x 2 map so the
/// 2 x 2 filters are literal; odd K is zero-padded to the next even count.
struct ClrnetArch {
    std::size_t num_vehicles = 8; // K
    std::size_t window = 6;       // tau
    std::size_t conv_filters = 4; // F
    std::size_t lstm_hidden = 8;  // H

    static constexpr std::size_t kKernelRows = 2;
    static constexpr std::size_t kKernelCols = 2;

    std::size_t map_rows() const { return (num_vehicles + 1) / 2; }
    std::size_t map_cols() const { return 2; }
    std::size_t conv_positions() const { return map_rows() - 1; }
    std::size_t feature_len() const { return conv_filters * conv_positions(); }
    std::size_t fc_out() const { return num_vehicles; }

    void validate() const {
        if (num_vehicles < 3)
            throw std::invalid_argument("ClrnetArch: need K >= 3 for a 2x2 filter");
        if (window < 1) throw std::invalid_argument("ClrnetArch: window must be >= 1");
        if (conv_filters < 1 || lstm_hidden < 1)
            throw std::invalid_argument("ClrnetArch: layer sizes must be >= 1");
    }

    bool operator==(const ClrnetArch&) const = default;
};

/// All trainable weights. Gate blocks follow the usual input/forget/
/// candidate/output order; matrices are row-major.
struct ClrnetParams {
    std::vector<double> conv_w; // [F][2][2]
    std::vector<double> conv_b; // [F]
    std::vector<double> wi, ri, bi; // input gate: [H][feat], [H][H], [H]
    std::vector<double> wf, rf, bf; // forget gate
    std::vector<double> wg, rg, bg; // cell candidate
    std::vector<double> wo, ro, bo; // output gate
    std::vector<double> fc_w; // [K][H]
    std::vector<double> fc_b; // [K]

    static constexpr std::size_t kTensorCount = 16;

    std::array<std::vector<double>*, kTensorCount> tensors() {
        return {&conv_w, &conv_b, &wi, &ri, &bi, &wf, &rf, &bf,
                &wg,     &rg,     &bg, &wo, &ro, &bo, &fc_w, &fc_b};
    }
    std::array<const std::vector<double>*, kTensorCount> tensors() const {
        return {&conv_w, &conv_b, &wi, &ri, &bi, &wf, &rf, &bf,
                &wg,     &rg,     &bg, &wo, &ro, &bo, &fc_w, &fc_b};
    }
    static std::array<const char*, kTensorCount> tensor_names() {
        return {"conv_w", "conv_b", "lstm_wi", "lstm_ri", "lstm_bi", "lstm_wf",
                "lstm_rf", "lstm_bf", "lstm_wg", "lstm_rg", "lstm_bg", "lstm_wo",
                "lstm_ro", "lstm_bo", "fc_w", "fc_b"};
    }
    static std::array<std::vector<std::size_t>, kTensorCount>
    tensor_shapes(const ClrnetArch& arch) {
        const std::size_t fl = arch.feature_len();
        const std::size_t h = arch.lstm_hidden;
        const std::size_t k = arch.num_vehicles;
        const std::size_t f = arch.conv_filters;
        std::vector<std::size_t> w{h, fl}, r{h, h}, b{h};
        return {std::vector<std::size_t>{f, 2, 2}, std::vector<std::size_t>{f},
                w, r, b, w, r, b, w, r, b, w, r, b,
                std::vector<std::size_t>{k, h}, std::vector<std::size_t>{k}};
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto* t : tensors()) n += t->size();
        return n;
    }
};

inline std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

/// All-zero parameters with the shapes dictated by the architecture.
inline ClrnetParams zeros_like(const ClrnetArch& arch) {
    arch.validate();
    ClrnetParams p;
    auto shapes = ClrnetParams::tensor_shapes(arch);
    auto ts = p.tensors();
    for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i)
        ts[i]->assign(shape_size(shapes[i]), 0.0);
    return p;
}

inline bool shapes_match(const ClrnetParams& p, const ClrnetArch& arch) {
    auto shapes = ClrnetParams::tensor_shapes(arch);
    auto ts = p.tensors();
    for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i)
        if (ts[i]->size() != shape_size(shapes[i])) return false;
    return true;
}

/// Uniform fan-in initialization for weight matrices, zero biases.
inline ClrnetParams init_params(const ClrnetArch& arch, RandomStream& rng) {
    ClrnetParams p = zeros_like(arch);
    auto fill = [&rng](std::vector<double>& w, std::size_t fan_in) {
        const double lim = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : w) v = rng.uniform(-lim, lim);
    };
    fill(p.conv_w, ClrnetArch::kKernelRows * ClrnetArch::kKernelCols);
    const std::size_t fl = arch.feature_len();
    const std::size_t h = arch.lstm_hidden;
    fill(p.wi, fl); fill(p.wf, fl); fill(p.wg, fl); fill(p.wo, fl);
    fill(p.ri, h);  fill(p.rf, h);  fill(p.rg, h);  fill(p.ro, h);
    fill(p.fc_w, h);
    return p;
}

/// Cached activations of one recurrent step, as needed for exact BPTT.
struct StepTape {
    std::vector<double> map_in;   // padded (map_rows * 2) conv input
    std::vector<double> feat_pre; // conv pre-activation
    std::vector<double> feat;     // post-ReLU features
    std::vector<double> gi, gf, gg, go;
    std::vector<double> cell;
    std::vector<double> tanh_c;
    std::vector<double> hidden;
};

/// Everything the backward pass needs to reproduce the forward bit-exactly.
struct ForwardTape {
    ClrnetArch arch;
    std::vector<StepTape> steps;    // index 0 = oldest slot
    std::vector<double> prediction; // K outputs
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// y += A x  for row-major A (rows x cols)
inline void matvec_acc(std::span<const double> a, std::span<const double> x,
                       std::span<double> y) {
    const std::size_t rows = y.size(), cols = x.size();
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = a.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

// y += A^T x  for row-major A (rows x cols), x of length rows
inline void matvec_t_acc(std::span<const double> a, std::span<const double> x,
                         std::span<double> y) {
    const std::size_t rows = x.size(), cols = y.size();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a.data() + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
    }
}

// A += x y^T (outer product accumulate), row-major A (x.size() x y.size())
inline void outer_acc(std::span<double> a, std::span<const double> x,
                      std::span<const double> y) {
    for (std::size_t r = 0; r < x.size(); ++r) {
        double* row = a.data() + r * y.size();
        const double xr = x[r];
        for (std::size_t c = 0; c < y.size(); ++c) row[c] += xr * y[c];
    }
}

} // namespace detail

/// One slot's K estimates through the conv layer: reshape, F 2x2 valid
/// filters with stride 1 and per-filter bias, ReLU, flatten. Feature order
/// is filter-major: feat[f * positions + pos].
inline std::vector<double> conv_forward(std::span<const double> slot_input,
                                        const ClrnetParams& params,
                                        const ClrnetArch& arch,
                                        StepTape* tape = nullptr) {
    if (slot_input.size() != arch.num_vehicles)
        throw std::invalid_argument("conv_forward: input length != K");
    const std::size_t rows = arch.map_rows();
    const std::size_t positions = arch.conv_positions();
    std::vector<double> map_in(rows * 2, 0.0);
    for (std::size_t k = 0; k < arch.num_vehicles; ++k) map_in[k] = slot_input[k];

    std::vector<double> pre(arch.feature_len());
    for (std::size_t f = 0; f < arch.conv_filters; ++f) {
        const double* w = params.conv_w.data() + f * 4;
        for (std::size_t pos = 0; pos < positions; ++pos) {
            const double* top = map_in.data() + pos * 2;
            pre[f * positions + pos] = w[0] * top[0] + w[1] * top[1] +
                                       w[2] * top[2] + w[3] * top[3] +
                                       params.conv_b[f];
        }
    }
    std::vector<double> feat(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) feat[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    if (tape) {
        tape->map_in = std::move(map_in);
        tape->feat_pre = pre;
        tape->feat = feat;
    }
    return feat;
}

/// Standard gated LSTM cell: sigmoid input/forget/output gates, tanh
/// candidate, cell = f (*) c_prev + i (*) cand, hidden = o (*) tanh(cell).
inline std::pair<std::vector<double>, std::vector<double>>
lstm_step(std::span<const double> features, std::span<const double> prev_hidden,
          std::span<const double> prev_cell, const ClrnetParams& params,
          const ClrnetArch& arch, StepTape* tape = nullptr) {
    const std::size_t h = arch.lstm_hidden;
    if (features.size() != arch.feature_len() || prev_hidden.size() != h ||
        prev_cell.size() != h)
        throw std::invalid_argument("lstm_step: shape mismatch");

    auto gate = [&](const std::vector<double>& w, const std::vector<double>& r,
                    const std::vector<double>& b) {
        std::vector<double> z(b);
        detail::matvec_acc(w, features, z);
        detail::matvec_acc(r, prev_hidden, z);
        return z;
    };
    std::vector<double> gi = gate(params.wi, params.ri, params.bi);
    std::vector<double> gf = gate(params.wf, params.rf, params.bf);
    std::vector<double> gg = gate(params.wg, params.rg, params.bg);
    std::vector<double> go = gate(params.wo, params.ro, params.bo);
    for (std::size_t u = 0; u < h; ++u) {
        gi[u] = detail::sigmoid(gi[u]);
        gf[u] = detail::sigmoid(gf[u]);
        gg[u] = std::tanh(gg[u]);
        go[u] = detail::sigmoid(go[u]);
    }
    std::vector<double> cell(h), tanh_c(h), hidden(h);
    for (std::size_t u = 0; u < h; ++u) {
        cell[u] = gf[u] * prev_cell[u] + gi[u] * gg[u];
        tanh_c[u] = std::tanh(cell[u]);
        hidden[u] = go[u] * tanh_c[u];
    }
    if (tape) {
        tape->gi = gi; tape->gf = gf; tape->gg = gg; tape->go = go;
        tape->cell = cell; tape->tanh_c = tanh_c; tape->hidden = hidden;
    }
    return {std::move(hidden), std::move(cell)};
}

/// Full recurrent forward pass: columns are fed oldest first (slot n-tau up
/// to slot n-1), the last step's hidden state goes through the linear FC
/// layer. tape.prediction carries the K predicted angles.
inline ForwardTape clrnet_forward(const AngleHistory& history,
                                  const ClrnetParams& params, const ClrnetArch& arch) {
    arch.validate();
    if (history.num_vehicles != arch.num_vehicles || history.window != arch.window)
        throw std::invalid_argument("clrnet_forward: history dims do not match arch");
    if (!shapes_match(params, arch))
        throw std::invalid_argument("clrnet_forward: parameter shapes do not match arch");

    const std::size_t h = arch.lstm_hidden;
    ForwardTape tape;
    tape.arch = arch;
    tape.steps.resize(arch.window);

    std::vector<double> hidden(h, 0.0), cell(h, 0.0);
    for (std::size_t t = 0; t < arch.window; ++t) {
        // column tau-1-t is slot n-tau+t: oldest first
        const std::size_t j = arch.window - 1 - t;
        std::span<const double> col(history.values.data() + j * arch.num_vehicles,
                                    arch.num_vehicles);
        StepTape& st = tape.steps[t];
        std::vector<double> feat = conv_forward(col, params, arch, &st);
        auto [hout, cout] = lstm_step(feat, hidden, cell, params, arch, &st);
        hidden = std::move(hout);
        cell = std::move(cout);
    }
    tape.prediction.assign(params.fc_b.begin(), params.fc_b.end());
    detail::matvec_acc(params.fc_w, hidden, tape.prediction);
    return tape;
}

/// Mean square error with the 1/2 factor: (1/2N) sum_i ||pred_i - label_i||^2.
inline double mse_loss(std::span<const std::vector<double>> predictions,
                       std::span<const std::vector<double>> labels) {
    if (predictions.size() != labels.size() || predictions.empty())
        throw std::invalid_argument("mse_loss: batch shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].size() != labels[i].size())
            throw std::invalid_argument("mse_loss: example shape mismatch");
        for (std::size_t k = 0; k < predictions[i].size(); ++k) {
            const double e = predictions[i][k] - labels[i][k];
            acc += e * e;
        }
    }
    return acc / (2.0 * static_cast<double>(predictions.size()));
}

/// Accumulates into `grad` the exact gradient of the per-example loss
/// 0.5 * ||prediction - label||^2 with respect to every parameter, by
/// reverse accumulation through the FC layer, tau LSTM steps, and the conv
/// layer.
inline void backward_into(const ForwardTape& tape, std::span<const double> label,
                          const ClrnetParams& params, const ClrnetArch& arch,
                          ClrnetParams& grad) {
    if (tape.arch != arch || tape.steps.size() != arch.window)
        throw std::invalid_argument("backward: tape does not match arch");
    if (label.size() != arch.num_vehicles)
        throw std::invalid_argument("backward: label length != K");
    if (!shapes_match(params, arch) || !shapes_match(grad, arch))
        throw std::invalid_argument("backward: parameter shapes do not match arch");

    const std::size_t h = arch.lstm_hidden;
    const std::size_t positions = arch.conv_positions();

    std::vector<double> dpred(arch.num_vehicles);
    for (std::size_t k = 0; k < arch.num_vehicles; ++k)
        dpred[k] = tape.prediction[k] - label[k];

    const std::vector<double>& h_final = tape.steps.back().hidden;
    detail::outer_acc(grad.fc_w, dpred, h_final);
    for (std::size_t k = 0; k < arch.num_vehicles; ++k) grad.fc_b[k] += dpred[k];

    std::vector<double> dh(h, 0.0), dc(h, 0.0);
    detail::matvec_t_acc(params.fc_w, dpred, dh);

    std::vector<double> dzi(h), dzf(h), dzg(h), dzo(h), dfeat;
    for (std::size_t t = arch.window; t-- > 0;) {
        const StepTape& st = tape.steps[t];
        const std::vector<double>* c_prev = t > 0 ? &tape.steps[t - 1].cell : nullptr;
        const std::vector<double>* h_prev = t > 0 ? &tape.steps[t - 1].hidden : nullptr;

        for (std::size_t u = 0; u < h; ++u) {
            const double do_ = dh[u] * st.tanh_c[u];
            const double dcell = dc[u] + dh[u] * st.go[u] * (1.0 - st.tanh_c[u] * st.tanh_c[u]);
            const double di = dcell * st.gg[u];
            const double dg = dcell * st.gi[u];
            const double df = dcell * (c_prev ? (*c_prev)[u] : 0.0);
            dzi[u] = di * st.gi[u] * (1.0 - st.gi[u]);
            dzf[u] = df * st.gf[u] * (1.0 - st.gf[u]);
            dzg[u] = dg * (1.0 - st.gg[u] * st.gg[u]);
            dzo[u] = do_ * st.go[u] * (1.0 - st.go[u]);
            dc[u] = dcell * st.gf[u]; // flows to step t-1
        }

        detail::outer_acc(grad.wi, dzi, st.feat);
        detail::outer_acc(grad.wf, dzf, st.feat);
        detail::outer_acc(grad.wg, dzg, st.feat);
        detail::outer_acc(grad.wo, dzo, st.feat);
        if (h_prev) {
            detail::outer_acc(grad.ri, dzi, *h_prev);
            detail::outer_acc(grad.rf, dzf, *h_prev);
            detail::outer_acc(grad.rg, dzg, *h_prev);
            detail::outer_acc(grad.ro, dzo, *h_prev);
        }
        for (std::size_t u = 0; u < h; ++u) {
            grad.bi[u] += dzi[u];
            grad.bf[u] += dzf[u];
            grad.bg[u] += dzg[u];
            grad.bo[u] += dzo[u];
        }

        dfeat.assign(arch.feature_len(), 0.0);
        detail::matvec_t_acc(params.wi, dzi, dfeat);
        detail::matvec_t_acc(params.wf, dzf, dfeat);
        detail::matvec_t_acc(params.wg, dzg, dfeat);
        detail::matvec_t_acc(params.wo, dzo, dfeat);

        std::fill(dh.begin(), dh.end(), 0.0);
        if (h_prev) {
            detail::matvec_t_acc(params.ri, dzi, dh);
            detail::matvec_t_acc(params.rf, dzf, dh);
            detail::matvec_t_acc(params.rg, dzg, dh);
            detail::matvec_t_acc(params.ro, dzo, dh);
        }

        // conv backward through the ReLU mask
        for (std::size_t f = 0; f < arch.conv_filters; ++f) {
            double* gw = grad.conv_w.data() + f * 4;
            for (std::size_t pos = 0; pos < positions; ++pos) {
                const std::size_t idx = f * positions + pos;
                if (st.feat_pre[idx] <= 0.0) continue;
                const double d = dfeat[idx];
                const double* top = st.map_in.data() + pos * 2;
                gw[0] += d * top[0];
                gw[1] += d * top[1];
                gw[2] += d * top[2];
                gw[3] += d * top[3];
                grad.conv_b[f] += d;
            }
        }
    }
}

/// Gradient of the per-example loss as a fresh parameter-shaped structure.
inline ClrnetParams backward(const ForwardTape& tape, std::span<const double> label,
                             const ClrnetParams& params, const ClrnetArch& arch) {
    ClrnetParams grad = zeros_like(arch);
    backward_into(tape, label, params, arch, grad);
    return grad;
}

} // namespace predbeam
