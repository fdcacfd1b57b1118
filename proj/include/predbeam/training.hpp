#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "predbeam/checkpoint.hpp"
#include "predbeam/clrnet.hpp"
#include "predbeam/config.hpp"
#include "predbeam/dataset.hpp"
#include "predbeam/errors.hpp"
#include "predbeam/optimizer.hpp"
#include "predbeam/rng.hpp"

namespace predbeam {

/// One row of the training log; val_loss is NaN on iterations without a
/// validation pass.
struct LossTracePoint {
    std::size_t iteration = 0;
    double batch_loss = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<LossTracePoint> trace;
    double best_val_loss = std::numeric_limits<double>::quiet_NaN();
    std::size_t best_iteration = 0;
};

namespace detail {

/// Piecewise-constant decay: full rate for the first 60% of iterations,
/// 0.3x until 85%, 0.1x until 95%, 0.03x for the final stretch.
inline double scheduled_rate(double base, std::size_t iteration, std::size_t max_iter) {
    const double frac = static_cast<double>(iteration) / static_cast<double>(max_iter);
    if (frac < 0.6) return base;
    if (frac < 0.85) return 0.3 * base;
    if (frac < 0.95) return 0.1 * base;
    return 0.03 * base;
}

inline double dataset_loss(const ClrnetParams& params, const ClrnetArch& arch,
                           std::span<const AngleHistory> inputs,
                           std::span<const std::vector<double>> labels) {
    double acc = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const ForwardTape tape = clrnet_forward(inputs[i], params, arch);
        for (std::size_t k = 0; k < labels[i].size(); ++k) {
            const double e = tape.prediction[k] - labels[i][k];
            acc += e * e;
        }
    }
    return acc / (2.0 * static_cast<double>(inputs.size()));
}

} // namespace detail

/// Mini-batch gradient descent on the mean square error, deterministic and
/// single-threaded. The last validation_fraction of the dataset is held out;
/// the returned checkpoint carries the parameters with the best validation
/// loss seen at any checkpoint of validation_interval iterations.
inline TrainResult train(const ExperimentConfig& cfg, const Dataset& dataset) {
    cfg.validate();
    if (dataset.examples.empty())
        throw std::invalid_argument("train: dataset is empty");
    const ClrnetArch arch = cfg.clrnet_arch();
    for (const TrainingExample& ex : dataset.examples)
        if (ex.input.num_vehicles != arch.num_vehicles ||
            ex.input.window != arch.window || ex.label.size() != arch.num_vehicles)
            throw std::invalid_argument("train: example shape does not match config");

    const std::size_t n_total = dataset.examples.size();
    std::size_t n_val =
        static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(n_total));
    if (cfg.validation_fraction > 0.0 && n_val == 0) n_val = 1;
    if (n_val >= n_total)
        throw std::invalid_argument("train: validation split leaves no training data");
    const std::size_t n_train = n_total - n_val;

    // Input and label standardization statistics from the training split
    // only. Training runs in the standardized spaces; inference undoes the
    // label transform, so the checkpoint records both.
    auto moments = [](auto&& visit) {
        double mean = 0.0, sq = 0.0;
        std::size_t count = 0;
        visit([&](double v) {
            mean += v;
            sq += v * v;
            ++count;
        });
        mean /= static_cast<double>(count);
        const double var = sq / static_cast<double>(count) - mean * mean;
        return std::pair<double, double>(mean, var > 0.0 ? std::sqrt(var) : 0.0);
    };
    auto [in_mean, in_std] = moments([&](auto&& f) {
        for (std::size_t i = 0; i < n_train; ++i)
            for (double v : dataset.examples[i].input.values) f(v);
    });
    auto [out_mean, out_std] = moments([&](auto&& f) {
        for (std::size_t i = 0; i < n_train; ++i)
            for (double v : dataset.examples[i].label) f(v);
    });
    const bool standardize =
        cfg.standardize_inputs && in_std > 1e-12 && out_std > 1e-12;
    if (!standardize) {
        in_mean = 0.0;
        in_std = 1.0;
        out_mean = 0.0;
        out_std = 1.0;
    }

    std::vector<AngleHistory> inputs(n_total);
    std::vector<std::vector<double>> labels(n_total);
    for (std::size_t i = 0; i < n_total; ++i) {
        inputs[i] = dataset.examples[i].input;
        labels[i] = dataset.examples[i].label;
        if (standardize) {
            for (double& v : inputs[i].values) v = (v - in_mean) / in_std;
            for (double& v : labels[i]) v = (v - out_mean) / out_std;
        }
    }
    const std::span<const AngleHistory> val_inputs(inputs.data() + n_train, n_val);
    const std::span<const std::vector<double>> val_labels(labels.data() + n_train, n_val);

    RandomStream init_rng = derive_stream(cfg.seed, "train-init", 0);
    RandomStream batch_rng = derive_stream(cfg.seed, "train-batch", 0);
    ClrnetParams params = init_params(arch, init_rng);
    OptimizerState opt = OptimizerState::create(arch, cfg.learning_rate);

    TrainResult result;
    result.trace.reserve(cfg.max_iterations);
    ClrnetParams best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_iter = 0;

    ClrnetParams grads = zeros_like(arch);
    // Mini-batches walk a reshuffled index order; a fresh Fisher-Yates pass
    // starts whenever fewer than batch_size indices remain unvisited.
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = n_train; // forces a shuffle before the first batch
    std::vector<std::size_t> batch(cfg.batch_size);
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        for (std::size_t& b : batch) {
            if (cursor >= n_train) {
                for (std::size_t i = n_train - 1; i > 0; --i) {
                    const std::size_t j =
                        static_cast<std::size_t>(batch_rng.below(i + 1));
                    std::swap(order[i], order[j]);
                }
                cursor = 0;
            }
            b = order[cursor++];
        }

        for (auto* t : grads.tensors()) std::fill(t->begin(), t->end(), 0.0);
        double batch_loss = 0.0;
        for (std::size_t b : batch) {
            const ForwardTape tape = clrnet_forward(inputs[b], params, arch);
            for (std::size_t k = 0; k < arch.num_vehicles; ++k) {
                const double e = tape.prediction[k] - labels[b][k];
                batch_loss += e * e;
            }
            backward_into(tape, labels[b], params, arch, grads);
        }
        batch_loss /= 2.0 * static_cast<double>(cfg.batch_size);
        const double scale = 1.0 / static_cast<double>(cfg.batch_size);
        for (auto* t : grads.tensors())
            for (double& g : *t) g *= scale;

        if (!std::isfinite(batch_loss))
            throw training_diverged_error(
                "train: non-finite batch loss at iteration " + std::to_string(it) +
                " (trace has " + std::to_string(result.trace.size()) + " points)");

        opt.learning_rate = detail::scheduled_rate(cfg.learning_rate, it, cfg.max_iterations);
        optimizer_step(params, grads, opt);

        LossTracePoint pt;
        pt.iteration = it;
        pt.batch_loss = batch_loss;
        if (n_val > 0 && (it % cfg.validation_interval == 0 || it == cfg.max_iterations)) {
            pt.val_loss = detail::dataset_loss(params, arch, val_inputs, val_labels);
            if (pt.val_loss < best_val) {
                best_val = pt.val_loss;
                best_params = params;
                best_iter = it;
            }
        }
        result.trace.push_back(pt);
    }
    if (n_val == 0) {
        best_params = params;
        best_iter = cfg.max_iterations;
        best_val = std::numeric_limits<double>::quiet_NaN();
    }

    result.best_val_loss = best_val;
    result.best_iteration = best_iter;
    result.checkpoint.arch = arch;
    result.checkpoint.standardize = standardize;
    result.checkpoint.input_mean = in_mean;
    result.checkpoint.input_std = in_std;
    result.checkpoint.output_mean = out_mean;
    result.checkpoint.output_std = out_std;
    result.checkpoint.seed = cfg.seed;
    result.checkpoint.nmse = dataset.noise.nmse;
    result.checkpoint.angle_second_moment = dataset.noise.angle_second_moment;
    result.checkpoint.iterations = best_iter;
    result.checkpoint.params = std::move(best_params);
    return result;
}

/// CSV rendering of the loss trace (iteration,batch_loss,val_loss; empty
/// val_loss cell when no validation pass ran).
inline void save_loss_trace(std::ostream& os, std::span<const LossTracePoint> trace) {
    os << "iteration,batch_loss,val_loss\n";
    for (const LossTracePoint& pt : trace) {
        os << pt.iteration << "," << format_double(pt.batch_loss) << ",";
        if (std::isfinite(pt.val_loss)) os << format_double(pt.val_loss);
        os << "\n";
    }
}

} // namespace predbeam
