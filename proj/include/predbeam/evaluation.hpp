#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "predbeam/channel.hpp"
#include "predbeam/checkpoint.hpp"
#include "predbeam/config.hpp"
#include "predbeam/dataset.hpp"
#include "predbeam/predictors.hpp"
#include "predbeam/training.hpp"

namespace predbeam {

/// One Fig.-style data point: a method's mean/std sum-rate at one
/// (NMSE, power) grid position.
struct SweepResult {
    double nmse = 0.0;
    double power_dbm = 0.0;
    std::string method;
    double mean_sum_rate = 0.0; // bits/s/Hz
    double std_sum_rate = 0.0;  // bits/s/Hz, sample std over realizations
    std::size_t realizations = 0;
    std::uint64_t seed = 0;
};

/// Per-method aggregates including the angle prediction error, which the
/// sum-rate alone hides.
struct MethodStats {
    std::string method;
    double mean_sum_rate = 0.0;
    double std_sum_rate = 0.0;
    double angle_rmse = 0.0; // rad, prediction vs truth at the evaluated slot
};

/// Frozen Monte-Carlo population: the same episodes and the same unit-
/// variance sensing draws are reused at every (NMSE, power) grid point, so
/// curves differ only through the quantity being swept.
struct EvalCorpus {
    std::vector<Episode> episodes;
    double angle_second_moment = 0.0; // calibration over this corpus
};

inline EvalCorpus build_eval_corpus(const ExperimentConfig& cfg,
                                    const RsuLocation& rsu = {}) {
    cfg.validate();
    EvalCorpus corpus;
    corpus.episodes.reserve(cfg.realizations);
    for (std::uint64_t r = 0; r < cfg.realizations; ++r)
        corpus.episodes.push_back(
            simulate_episode(cfg, rsu, cfg.seed, "eval-traj", "eval-noise", r));
    corpus.angle_second_moment =
        input_angle_second_moment(corpus.episodes, cfg.window);
    return corpus;
}

namespace detail {

struct RealizationOutcome {
    double sum_rate = 0.0;
    double sq_angle_err = 0.0; // sum over vehicles
};

/// One realization of one method: predict the final slot, beamform, score
/// against the true geometry.
inline RealizationOutcome run_realization(const Episode& ep,
                                          const ExperimentConfig& cfg,
                                          const NoiseModel& noise,
                                          const ChannelParams& chan,
                                          const std::string& method,
                                          const Checkpoint* model) {
    const std::size_t k_count = cfg.num_vehicles;
    const std::size_t n = cfg.window; // evaluated slot
    const AngleHistory history = episode_history(ep, cfg, noise);

    PredictedAngles pred;
    if (method == kMethodPerfect) {
        std::vector<double> truth(k_count);
        for (std::size_t k = 0; k < k_count; ++k) truth[k] = ep.traj.angle(k, n);
        pred = predict_perfect(truth);
    } else if (method == kMethodModelBased) {
        std::vector<double> est_prev(k_count), v_prev(k_count), d_prev(k_count);
        for (std::size_t k = 0; k < k_count; ++k) {
            est_prev[k] = history.at(k, 0); // most recent column = slot n-1
            v_prev[k] = ep.traj.state(k, n - 1).vx;
            d_prev[k] = ep.traj.dist(k, n - 1);
        }
        pred = predict_model_based(est_prev, v_prev, d_prev, cfg.slot_duration_s);
    } else if (method == kMethodClrnet) {
        if (!model)
            throw std::invalid_argument("evaluate: clrnet method needs a model");
        pred = predict_clrnet(history, *model);
    } else {
        throw std::invalid_argument("evaluate: unknown method: " + method);
    }

    const double per_user_power =
        chan.total_power / static_cast<double>(k_count);
    RealizationOutcome out;
    for (std::size_t k = 0; k < k_count; ++k) {
        const double truth = ep.traj.angle(k, n);
        const double snr = user_snr(truth, pred.values[k], ep.traj.dist(k, n),
                                    per_user_power, chan);
        out.sum_rate += std::log2(1.0 + snr);
        const double e = pred.values[k] - truth;
        out.sq_angle_err += e * e;
    }
    return out;
}

} // namespace detail

/// Scores the requested methods on a frozen corpus at one (rho, power) grid
/// point. Realizations are independent, so they are chunked across threads;
/// the reduction always runs in realization order, keeping results
/// bit-identical for any thread count.
inline std::vector<MethodStats> evaluate_on_corpus(
    const EvalCorpus& corpus, const ExperimentConfig& cfg, double rho,
    double power_dbm, std::span<const std::string> methods,
    const Checkpoint* model = nullptr) {
    cfg.validate();
    if (methods.empty())
        throw std::invalid_argument("evaluate: need at least one method");
    if (corpus.episodes.empty())
        throw std::invalid_argument("evaluate: empty corpus");
    const NoiseModel noise =
        NoiseModel::from_second_moment(rho, corpus.angle_second_moment);
    const ChannelParams chan = cfg.channel_params(power_dbm);
    chan.validate();

    const std::size_t n_real = corpus.episodes.size();
    const std::size_t n_methods = methods.size();
    std::vector<detail::RealizationOutcome> outcomes(n_real * n_methods);

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r)
            for (std::size_t m = 0; m < n_methods; ++m)
                outcomes[r * n_methods + m] = detail::run_realization(
                    corpus.episodes[r], cfg, noise, chan, methods[m], model);
    };

    std::size_t n_threads = cfg.threads != 0
                                ? cfg.threads
                                : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, n_real);
    if (n_threads <= 1) {
        run_range(0, n_real);
    } else {
        std::vector<std::future<void>> tasks;
        const std::size_t chunk = (n_real + n_threads - 1) / n_threads;
        for (std::size_t lo = 0; lo < n_real; lo += chunk)
            tasks.push_back(std::async(std::launch::async, run_range, lo,
                                       std::min(lo + chunk, n_real)));
        for (auto& t : tasks) t.get();
    }

    std::vector<MethodStats> stats(n_methods);
    for (std::size_t m = 0; m < n_methods; ++m) {
        double sum = 0.0;
        double sq_err = 0.0;
        for (std::size_t r = 0; r < n_real; ++r) {
            sum += outcomes[r * n_methods + m].sum_rate;
            sq_err += outcomes[r * n_methods + m].sq_angle_err;
        }
        const double mean = sum / static_cast<double>(n_real);
        double var_acc = 0.0;
        for (std::size_t r = 0; r < n_real; ++r) {
            const double d = outcomes[r * n_methods + m].sum_rate - mean;
            var_acc += d * d;
        }
        stats[m].method = methods[m];
        stats[m].mean_sum_rate = mean;
        stats[m].std_sum_rate =
            n_real > 1 ? std::sqrt(var_acc / static_cast<double>(n_real - 1)) : 0.0;
        stats[m].angle_rmse = std::sqrt(
            sq_err / static_cast<double>(n_real * cfg.num_vehicles));
    }
    return stats;
}

inline SweepResult to_sweep_result(const MethodStats& st, double rho,
                                   double power_dbm, const ExperimentConfig& cfg) {
    SweepResult row;
    row.nmse = rho;
    row.power_dbm = power_dbm;
    row.method = st.method;
    row.mean_sum_rate = st.mean_sum_rate;
    row.std_sum_rate = st.std_sum_rate;
    row.realizations = cfg.realizations;
    row.seed = cfg.seed;
    return row;
}

/// Fresh-corpus evaluation at a single grid point.
inline std::vector<SweepResult> evaluate(const ExperimentConfig& cfg, double rho,
                                         double power_dbm,
                                         std::span<const std::string> methods,
                                         const Checkpoint* model = nullptr) {
    const EvalCorpus corpus = build_eval_corpus(cfg);
    std::vector<SweepResult> rows;
    for (const MethodStats& st :
         evaluate_on_corpus(corpus, cfg, rho, power_dbm, methods, model))
        rows.push_back(to_sweep_result(st, rho, power_dbm, cfg));
    return rows;
}

inline std::vector<std::string> all_methods() {
    return {kMethodPerfect, kMethodModelBased, kMethodClrnet};
}

/// Sum-rate vs NMSE at fixed power: trains one network per grid point on
/// noise matched to that point, then scores all three methods on the shared
/// corpus.
struct NmseSweepOutput {
    std::vector<SweepResult> results;
    std::vector<Checkpoint> models; // one per NMSE grid point, grid order
};

inline NmseSweepOutput sweep_nmse(const ExperimentConfig& cfg,
                                  std::ostream* log = nullptr) {
    cfg.validate();
    const EvalCorpus corpus = build_eval_corpus(cfg);
    const std::vector<std::string> methods = all_methods();
    NmseSweepOutput out;
    for (double rho : cfg.nmse_grid) {
        if (log)
            *log << "[sweep-nmse] rho = " << format_double(rho) << ": generating "
                 << cfg.train_set_size << " episodes, training "
                 << cfg.max_iterations << " iterations\n";
        const Dataset ds = generate_dataset(cfg, rho);
        TrainResult tr = train(cfg, ds);
        if (log)
            *log << "[sweep-nmse] rho = " << format_double(rho)
                 << ": best val loss " << format_double(tr.best_val_loss)
                 << " at iteration " << tr.best_iteration << "\n";
        for (const MethodStats& st :
             evaluate_on_corpus(corpus, cfg, rho, cfg.sweep_nmse_power_dbm, methods,
                                &tr.checkpoint))
            out.results.push_back(
                to_sweep_result(st, rho, cfg.sweep_nmse_power_dbm, cfg));
        out.models.push_back(std::move(tr.checkpoint));
    }
    return out;
}

/// Sum-rate vs transmit power at fixed NMSE. Training is skipped when a
/// pre-trained model is supplied.
struct PowerSweepOutput {
    std::vector<SweepResult> results;
    Checkpoint model;
};

inline PowerSweepOutput sweep_power(const ExperimentConfig& cfg,
                                    std::ostream* log = nullptr,
                                    const Checkpoint* pretrained = nullptr) {
    cfg.validate();
    const EvalCorpus corpus = build_eval_corpus(cfg);
    const std::vector<std::string> methods = all_methods();
    PowerSweepOutput out;
    const double rho = cfg.sweep_power_nmse;
    if (pretrained) {
        out.model = *pretrained;
    } else {
        if (log)
            *log << "[sweep-power] training at rho = " << format_double(rho) << "\n";
        const Dataset ds = generate_dataset(cfg, rho);
        TrainResult tr = train(cfg, ds);
        if (log)
            *log << "[sweep-power] best val loss " << format_double(tr.best_val_loss)
                 << " at iteration " << tr.best_iteration << "\n";
        out.model = std::move(tr.checkpoint);
    }
    for (double power_dbm : cfg.power_grid_dbm) {
        for (const MethodStats& st : evaluate_on_corpus(
                 corpus, cfg, rho, power_dbm, methods, &out.model))
            out.results.push_back(to_sweep_result(st, rho, power_dbm, cfg));
    }
    return out;
}

} // namespace predbeam
