#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "predbeam/config.hpp"
#include "predbeam/errors.hpp"
#include "predbeam/mobility.hpp"
#include "predbeam/rng.hpp"
#include "predbeam/sensing.hpp"
#include "predbeam/textio.hpp"

namespace predbeam {

/// One supervised pair: noisy K x tau history in, true slot-n angles out.
struct TrainingExample {
    AngleHistory input;
    std::vector<double> label; // true angles at the predicted slot, radians
};

/// Generated corpus plus the noise model that produced the inputs.
struct Dataset {
    std::vector<TrainingExample> examples;
    NoiseModel noise;
    std::uint64_t seed = 0;
};

/// One episode of tau+1 slots: the trajectory plus the standard-normal
/// sensing draws for the tau input slots, kept separate from the trajectory
/// stream so the same episode can be re-noised at any NMSE.
struct Episode {
    TrajectoryHistory traj;            // window + 1 slots
    std::vector<double> sensing_draws; // [slot * K + k], standard normal
};

/// Simulates one episode on streams derived from (seed, tag pair, index).
/// Episodes that ever come closer to the RSU than min_distance_m are redrawn
/// on a salted stream (vanishingly rare at the default geometry).
inline Episode simulate_episode(const ExperimentConfig& cfg, const RsuLocation& rsu,
                                std::uint64_t seed, std::string_view traj_tag,
                                std::string_view noise_tag, std::uint64_t index) {
    const std::size_t slots = cfg.window + 1;
    const MobilityConfig mob = cfg.mobility_config();
    Episode ep;
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt >= 64)
            throw degenerate_geometry_error(
                "simulate_episode: could not draw an episode clear of the RSU");
        RandomStream rng =
            derive_stream(seed, traj_tag, index + attempt * 0x9e3779b97f4a7c15ULL);
        ep.traj = simulate_trajectories(cfg.num_vehicles, slots, mob, rsu, rng);
        bool ok = true;
        for (double d : ep.traj.true_dists) ok = ok && d >= cfg.min_distance_m;
        if (ok) break;
    }
    RandomStream noise_rng = derive_stream(seed, noise_tag, index);
    ep.sensing_draws.resize(cfg.window * cfg.num_vehicles);
    for (double& z : ep.sensing_draws) z = noise_rng.gaussian();
    return ep;
}

/// Noisy estimates for input slot `slot` of an episode. In bias mode the
/// slot-0 draw is reused across the window, modelling a persistent per-
/// vehicle sensing offset instead of i.i.d. per-slot errors.
inline std::vector<double> episode_estimates(const Episode& ep, std::size_t slot,
                                             const NoiseModel& noise, bool bias_mode) {
    const std::size_t k_count = ep.traj.num_vehicles;
    std::vector<double> truth(k_count), z(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        truth[k] = ep.traj.angle(k, slot);
        z[k] = ep.sensing_draws[(bias_mode ? 0 : slot) * k_count + k];
    }
    return apply_estimation_noise(truth, noise, z);
}

/// Predictor input for the episode's final slot under the given noise model.
inline AngleHistory episode_history(const Episode& ep, const ExperimentConfig& cfg,
                                    const NoiseModel& noise) {
    std::vector<std::vector<double>> est(cfg.window);
    for (std::size_t s = 0; s < cfg.window; ++s)
        est[s] = episode_estimates(ep, s, noise, cfg.sensing_bias_mode);
    return assemble_history(est, cfg.window, cfg.window);
}

/// The empirical second moment of the true angles over all input slots of a
/// batch of episodes — the calibration population for sigma_E.
inline double input_angle_second_moment(std::span<const Episode> episodes,
                                        std::size_t window) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const Episode& ep : episodes) {
        for (std::size_t k = 0; k < ep.traj.num_vehicles; ++k)
            for (std::size_t s = 0; s < window; ++s) {
                const double a = ep.traj.angle(k, s);
                acc += a * a;
                ++count;
            }
    }
    if (count == 0)
        throw std::invalid_argument("input_angle_second_moment: no episodes");
    return acc / static_cast<double>(count);
}

/// train_set_size independent episodes, noise calibrated on this corpus's
/// own true input angles, inputs noised at `rho`, labels = true final-slot
/// angles.
inline Dataset generate_dataset(const ExperimentConfig& cfg, double rho,
                                const RsuLocation& rsu = {}) {
    cfg.validate();
    if (!(rho >= 0)) throw std::invalid_argument("generate_dataset: rho must be >= 0");
    std::vector<Episode> episodes;
    episodes.reserve(cfg.train_set_size);
    for (std::uint64_t i = 0; i < cfg.train_set_size; ++i)
        episodes.push_back(
            simulate_episode(cfg, rsu, cfg.seed, "train-traj", "train-noise", i));

    Dataset ds;
    ds.seed = cfg.seed;
    ds.noise = NoiseModel::from_second_moment(
        rho, input_angle_second_moment(episodes, cfg.window));
    ds.examples.reserve(episodes.size());
    for (const Episode& ep : episodes) {
        TrainingExample ex;
        ex.input = episode_history(ep, cfg, ds.noise);
        ex.label.resize(cfg.num_vehicles);
        for (std::size_t k = 0; k < cfg.num_vehicles; ++k)
            ex.label[k] = ep.traj.angle(k, cfg.window);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

/// Plain-text corpus format mirroring the checkpoint style: metadata header,
/// then per example tau history rows (most recent slot first) and one label
/// row.
inline void save_dataset(std::ostream& os, const Dataset& ds) {
    if (ds.examples.empty())
        throw std::invalid_argument("save_dataset: empty dataset");
    const std::size_t k_count = ds.examples.front().input.num_vehicles;
    const std::size_t window = ds.examples.front().input.window;
    os << "predbeam dataset v1\n";
    os << "num_examples = " << ds.examples.size() << "\n";
    os << "num_vehicles = " << k_count << "\n";
    os << "window = " << window << "\n";
    os << "nmse = " << format_double(ds.noise.nmse) << "\n";
    os << "angle_second_moment = " << format_double(ds.noise.angle_second_moment)
       << "\n";
    os << "seed = " << ds.seed << "\n";
    auto row = [&os](std::span<const double> vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os << format_double(vals[i]) << (i + 1 == vals.size() ? "\n" : " ");
    };
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        const TrainingExample& ex = ds.examples[i];
        if (ex.input.num_vehicles != k_count || ex.input.window != window ||
            ex.label.size() != k_count)
            throw std::invalid_argument("save_dataset: ragged example shapes");
        os << "example " << i << "\n";
        for (std::size_t j = 0; j < window; ++j)
            row(std::span<const double>(ex.input.values.data() + j * k_count, k_count));
        row(ex.label);
    }
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open dataset file for writing: " + path);
    save_dataset(os, ds);
    if (!os) throw std::runtime_error("failed to write dataset file: " + path);
}

inline Dataset load_dataset(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "predbeam dataset v1")
        throw std::runtime_error("bad dataset magic line");
    auto meta_u64 = [&is, &line](const char* key) {
        if (!std::getline(is, line))
            throw std::runtime_error(std::string("dataset header truncated at ") + key);
        const auto fields = split_fields(line, '=');
        unsigned long long v = 0;
        if (fields.size() != 2 || std::string(trim(fields[0])) != key ||
            !parse_u64(fields[1], v))
            throw std::runtime_error(std::string("bad dataset header line for ") + key);
        return static_cast<std::uint64_t>(v);
    };
    auto meta_f64 = [&is, &line](const char* key) {
        if (!std::getline(is, line))
            throw std::runtime_error(std::string("dataset header truncated at ") + key);
        const auto fields = split_fields(line, '=');
        double v = 0.0;
        if (fields.size() != 2 || std::string(trim(fields[0])) != key ||
            !parse_double(fields[1], v))
            throw std::runtime_error(std::string("bad dataset header line for ") + key);
        return v;
    };
    const std::uint64_t n = meta_u64("num_examples");
    const std::size_t k_count = meta_u64("num_vehicles");
    const std::size_t window = meta_u64("window");
    const double nmse = meta_f64("nmse");
    const double second_moment = meta_f64("angle_second_moment");
    const std::uint64_t seed = meta_u64("seed");

    Dataset ds;
    ds.seed = seed;
    ds.noise = NoiseModel::from_second_moment(nmse, second_moment);
    ds.examples.resize(n);
    auto read_row = [&is, &line](std::span<double> out, const char* what) {
        if (!std::getline(is, line))
            throw std::runtime_error(std::string("dataset truncated in ") + what);
        const auto fields = split_fields(trim(line), ' ');
        std::size_t filled = 0;
        for (const std::string& f : fields) {
            if (f.empty()) continue;
            if (filled >= out.size())
                throw std::runtime_error(std::string("too many values in ") + what);
            if (!parse_double(f, out[filled]))
                throw std::runtime_error(std::string("bad value in ") + what);
            ++filled;
        }
        if (filled != out.size())
            throw std::runtime_error(std::string("short row in ") + what);
    };
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!std::getline(is, line) ||
            std::string(trim(line)) != "example " + std::to_string(i))
            throw std::runtime_error("expected 'example " + std::to_string(i) + "'");
        TrainingExample& ex = ds.examples[i];
        ex.input.num_vehicles = k_count;
        ex.input.window = window;
        ex.input.slot_index = window;
        ex.input.values.resize(k_count * window);
        for (std::size_t j = 0; j < window; ++j)
            read_row(std::span<double>(ex.input.values.data() + j * k_count, k_count),
                     "history row");
        ex.label.resize(k_count);
        read_row(ex.label, "label row");
    }
    while (std::getline(is, line))
        if (!trim(line).empty())
            throw std::runtime_error("unexpected trailing data in dataset file");
    return ds;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset file: " + path);
    return load_dataset(is);
}

} // namespace predbeam
