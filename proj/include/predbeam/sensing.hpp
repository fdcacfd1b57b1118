#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "predbeam/errors.hpp"
#include "predbeam/rng.hpp"

namespace predbeam {

/// Gaussian angle-estimation error calibrated to a target NMSE rho:
/// sigma_E^2 = rho * E[theta^2], with the second moment taken empirically
/// over the operating trajectory corpus.
struct NoiseModel {
    double nmse = 0.0;                // rho
    double angle_second_moment = 0.0; // rad^2
    double sigma_e = 0.0;             // rad

    static NoiseModel from_second_moment(double rho, double second_moment) {
        if (!(rho >= 0))
            throw std::invalid_argument("NoiseModel: nmse must be >= 0");
        if (!(second_moment >= 0))
            throw std::invalid_argument("NoiseModel: second moment must be >= 0");
        NoiseModel nm;
        nm.nmse = rho;
        nm.angle_second_moment = second_moment;
        nm.sigma_e = std::sqrt(rho * second_moment);
        return nm;
    }
};

/// The K x tau matrix of noisy historical angle estimates feeding the
/// predictor. Column j holds the estimates of slot n-1-j (most recent
/// first); within a column, entries are ordered by vehicle index.
struct AngleHistory {
    std::size_t num_vehicles = 0;
    std::size_t window = 0;     // tau
    std::size_t slot_index = 0; // n, the slot being predicted
    std::vector<double> values; // [j * num_vehicles + k]

    double at(std::size_t k, std::size_t j) const {
        return values[j * num_vehicles + k];
    }
    double& at(std::size_t k, std::size_t j) { return values[j * num_vehicles + k]; }
};

/// sigma_E from the target NMSE and the empirical second moment of the
/// supplied true-angle samples.
inline NoiseModel calibrate_noise(double nmse, std::span<const double> angle_samples) {
    if (angle_samples.empty())
        throw std::invalid_argument("calibrate_noise: need at least one angle sample");
    double acc = 0.0;
    for (double a : angle_samples) acc += a * a;
    return NoiseModel::from_second_moment(nmse,
                                          acc / static_cast<double>(angle_samples.size()));
}

/// true + sigma_E * z for a pre-drawn standard-normal vector z. Outputs are
/// deliberately not clamped to [0, pi]; the error stays exactly Gaussian.
inline std::vector<double> apply_estimation_noise(std::span<const double> true_angles,
                                                  const NoiseModel& noise,
                                                  std::span<const double> z) {
    if (z.size() != true_angles.size())
        throw std::invalid_argument("apply_estimation_noise: draw length mismatch");
    std::vector<double> out(true_angles.size());
    for (std::size_t k = 0; k < true_angles.size(); ++k)
        out[k] = true_angles[k] + noise.sigma_e * z[k];
    return out;
}

/// Noisy angle estimates, error i.i.d. N(0, sigma_E^2) across vehicles.
inline std::vector<double> estimate_angles(std::span<const double> true_angles,
                                           const NoiseModel& noise, RandomStream& rng) {
    std::vector<double> z(true_angles.size());
    for (double& v : z) v = rng.gaussian();
    return apply_estimation_noise(true_angles, noise, z);
}

/// Stacks the last tau slots of estimates into the predictor input, column
/// j = slot n-1-j. estimates_by_slot[s] holds the K estimates of slot s.
inline AngleHistory assemble_history(std::span<const std::vector<double>> estimates_by_slot,
                                     std::size_t n, std::size_t tau) {
    if (tau < 1) throw std::invalid_argument("assemble_history: window must be >= 1");
    if (n < tau || estimates_by_slot.size() < n)
        throw not_enough_history_error("assemble_history: fewer than tau slots before n");
    const std::size_t k_count = estimates_by_slot[n - 1].size();
    AngleHistory h;
    h.num_vehicles = k_count;
    h.window = tau;
    h.slot_index = n;
    h.values.resize(k_count * tau);
    for (std::size_t j = 0; j < tau; ++j) {
        const auto& col = estimates_by_slot[n - 1 - j];
        if (col.size() != k_count)
            throw std::invalid_argument("assemble_history: ragged estimate rows");
        for (std::size_t k = 0; k < k_count; ++k) h.at(k, j) = col[k];
    }
    return h;
}

} // namespace predbeam
