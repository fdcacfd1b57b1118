#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "predbeam/channel.hpp"
#include "predbeam/checkpoint.hpp"
#include "predbeam/clrnet.hpp"
#include "predbeam/errors.hpp"
#include "predbeam/sensing.hpp"

namespace predbeam {

inline constexpr const char* kMethodPerfect = "perfect";
inline constexpr const char* kMethodModelBased = "model-based";
inline constexpr const char* kMethodClrnet = "clrnet";

/// One strategy's angle forecasts for slot n, tagged with the strategy name.
struct PredictedAngles {
    std::vector<double> values; // radians, one per vehicle
    std::string method;
};

/// Genie-aided upper bound: the true angles pass through unchanged.
inline PredictedAngles predict_perfect(std::span<const double> truth) {
    return {std::vector<double>(truth.begin(), truth.end()), kMethodPerfect};
}

/// Geometric one-step extrapolation from the most recent estimate, using the
/// true speed and distance: theta_pred = asin(v dT sin(theta_est) / d) +
/// theta_est per vehicle.
inline PredictedAngles predict_model_based(std::span<const double> theta_est_prev,
                                           std::span<const double> v_prev,
                                           std::span<const double> d_prev, double dt) {
    const std::size_t k = theta_est_prev.size();
    if (v_prev.size() != k || d_prev.size() != k)
        throw std::invalid_argument("predict_model_based: input lengths differ");
    PredictedAngles out;
    out.method = kMethodModelBased;
    out.values.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(d_prev[i] > 0.0))
            throw degenerate_geometry_error(
                "predict_model_based: non-positive distance for vehicle " +
                std::to_string(i));
        const double arg = v_prev[i] * dt * std::sin(theta_est_prev[i]) / d_prev[i];
        if (!(std::fabs(arg) <= 1.0))
            throw degenerate_geometry_error(
                "predict_model_based: arcsin argument out of range for vehicle " +
                std::to_string(i));
        out.values[i] = std::asin(arg) + theta_est_prev[i];
    }
    return out;
}

/// Trained-network forecast. Applies the checkpoint's input standardization
/// (if enabled) and runs the recurrent forward pass.
inline PredictedAngles predict_clrnet(const AngleHistory& history,
                                      const Checkpoint& model) {
    if (history.num_vehicles != model.arch.num_vehicles ||
        history.window != model.arch.window)
        throw std::invalid_argument("predict_clrnet: history dims do not match model");
    PredictedAngles out;
    out.method = kMethodClrnet;
    if (model.standardize) {
        if (!(model.input_std > 0.0) || !(model.output_std > 0.0))
            throw std::invalid_argument(
                "predict_clrnet: standardization scales must be positive");
        AngleHistory scaled = history;
        for (double& v : scaled.values) v = (v - model.input_mean) / model.input_std;
        out.values = clrnet_forward(scaled, model.params, model.arch).prediction;
        for (double& v : out.values) v = model.output_mean + model.output_std * v;
    } else {
        out.values = clrnet_forward(history, model.params, model.arch).prediction;
    }
    return out;
}

/// Per-vehicle beamformers steered at the predicted angles.
inline std::vector<BeamVector> beams_from_prediction(const PredictedAngles& pred,
                                                     std::span<const double> powers,
                                                     const ChannelParams& params) {
    if (pred.values.size() != powers.size())
        throw std::invalid_argument("beams_from_prediction: length mismatch");
    std::vector<BeamVector> beams;
    beams.reserve(pred.values.size());
    for (std::size_t k = 0; k < pred.values.size(); ++k)
        beams.push_back(beamformer_from_angle(pred.values[k], powers[k], params));
    return beams;
}

} // namespace predbeam
