#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "predbeam/errors.hpp"
#include "predbeam/rng.hpp"

namespace predbeam {

struct RsuLocation {
    double x = 0.0; // m
    double y = 0.0; // m
};

/// One vehicle at one slot: 2-D position plus the x-velocity that carries it
/// into the next slot (the road runs along x, so vy is identically zero).
struct VehicleState {
    double x = 0.0;  // m
    double y = 0.0;  // m
    double vx = 0.0; // m/s
};

struct MobilityConfig {
    double slot_duration = 0.02;     // s
    double process_noise_std = 0.02; // m, per-axis per-slot environment jitter
    double init_mean_x = 25.0;       // m
    double init_mean_y = 10.0;       // m
    double init_std = 1.0;           // m
    double velocity_min = 8.0;       // m/s
    double velocity_max = 8.25;      // m/s
    // true: vx redrawn from the uniform range at every slot; false: one draw
    // per episode, kept for ablation
    bool resample_velocity = true;

    void validate() const {
        if (!(slot_duration > 0))
            throw std::invalid_argument("MobilityConfig: slot_duration must be > 0");
        if (!(process_noise_std >= 0) || !(init_std >= 0))
            throw std::invalid_argument("MobilityConfig: stddevs must be >= 0");
        if (velocity_min > velocity_max)
            throw std::invalid_argument("MobilityConfig: velocity range inverted");
    }
};

/// K vehicles over N slots with the derived true angles and distances.
struct TrajectoryHistory {
    std::size_t num_vehicles = 0;
    std::size_t num_slots = 0;
    std::vector<VehicleState> states; // [k * num_slots + n]
    std::vector<double> true_angles;  // rad, same layout
    std::vector<double> true_dists;   // m, same layout

    const VehicleState& state(std::size_t k, std::size_t n) const {
        return states[k * num_slots + n];
    }
    double angle(std::size_t k, std::size_t n) const {
        return true_angles[k * num_slots + n];
    }
    double dist(std::size_t k, std::size_t n) const {
        return true_dists[k * num_slots + n];
    }
};

/// Euclidean distance between vehicle and RSU.
inline double distance_of(const VehicleState& state, const RsuLocation& rsu) {
    return std::hypot(state.x - rsu.x, state.y - rsu.y);
}

/// Angle of the vehicle relative to the RSU, arccos((x - xR)/distance),
/// in [0, pi].
inline double angle_of(const VehicleState& state, const RsuLocation& rsu) {
    const double d = distance_of(state, rsu);
    if (!(d > 0))
        throw degenerate_geometry_error("angle_of: vehicle coincides with the RSU");
    double c = (state.x - rsu.x) / d;
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return std::acos(c);
}

/// Initial state: position = init mean + N(0, init_std^2) per axis,
/// vx ~ U(velocity range).
inline VehicleState sample_initial_state(const MobilityConfig& cfg, RandomStream& rng) {
    cfg.validate();
    VehicleState s;
    s.x = cfg.init_mean_x + rng.gaussian(0.0, cfg.init_std);
    s.y = cfg.init_mean_y + rng.gaussian(0.0, cfg.init_std);
    s.vx = rng.uniform(cfg.velocity_min, cfg.velocity_max);
    return s;
}

/// One slot of the kinematic model: position advances by [vx, 0] * dT plus
/// the N(0, sigma_g^2 I) environment offset. The velocity carried by the
/// returned state is redrawn when resample_velocity is set.
inline VehicleState step(const VehicleState& state, const MobilityConfig& cfg,
                         RandomStream& rng) {
    VehicleState next;
    next.x = state.x + state.vx * cfg.slot_duration +
             rng.gaussian(0.0, cfg.process_noise_std);
    next.y = state.y + rng.gaussian(0.0, cfg.process_noise_std);
    next.vx = cfg.resample_velocity ? rng.uniform(cfg.velocity_min, cfg.velocity_max)
                                    : state.vx;
    return next;
}

/// Independent per-vehicle kinematic chains with true angle/distance filled
/// per slot.
inline TrajectoryHistory simulate_trajectories(std::size_t num_vehicles,
                                               std::size_t n_slots,
                                               const MobilityConfig& cfg,
                                               const RsuLocation& rsu,
                                               RandomStream& rng) {
    if (num_vehicles < 1 || n_slots < 1)
        throw std::invalid_argument("simulate_trajectories: need K >= 1 and slots >= 1");
    cfg.validate();
    TrajectoryHistory traj;
    traj.num_vehicles = num_vehicles;
    traj.num_slots = n_slots;
    traj.states.resize(num_vehicles * n_slots);
    traj.true_angles.resize(num_vehicles * n_slots);
    traj.true_dists.resize(num_vehicles * n_slots);
    for (std::size_t k = 0; k < num_vehicles; ++k) {
        VehicleState s = sample_initial_state(cfg, rng);
        for (std::size_t n = 0; n < n_slots; ++n) {
            if (n > 0) s = step(s, cfg, rng);
            traj.states[k * n_slots + n] = s;
            traj.true_dists[k * n_slots + n] = distance_of(s, rsu);
            traj.true_angles[k * n_slots + n] = angle_of(s, rsu);
        }
    }
    return traj;
}

} // namespace predbeam
