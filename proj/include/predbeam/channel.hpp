#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "predbeam/errors.hpp"

namespace predbeam {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w * 1e3); }

/// Antenna counts, large-scale fading constants, noise and power budget.
/// Powers are linear watts and the reference path loss is a linear ratio;
/// dB/dBm conversions happen at I/O boundaries only.
struct ChannelParams {
    int num_tx_antennas = 32;
    int num_rx_antennas = 32;
    double ref_path_loss = 3.1622776601683794e-07; // -65 dB
    double ref_distance = 1.0;                     // m
    double path_loss_exp = 3.0;
    double noise_power = 1e-11;                    // W, -80 dBm
    double total_power = 0.1;                      // W, 20 dBm

    /// Transmit antenna gain, sqrt(Nt).
    double tx_gain() const { return std::sqrt(static_cast<double>(num_tx_antennas)); }
    /// tx_gain squared, kept exact as the antenna count itself.
    double tx_gain_sq() const { return static_cast<double>(num_tx_antennas); }
    /// Total array gain sqrt(Nt*Nr) of the monostatic sensing path.
    double array_gain() const {
        return std::sqrt(static_cast<double>(num_tx_antennas) *
                         static_cast<double>(num_rx_antennas));
    }

    void validate() const {
        if (num_tx_antennas < 1 || num_rx_antennas < 1)
            throw std::invalid_argument("ChannelParams: antenna counts must be >= 1");
        if (!(ref_path_loss > 0) || !(ref_distance > 0) || !(path_loss_exp > 0) ||
            !(noise_power > 0) || !(total_power >= 0))
            throw std::invalid_argument("ChannelParams: fields must be positive");
    }
};

/// Unit-norm array response of a half-wavelength ULA at a given angle.
struct SteeringVector {
    std::vector<std::complex<double>> entries;
    double angle = 0.0;
};

/// Per-user transmit beam: sqrt(power) times a unit-norm steering vector.
struct BeamVector {
    std::vector<std::complex<double>> entries;
    double power = 0.0;
};

namespace detail {

inline void check_angle(double theta, const char* who) {
    if (!std::isfinite(theta))
        throw std::invalid_argument(std::string(who) + ": angle must be finite");
}

inline SteeringVector steering(double theta, int n_antennas, const char* who) {
    check_angle(theta, who);
    if (n_antennas < 1)
        throw std::invalid_argument(std::string(who) + ": need at least one antenna");
    SteeringVector sv;
    sv.angle = theta;
    sv.entries.resize(static_cast<std::size_t>(n_antennas));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
    const double ct = std::cos(theta);
    for (int m = 0; m < n_antennas; ++m)
        sv.entries[static_cast<std::size_t>(m)] = std::polar(scale, -M_PI * m * ct);
    return sv;
}

} // namespace detail

/// Transmit steering vector: entry m = (1/sqrt(N)) exp(-j pi m cos(theta)).
inline SteeringVector tx_steering(double theta, int n_antennas) {
    return detail::steering(theta, n_antennas, "tx_steering");
}

/// Receive steering vector; same ULA response evaluated with N = Nr.
inline SteeringVector rx_steering(double theta, int n_antennas) {
    return detail::steering(theta, n_antennas, "rx_steering");
}

/// |a^H(theta_true) a(theta_point)|^2, evaluated as the direct inner product
/// of the two steering vectors. Equals the Dirichlet-kernel closed form in
/// psi = cos(theta_true) - cos(theta_point); 1 when perfectly aligned.
inline double beam_alignment_gain(double theta_true, double theta_point, int n_antennas) {
    detail::check_angle(theta_true, "beam_alignment_gain");
    detail::check_angle(theta_point, "beam_alignment_gain");
    if (n_antennas < 1)
        throw std::invalid_argument("beam_alignment_gain: need at least one antenna");
    const double psi = std::cos(theta_true) - std::cos(theta_point);
    std::complex<double> acc(0.0, 0.0);
    for (int m = 0; m < n_antennas; ++m)
        acc += std::polar(1.0, M_PI * m * psi);
    const double mag = std::abs(acc) / static_cast<double>(n_antennas);
    return mag * mag;
}

/// Large-scale fading alpha_0 (d/d_0)^(-zeta).
inline double path_loss(double d, const ChannelParams& params) {
    if (!(d > 0) || !std::isfinite(d))
        throw std::invalid_argument("path_loss: distance must be positive");
    return params.ref_path_loss * std::pow(d / params.ref_distance, -params.path_loss_exp);
}

/// Post-beamforming SNR of one user under the asymptotic-orthogonality
/// simplification: p * Nt * alpha(d) * gain / sigma^2.
inline double user_snr(double theta_true, double theta_point, double d, double p,
                       const ChannelParams& params) {
    if (!(p >= 0) || !std::isfinite(p))
        throw std::invalid_argument("user_snr: power must be non-negative");
    const double g = beam_alignment_gain(theta_true, theta_point, params.num_tx_antennas);
    return p * params.tx_gain_sq() * path_loss(d, params) * g / params.noise_power;
}

/// Full SINR with the interference sum kept, as a diagnostic for the
/// orthogonality approximation. With K = 1 this reduces to user_snr.
inline double user_sinr(std::size_t user_index, std::span<const double> thetas_true,
                        std::span<const BeamVector> beams, std::span<const double> dists,
                        const ChannelParams& params) {
    const std::size_t k_count = thetas_true.size();
    if (k_count < 1 || beams.size() != k_count || dists.size() != k_count)
        throw std::invalid_argument("user_sinr: inconsistent input lengths");
    if (user_index >= k_count)
        throw std::invalid_argument("user_sinr: user index out of range");

    const SteeringVector a_true =
        tx_steering(thetas_true[user_index], params.num_tx_antennas);
    const double alpha = path_loss(dists[user_index], params);
    const double gain_scale = params.tx_gain_sq() * alpha;

    auto beam_power = [&](const BeamVector& w) {
        if (w.entries.size() != a_true.entries.size())
            throw std::invalid_argument("user_sinr: beam length mismatch");
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t m = 0; m < w.entries.size(); ++m)
            acc += std::conj(a_true.entries[m]) * w.entries[m];
        return gain_scale * std::norm(acc);
    };

    const double signal = beam_power(beams[user_index]);
    double interference = 0.0;
    for (std::size_t j = 0; j < k_count; ++j)
        if (j != user_index) interference += beam_power(beams[j]);
    return signal / (interference + params.noise_power);
}

/// Downlink sum-rate sum_k log2(1 + SNR_k) under the SNR simplification.
inline double sum_rate(std::span<const double> thetas_true,
                       std::span<const double> thetas_point,
                       std::span<const double> dists, std::span<const double> powers,
                       const ChannelParams& params) {
    const std::size_t k_count = thetas_true.size();
    if (thetas_point.size() != k_count || dists.size() != k_count ||
        powers.size() != k_count)
        throw std::invalid_argument("sum_rate: inconsistent input lengths");
    double rate = 0.0;
    for (std::size_t k = 0; k < k_count; ++k)
        rate += std::log2(1.0 + user_snr(thetas_true[k], thetas_point[k], dists[k],
                                         powers[k], params));
    return rate;
}

/// sqrt(p) a(theta_point) with Nt entries; squared norm equals p.
inline BeamVector beamformer_from_angle(double theta_point, double p,
                                        const ChannelParams& params) {
    if (!(p >= 0) || !std::isfinite(p))
        throw std::invalid_argument("beamformer_from_angle: power must be non-negative");
    BeamVector w;
    w.power = p;
    const SteeringVector a = tx_steering(theta_point, params.num_tx_antennas);
    w.entries.resize(a.entries.size());
    const double amp = std::sqrt(p);
    for (std::size_t m = 0; m < a.entries.size(); ++m) w.entries[m] = amp * a.entries[m];
    return w;
}

} // namespace predbeam
