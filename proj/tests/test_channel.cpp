#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "predbeam/channel.hpp"
#include "predbeam/rng.hpp"

using namespace predbeam;

namespace {

/// Closed-form alignment gain of an N-element half-wavelength ULA,
/// |sin(N pi psi / 2) / (N sin(pi psi / 2))|^2 with
/// psi = cos(theta_true) - cos(theta_point). This is the Dirichlet-kernel
/// route, implemented here independently of the phasor sum used in
/// production so the two derivations check each other.
double dirichlet_gain(double theta_true, double theta_point, int n) {
    const double psi = std::cos(theta_true) - std::cos(theta_point);
    const double den = std::sin(M_PI * psi / 2.0);
    if (den == 0.0) return 1.0; // aligned (psi a multiple of 2): limit value
    const double num = std::sin(n * M_PI * psi / 2.0);
    const double ratio = num / (n * den);
    return ratio * ratio;
}

} // namespace

TEST_CASE("dB and dBm conversions at round values", "[channel]") {
    REQUIRE_THAT(db_to_linear(0.0), Catch::Matchers::WithinRel(1.0, 1e-15));
    REQUIRE_THAT(db_to_linear(-65.0),
                 Catch::Matchers::WithinRel(3.1622776601683794e-07, 1e-14));
    REQUIRE_THAT(dbm_to_watts(20.0), Catch::Matchers::WithinRel(0.1, 1e-14));
    REQUIRE_THAT(dbm_to_watts(-80.0), Catch::Matchers::WithinRel(1e-11, 1e-14));
    REQUIRE_THAT(watts_to_dbm(0.1), Catch::Matchers::WithinAbs(20.0, 1e-12));
    REQUIRE_THAT(linear_to_db(db_to_linear(-7.3)),
                 Catch::Matchers::WithinAbs(-7.3, 1e-12));
}

TEST_CASE("steering vectors are unit norm to 1e-12", "[channel]") {
    for (double theta : {0.01, 0.38, 1.0, M_PI / 2, 2.6, 3.1}) {
        const SteeringVector a = tx_steering(theta, 32);
        REQUIRE(a.entries.size() == 32);
        double norm_sq = 0.0;
        for (const auto& e : a.entries) norm_sq += std::norm(e);
        REQUIRE_THAT(norm_sq, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("steering entry m carries phase -pi m cos(theta)", "[channel]") {
    const double theta = 0.38;
    const SteeringVector a = tx_steering(theta, 8);
    const double scale = 1.0 / std::sqrt(8.0);
    for (int m = 0; m < 8; ++m) {
        const std::complex<double> want = std::polar(scale, -M_PI * m * std::cos(theta));
        REQUIRE_THAT(a.entries[m].real(),
                     Catch::Matchers::WithinAbs(want.real(), 1e-15));
        REQUIRE_THAT(a.entries[m].imag(),
                     Catch::Matchers::WithinAbs(want.imag(), 1e-15));
    }
}

TEST_CASE("alignment gain is 1 when pointed at the true angle", "[channel]") {
    for (double theta : {0.1, 0.3805063771123649, 1.5707963267948966, 3.0})
        REQUIRE_THAT(beam_alignment_gain(theta, theta, 32),
                     Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("phasor-sum gain equals the Dirichlet closed form", "[channel]") {
    RandomStream rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const double t = rng.uniform(0.0, M_PI);
        const double p = rng.uniform(0.0, M_PI);
        const double got = beam_alignment_gain(t, p, 32);
        REQUIRE_THAT(got, Catch::Matchers::WithinAbs(dirichlet_gain(t, p, 32), 1e-12));
    }
    // a near-aligned pair exercises the small-psi regime of both routes
    REQUIRE_THAT(beam_alignment_gain(0.7, 0.7 + 1e-9, 32),
                 Catch::Matchers::WithinAbs(dirichlet_gain(0.7, 0.7 + 1e-9, 32), 1e-12));
}

TEST_CASE("alignment gain at frozen reference points", "[channel]") {
    // 40-digit reference evaluation of the closed form:
    //   gain(0.9, 1.1, N=32)                  = 0.0098912382212446725
    //   gain(0.3805063771123649, 0.40, N=32)  = 0.95457766806277555
    REQUIRE_THAT(beam_alignment_gain(0.9, 1.1, 32),
                 Catch::Matchers::WithinRel(0.0098912382212446725, 1e-12));
    REQUIRE_THAT(beam_alignment_gain(0.3805063771123649, 0.40, 32),
                 Catch::Matchers::WithinRel(0.95457766806277555, 1e-12));
}

TEST_CASE("gain decays monotonically across the mainlobe", "[channel]") {
    // At broadside, the first null sits at |psi| = 2/N; the gain must fall
    // monotonically from alignment to the null.
    const double theta = M_PI / 2;
    double prev = 1.0;
    for (int s = 1; s <= 8; ++s) {
        const double psi = (2.0 / 32.0) * s / 8.0 * 0.999;
        const double g = beam_alignment_gain(theta, std::acos(std::cos(theta) - psi), 32);
        REQUIRE(g < prev);
        prev = g;
    }
}

TEST_CASE("well-separated beams are nearly orthogonal at large N", "[channel]") {
    REQUIRE(beam_alignment_gain(1.0, 2.0, 256) < 1e-3);
    REQUIRE(beam_alignment_gain(0.4, 2.8, 512) < 1e-3);
}

TEST_CASE("path loss matches the power law at frozen points", "[channel]") {
    ChannelParams params;
    // alpha_0 (d/d_0)^-3 at d = 26.9258 m, alpha_0 = 10^-6.5, d_0 = 1 m,
    // from a 40-digit reference evaluation
    REQUIRE_THAT(path_loss(26.9258, params),
                 Catch::Matchers::WithinRel(1.6199221850644447e-11, 1e-13));
    REQUIRE_THAT(path_loss(1.0, params),
                 Catch::Matchers::WithinRel(params.ref_path_loss, 1e-15));
    REQUIRE(path_loss(20.0, params) > path_loss(30.0, params));
    REQUIRE_THAT(path_loss(2.0, params) / path_loss(4.0, params),
                 Catch::Matchers::WithinRel(8.0, 1e-12));
}

TEST_CASE("path loss rejects non-positive distance", "[channel]") {
    ChannelParams params;
    REQUIRE_THROWS_AS(path_loss(0.0, params), std::invalid_argument);
    REQUIRE_THROWS_AS(path_loss(-3.0, params), std::invalid_argument);
}

TEST_CASE("aligned user SNR at the frozen anchor geometry", "[channel]") {
    ChannelParams params;
    // p Nt alpha / sigma^2 = 0.0125 * 32 * 1.6199221850644447e-11 / 1e-11,
    // from a 40-digit reference evaluation
    REQUIRE_THAT(user_snr(0.38, 0.38, 26.9258, 0.0125, params),
                 Catch::Matchers::WithinRel(0.64796887402577787, 1e-12));
}

TEST_CASE("sum rate of 8 aligned users equals the analytic anchor", "[channel]") {
    ChannelParams params;
    const std::vector<double> thetas(8, 0.3805063771123649);
    const std::vector<double> dists(8, 26.9258);
    const std::vector<double> powers(8, 0.1 / 8.0);
    // 8 log2(1 + 0.64796887402577787) from a 40-digit reference evaluation
    REQUIRE_THAT(sum_rate(thetas, thetas, dists, powers, params),
                 Catch::Matchers::WithinAbs(5.7655119512723311, 1e-9));
}

TEST_CASE("sum rate rejects ragged inputs", "[channel]") {
    ChannelParams params;
    const std::vector<double> a(8, 0.4), b(7, 0.4), d(8, 26.0), p(8, 0.0125);
    REQUIRE_THROWS_AS(sum_rate(a, b, d, p, params), std::invalid_argument);
}

TEST_CASE("single-user SINR reduces to the SNR form", "[channel]") {
    ChannelParams params;
    const double theta = 0.7, d = 25.0, p = 0.0125;
    const std::vector<double> thetas{theta};
    const std::vector<double> dists{d};
    std::vector<BeamVector> beams{beamformer_from_angle(theta, p, params)};
    REQUIRE_THAT(user_sinr(0, thetas, beams, dists, params),
                 Catch::Matchers::WithinRel(user_snr(theta, theta, d, p, params), 1e-12));
}

TEST_CASE("co-located interferer with an identical beam halves the SINR denominator",
          "[channel]") {
    ChannelParams params;
    const double theta = 0.9, d = 27.0, p = 0.0125;
    const std::vector<double> thetas{theta, theta};
    const std::vector<double> dists{d, d};
    std::vector<BeamVector> beams{beamformer_from_angle(theta, p, params),
                                  beamformer_from_angle(theta, p, params)};
    const double s = user_snr(theta, theta, d, p, params) * params.noise_power;
    REQUIRE_THAT(user_sinr(0, thetas, beams, dists, params),
                 Catch::Matchers::WithinRel(s / (s + params.noise_power), 1e-12));
}

TEST_CASE("beamformer carries power p in its squared norm", "[channel]") {
    ChannelParams params;
    const BeamVector w = beamformer_from_angle(0.38, 0.0125, params);
    REQUIRE(w.entries.size() == 32);
    double norm_sq = 0.0;
    for (const auto& e : w.entries) norm_sq += std::norm(e);
    REQUIRE_THAT(norm_sq, Catch::Matchers::WithinRel(0.0125, 1e-12));
    REQUIRE(w.power == 0.0125);
}

TEST_CASE("channel inputs are validated", "[channel]") {
    REQUIRE_THROWS_AS(tx_steering(std::nan(""), 32), std::invalid_argument);
    REQUIRE_THROWS_AS(tx_steering(0.4, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(beam_alignment_gain(0.4, std::nan(""), 32),
                      std::invalid_argument);
    ChannelParams params;
    REQUIRE_THROWS_AS(user_snr(0.4, 0.4, 25.0, -1.0, params), std::invalid_argument);
    params.noise_power = 0.0;
    REQUIRE_THROWS_AS(params.validate(), std::invalid_argument);
}
