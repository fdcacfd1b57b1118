#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "predbeam/sensing.hpp"

using namespace predbeam;

TEST_CASE("noise model keeps sigma_E^2 = rho * E[theta^2]", "[sensing]") {
    const NoiseModel nm = NoiseModel::from_second_moment(0.7, 0.1448);
    REQUIRE(nm.nmse == 0.7);
    REQUIRE(nm.angle_second_moment == 0.1448);
    REQUIRE_THAT(nm.sigma_e * nm.sigma_e,
                 Catch::Matchers::WithinRel(0.7 * 0.1448, 1e-14));
    REQUIRE(NoiseModel::from_second_moment(0.0, 0.1448).sigma_e == 0.0);
    REQUIRE_THROWS_AS(NoiseModel::from_second_moment(-0.1, 0.1),
                      std::invalid_argument);
}

TEST_CASE("calibration averages squared samples", "[sensing]") {
    const std::vector<double> samples{0.3, 0.4, 0.5};
    const NoiseModel nm = calibrate_noise(0.6, samples);
    // (0.09 + 0.16 + 0.25)/3 = 1/6; sqrt(0.6/6) = sqrt(0.1)
    REQUIRE_THAT(nm.angle_second_moment,
                 Catch::Matchers::WithinRel(0.16666666666666666, 1e-15));
    REQUIRE_THAT(nm.sigma_e,
                 Catch::Matchers::WithinRel(0.31622776601683794, 1e-14));
    REQUIRE_THROWS_AS(calibrate_noise(0.6, std::vector<double>{}),
                      std::invalid_argument);
}

TEST_CASE("applying noise is exactly true + sigma_E z", "[sensing]") {
    const NoiseModel nm = NoiseModel::from_second_moment(0.5, 0.2);
    const std::vector<double> truth{0.3, 0.4, 0.5};
    const std::vector<double> z{1.0, -2.0, 0.25};
    const std::vector<double> est = apply_estimation_noise(truth, nm, z);
    for (std::size_t k = 0; k < truth.size(); ++k)
        REQUIRE(est[k] == truth[k] + nm.sigma_e * z[k]);
    REQUIRE_THROWS_AS(
        apply_estimation_noise(truth, nm, std::vector<double>{1.0}),
        std::invalid_argument);
}

TEST_CASE("estimates are deliberately not clamped to [0, pi]", "[sensing]") {
    const NoiseModel nm = NoiseModel::from_second_moment(1.0, 1.0); // sigma = 1
    const std::vector<double> truth{3.0};
    const std::vector<double> z{2.0};
    REQUIRE(apply_estimation_noise(truth, nm, z)[0] == 5.0);
}

TEST_CASE("zero NMSE reproduces the truth bit-for-bit", "[sensing]") {
    const NoiseModel nm = NoiseModel::from_second_moment(0.0, 0.1448);
    RandomStream rng(41);
    const std::vector<double> truth{0.37, 0.38, 0.39, 0.40};
    REQUIRE(estimate_angles(truth, nm, rng) == truth);
}

TEST_CASE("estimation errors match the calibrated spread", "[sensing]") {
    const NoiseModel nm = NoiseModel::from_second_moment(0.9, 0.1);
    RandomStream rng(43);
    const std::vector<double> truth(10, 0.38);
    const int reps = 5000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < reps; ++i) {
        const std::vector<double> est = estimate_angles(truth, nm, rng);
        for (std::size_t k = 0; k < truth.size(); ++k) {
            const double e = est[k] - truth[k];
            acc += e;
            acc2 += e * e;
        }
    }
    const double n = 10.0 * reps;
    REQUIRE_THAT(acc / n, Catch::Matchers::WithinAbs(0.0, 0.01));
    REQUIRE_THAT(acc2 / n, Catch::Matchers::WithinRel(0.09, 0.03));
}

TEST_CASE("history columns run most-recent-first", "[sensing]") {
    // estimates_by_slot[s][k] = 100 s + k makes every cell unique
    std::vector<std::vector<double>> est(5);
    for (std::size_t s = 0; s < 5; ++s) {
        est[s].resize(3);
        for (std::size_t k = 0; k < 3; ++k) est[s][k] = 100.0 * s + k;
    }
    const AngleHistory h = assemble_history(est, 4, 3);
    REQUIRE(h.num_vehicles == 3);
    REQUIRE(h.window == 3);
    REQUIRE(h.slot_index == 4);
    REQUIRE(h.values.size() == 9);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k)
            REQUIRE(h.at(k, j) == 100.0 * (4 - 1 - j) + k);
}

TEST_CASE("history assembly rejects short or ragged inputs", "[sensing]") {
    std::vector<std::vector<double>> est(4, std::vector<double>(3, 0.4));
    REQUIRE_THROWS_AS(assemble_history(est, 2, 3), not_enough_history_error);
    REQUIRE_THROWS_AS(assemble_history(est, 5, 3), not_enough_history_error);
    REQUIRE_THROWS_AS(assemble_history(est, 4, 0), std::invalid_argument);
    est[1].resize(2);
    REQUIRE_THROWS_AS(assemble_history(est, 4, 3), std::invalid_argument);
}
