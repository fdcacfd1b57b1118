#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "predbeam/checkpoint.hpp"
#include "predbeam/rng.hpp"

using namespace predbeam;

namespace {

Checkpoint sample_checkpoint() {
    Checkpoint c;
    c.arch.num_vehicles = 5;
    c.arch.window = 3;
    c.arch.conv_filters = 2;
    c.arch.lstm_hidden = 4;
    c.standardize = true;
    c.input_mean = 0.41;
    c.input_std = 0.12345678901234567;
    c.output_mean = -0.03;
    c.output_std = 1.0 / 3.0;
    c.seed = 123456789012345ULL;
    c.nmse = 0.7;
    c.angle_second_moment = 0.1448;
    c.iterations = 15000;
    RandomStream rng(17);
    c.params = init_params(c.arch, rng);
    for (auto* t : c.params.tensors())
        for (double& v : *t) v += rng.gaussian(0.0, 1e-3);
    return c;
}

std::string to_text(const Checkpoint& c) {
    std::ostringstream os;
    save_checkpoint(os, c);
    return os.str();
}

} // namespace

TEST_CASE("round trip preserves every field and tensor", "[checkpoint]") {
    const Checkpoint c = sample_checkpoint();
    std::istringstream is(to_text(c));
    const Checkpoint r = load_checkpoint(is);

    REQUIRE(r.arch == c.arch);
    REQUIRE(r.standardize == c.standardize);
    REQUIRE(r.input_mean == c.input_mean);
    REQUIRE(r.input_std == c.input_std);
    REQUIRE(r.output_mean == c.output_mean);
    REQUIRE(r.output_std == c.output_std);
    REQUIRE(r.seed == c.seed);
    REQUIRE(r.nmse == c.nmse);
    REQUIRE(r.angle_second_moment == c.angle_second_moment);
    REQUIRE(r.iterations == c.iterations);
    auto ct = c.params.tensors();
    auto rt = r.params.tensors();
    for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i)
        REQUIRE(*rt[i] == *ct[i]);
}

TEST_CASE("save load save is byte identical", "[checkpoint]") {
    const Checkpoint c = sample_checkpoint();
    const std::string first = to_text(c);
    std::istringstream is(first);
    const std::string second = to_text(load_checkpoint(is));
    REQUIRE(first == second);
}

TEST_CASE("text layout is self describing", "[checkpoint]") {
    const std::string text = to_text(sample_checkpoint());
    REQUIRE(text.starts_with("predbeam checkpoint v1\n"));
    REQUIRE(text.find("num_vehicles = 5\n") != std::string::npos);
    REQUIRE(text.find("standardize = 1\n") != std::string::npos);
    REQUIRE(text.find("iterations = 15000\n") != std::string::npos);
    REQUIRE(text.find("tensor conv_w 2 2 2\n") != std::string::npos);
    REQUIRE(text.find("tensor lstm_wi 4 4\n") != std::string::npos);
    REQUIRE(text.find("tensor fc_b 5\n") != std::string::npos);
}

TEST_CASE("file overloads round trip through disk", "[checkpoint]") {
    const Checkpoint c = sample_checkpoint();
    const std::string path = "checkpoint_test_tmp.txt";
    save_checkpoint(path, c);
    const Checkpoint r = load_checkpoint(path);
    REQUIRE(r.seed == c.seed);
    REQUIRE(r.params.fc_w == c.params.fc_w);
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(load_checkpoint(path), checkpoint_error);
}

TEST_CASE("malformed inputs raise checkpoint_error", "[checkpoint]") {
    const Checkpoint c = sample_checkpoint();
    const std::string good = to_text(c);

    SECTION("bad magic") {
        std::istringstream is("predbeam checkpoint v2\n" +
                              good.substr(good.find('\n') + 1));
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("metadata line without equals sign") {
        std::string text = good;
        text.insert(text.find("window"), "garbage line\n");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("duplicate metadata key") {
        std::string text = good;
        text.insert(text.find("window"), "num_vehicles = 5\n");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("unknown metadata key") {
        std::string text = good;
        text.insert(text.find("window"), "flux_capacitance = 1.21\n");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("missing metadata key") {
        std::string text = good;
        const std::size_t pos = text.find("seed = ");
        text.erase(pos, text.find('\n', pos) - pos + 1);
        std::istringstream is(text);
        REQUIRE_THROWS_MATCHES(
            load_checkpoint(is), checkpoint_error,
            Catch::Matchers::MessageMatches(
                Catch::Matchers::ContainsSubstring("missing metadata key: seed")));
    }
    SECTION("non-numeric metadata value") {
        std::string text = good;
        const std::size_t pos = text.find("nmse = ");
        text.replace(pos, text.find('\n', pos) - pos, "nmse = zero point seven");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("invalid architecture") {
        std::string text = good;
        const std::size_t pos = text.find("num_vehicles = 5");
        text.replace(pos, std::string("num_vehicles = 5").size(), "num_vehicles = 2");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("wrong tensor shape") {
        std::string text = good;
        const std::size_t pos = text.find("tensor conv_w 2 2 2");
        text.replace(pos, std::string("tensor conv_w 2 2 2").size(),
                     "tensor conv_w 2 2 3");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("tensor out of order") {
        std::string text = good;
        const std::size_t pos = text.find("tensor conv_w");
        text.replace(pos, std::string("tensor conv_w").size(), "tensor conv_b");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("truncated tensor data") {
        // drop the final data line, leaving the fc_b header without values
        std::istringstream is(good.substr(0, good.rfind('\n', good.size() - 2) + 1));
        REQUIRE_THROWS_MATCHES(
            load_checkpoint(is), checkpoint_error,
            Catch::Matchers::MessageMatches(
                Catch::Matchers::ContainsSubstring("truncated tensor data")));
    }
    SECTION("missing tensor block") {
        std::istringstream is(good.substr(0, good.rfind("tensor fc_b")));
        REQUIRE_THROWS_MATCHES(
            load_checkpoint(is), checkpoint_error,
            Catch::Matchers::MessageMatches(
                Catch::Matchers::ContainsSubstring("missing tensor block: fc_b")));
    }
    SECTION("bad tensor value") {
        std::string text = good;
        const std::size_t pos = text.find("tensor conv_b 2\n");
        const std::size_t vpos = pos + std::string("tensor conv_b 2\n").size();
        text.replace(vpos, text.find('\n', vpos) - vpos, "0.5 oops");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("trailing data after the last tensor") {
        std::istringstream is(good + "leftover\n");
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("extra tensor block") {
        std::istringstream is(good + "tensor fc_b 5\n0 0 0 0 0\n");
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
    SECTION("standardize flag outside 0 or 1") {
        std::string text = good;
        const std::size_t pos = text.find("standardize = 1");
        text.replace(pos, std::string("standardize = 1").size(), "standardize = 2");
        std::istringstream is(text);
        REQUIRE_THROWS_AS(load_checkpoint(is), checkpoint_error);
    }
}

TEST_CASE("saving mismatched shapes is rejected", "[checkpoint]") {
    Checkpoint c = sample_checkpoint();
    c.params.fc_b.push_back(0.0);
    std::ostringstream os;
    REQUIRE_THROWS_AS(save_checkpoint(os, c), checkpoint_error);
}
