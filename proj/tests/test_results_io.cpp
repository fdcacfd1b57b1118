#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "predbeam/results_io.hpp"

using namespace predbeam;

namespace {

SweepResult make_row(double nmse, double power, const char* method, double mean) {
    SweepResult r;
    r.nmse = nmse;
    r.power_dbm = power;
    r.method = method;
    r.mean_sum_rate = mean;
    r.std_sum_rate = mean / 10.0;
    r.realizations = 200;
    r.seed = 1;
    return r;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("rows are sorted by method then nmse then power", "[results_io]") {
    std::vector<SweepResult> rows{
        make_row(0.7, 25.0, "perfect", 6.0),
        make_row(0.7, 5.0, "perfect", 4.0),
        make_row(0.3, 20.0, "clrnet", 5.0),
        make_row(0.7, 20.0, "model-based", 2.0),
        make_row(0.1, 20.0, "clrnet", 5.2),
    };
    std::ostringstream os;
    write_results_csv(os, rows);
    const std::string text = os.str();

    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    REQUIRE(line == kResultsCsvHeader);
    std::vector<std::string> data_lines;
    while (std::getline(is, line)) data_lines.push_back(line);
    REQUIRE(data_lines.size() == 5);
    REQUIRE(data_lines[0].starts_with("0.1,20,clrnet,"));
    REQUIRE(data_lines[1].starts_with("0.3,20,clrnet,"));
    REQUIRE(data_lines[2].starts_with("0.7,20,model-based,"));
    REQUIRE(data_lines[3].starts_with("0.7,5,perfect,"));
    REQUIRE(data_lines[4].starts_with("0.7,25,perfect,"));
}

TEST_CASE("write then read reproduces every field bit for bit", "[results_io]") {
    // already in canonical (method, nmse, power) order so the writer's sort
    // is the identity and the comparison below can stay positional
    std::vector<SweepResult> rows{
        make_row(0.1, 20.0, "clrnet", 5.765511951272331),
        make_row(0.2, 20.0, "model-based", 1.0 / 3.0),
        make_row(0.3, 20.0, "perfect", 1e-300),
    };
    rows[2].std_sum_rate = 0.1 + 0.2; // a value needing all 17 digits

    std::ostringstream os;
    write_results_csv(os, rows);
    std::istringstream is(os.str());
    const std::vector<SweepResult> back = read_results_csv(is);

    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(back[i].nmse == rows[i].nmse);
        REQUIRE(back[i].power_dbm == rows[i].power_dbm);
        REQUIRE(back[i].method == rows[i].method);
        REQUIRE(back[i].mean_sum_rate == rows[i].mean_sum_rate);
        REQUIRE(back[i].std_sum_rate == rows[i].std_sum_rate);
        REQUIRE(back[i].realizations == rows[i].realizations);
        REQUIRE(back[i].seed == rows[i].seed);
    }
}

TEST_CASE("malformed csv input is rejected", "[results_io]") {
    SECTION("wrong header") {
        std::istringstream is("nmse,power_dbm,method\n");
        REQUIRE_THROWS_AS(read_results_csv(is), std::runtime_error);
    }
    SECTION("wrong field count") {
        std::istringstream is(std::string(kResultsCsvHeader) +
                              "\n0.1,20,perfect,5.0,0.5,200\n");
        REQUIRE_THROWS_AS(read_results_csv(is), std::runtime_error);
    }
    SECTION("non-numeric field") {
        std::istringstream is(std::string(kResultsCsvHeader) +
                              "\n0.1,20,perfect,five,0.5,200,1\n");
        REQUIRE_THROWS_AS(read_results_csv(is), std::runtime_error);
    }
    SECTION("blank lines are tolerated") {
        std::istringstream is(std::string(kResultsCsvHeader) +
                              "\n\n0.1,20,perfect,5,0.5,200,1\n\n");
        REQUIRE(read_results_csv(is).size() == 1);
    }
}

TEST_CASE("emit_results writes csv, config snapshot, and manifest", "[results_io]") {
    const std::filesystem::path dir = "results_io_test_tmp";
    std::filesystem::remove_all(dir);
    ExperimentConfig cfg;
    cfg.seed = 42;
    const std::vector<SweepResult> rows{make_row(0.7, 20.0, "perfect", 5.3)};

    const std::filesystem::path csv =
        emit_results(rows, dir, "sweep-nmse", cfg, "sweep-nmse --seed 42");
    REQUIRE(csv == dir / "sweep-nmse.csv");
    REQUIRE(std::filesystem::exists(dir / "config.txt"));
    REQUIRE(std::filesystem::exists(dir / "manifest.txt"));

    const std::string manifest = read_file(dir / "manifest.txt");
    REQUIRE(manifest.starts_with("tool = predbeam\n"));
    REQUIRE(manifest.find("version = ") != std::string::npos);
    REQUIRE(manifest.find("command = sweep-nmse --seed 42\n") != std::string::npos);
    REQUIRE(manifest.find("seed = 42\n") != std::string::npos);
    REQUIRE(manifest.find("output = sweep-nmse.csv\n") != std::string::npos);
    REQUIRE(manifest.find("# resolved configuration\n") != std::string::npos);
    REQUIRE(manifest.find("num_vehicles = 8\n") != std::string::npos);

    REQUIRE(read_file(dir / "config.txt") == serialize_config(cfg));

    // a second emission with identical inputs is byte-identical
    const std::string csv_first = read_file(csv);
    const std::string manifest_first = manifest;
    emit_results(rows, dir, "sweep-nmse", cfg, "sweep-nmse --seed 42");
    REQUIRE(read_file(csv) == csv_first);
    REQUIRE(read_file(dir / "manifest.txt") == manifest_first);

    std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting round trips exactly", "[textio]") {
    for (double v : {1.0 / 3.0, 0.1, 1e-300, 1e300, 5.765511951272331,
                     -0.0001234567890123456, 0.0, 42.0}) {
        double back = 0.0;
        REQUIRE(parse_double(format_double(v), back));
        REQUIRE(back == v);
    }
    REQUIRE(format_double(0.5) == "0.5");
    REQUIRE(format_double(42.0) == "42");
}

TEST_CASE("strict numeric parsing", "[textio]") {
    double d = 0.0;
    REQUIRE(parse_double("1.5", d));
    REQUIRE(d == 1.5);
    REQUIRE(parse_double("  -2e-3 ", d));
    REQUIRE(d == -2e-3);
    REQUIRE_FALSE(parse_double("abc", d));
    REQUIRE_FALSE(parse_double("1.5x", d));
    REQUIRE_FALSE(parse_double("", d));
    REQUIRE_FALSE(parse_double("   ", d));

    unsigned long long u = 0;
    REQUIRE(parse_u64("18446744073709551615", u));
    REQUIRE(u == 18446744073709551615ULL);
    REQUIRE_FALSE(parse_u64("-1", u));
    REQUIRE_FALSE(parse_u64("12.5", u));
    REQUIRE_FALSE(parse_u64("", u));
    REQUIRE_FALSE(parse_u64("18446744073709551616", u)); // one past max
}

TEST_CASE("trim and split behave on edge cases", "[textio]") {
    REQUIRE(trim("  a b \t\n") == "a b");
    REQUIRE(trim("") == "");
    REQUIRE(trim(" \t ") == "");
    REQUIRE(split_fields("a,b,c", ',') ==
            std::vector<std::string>{"a", "b", "c"});
    REQUIRE(split_fields("a,,c", ',') == std::vector<std::string>{"a", "", "c"});
    REQUIRE(split_fields("", ',') == std::vector<std::string>{""});
}
