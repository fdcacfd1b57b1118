#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "predbeam/config.hpp"
#include "predbeam/evaluation.hpp"
#include "predbeam/textio.hpp"
#include "predbeam/version.hpp"

namespace predbeam {

inline constexpr const char* kResultsCsvHeader =
    "nmse,power_dbm,method,mean_sum_rate,std_sum_rate,realizations,seed";

/// Rows sorted by (method, nmse, power_dbm); numbers in shortest exact
/// decimal form, so a read-back reproduces every field bit-for-bit.
inline void write_results_csv(std::ostream& os, std::vector<SweepResult> results) {
    std::sort(results.begin(), results.end(),
              [](const SweepResult& a, const SweepResult& b) {
                  return std::tie(a.method, a.nmse, a.power_dbm) <
                         std::tie(b.method, b.nmse, b.power_dbm);
              });
    os << kResultsCsvHeader << "\n";
    for (const SweepResult& r : results) {
        os << format_double(r.nmse) << "," << format_double(r.power_dbm) << ","
           << r.method << "," << format_double(r.mean_sum_rate) << ","
           << format_double(r.std_sum_rate) << "," << r.realizations << ","
           << r.seed << "\n";
    }
}

inline std::vector<SweepResult> read_results_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kResultsCsvHeader)
        throw std::runtime_error("bad results CSV header");
    std::vector<SweepResult> out;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(trim(line), ',');
        if (fields.size() != 7)
            throw std::runtime_error("results CSV row needs 7 fields: " + line);
        SweepResult r;
        unsigned long long realizations = 0, seed = 0;
        if (!parse_double(fields[0], r.nmse) || !parse_double(fields[1], r.power_dbm) ||
            !parse_double(fields[3], r.mean_sum_rate) ||
            !parse_double(fields[4], r.std_sum_rate) ||
            !parse_u64(fields[5], realizations) || !parse_u64(fields[6], seed))
            throw std::runtime_error("bad numeric field in results CSV row: " + line);
        r.method = std::string(trim(fields[2]));
        r.realizations = static_cast<std::size_t>(realizations);
        r.seed = seed;
        out.push_back(std::move(r));
    }
    return out;
}

/// Writes <name>.csv plus the resolved config snapshot and a run manifest
/// into out_dir. Nothing in these files depends on wall-clock time, so
/// repeat runs with the same config and seed are byte-identical.
inline std::filesystem::path emit_results(std::vector<SweepResult> results,
                                          const std::filesystem::path& out_dir,
                                          const std::string& name,
                                          const ExperimentConfig& cfg,
                                          const std::string& command) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path csv_path = out_dir / (name + ".csv");
    {
        std::ofstream os(csv_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + csv_path.string());
        write_results_csv(os, std::move(results));
        if (!os) throw std::runtime_error("failed writing " + csv_path.string());
    }
    {
        std::ofstream os(out_dir / "config.txt", std::ios::binary);
        if (!os) throw std::runtime_error("cannot open config snapshot");
        os << serialize_config(cfg);
    }
    {
        std::ofstream os(out_dir / "manifest.txt", std::ios::binary);
        if (!os) throw std::runtime_error("cannot open run manifest");
        os << "tool = predbeam\n";
        os << "version = " << kVersion << "\n";
        os << "command = " << command << "\n";
        os << "seed = " << cfg.seed << "\n";
        os << "output = " << (name + ".csv") << "\n";
        os << "\n# resolved configuration\n";
        os << serialize_config(cfg);
    }
    return csv_path;
}

} // namespace predbeam
