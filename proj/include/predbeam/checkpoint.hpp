#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "predbeam/clrnet.hpp"
#include "predbeam/errors.hpp"
#include "predbeam/textio.hpp"

namespace predbeam {

/// Trained model plus the metadata needed to reproduce its input pipeline
/// at inference time.
struct Checkpoint {
    ClrnetArch arch;
    bool standardize = true;
    double input_mean = 0.0;
    double input_std = 1.0;
    double output_mean = 0.0;
    double output_std = 1.0;
    std::uint64_t seed = 0;
    double nmse = 0.0;
    double angle_second_moment = 0.0;
    std::uint64_t iterations = 0;
    ClrnetParams params;
};

inline constexpr const char* kCheckpointMagic = "predbeam checkpoint v1";

/// Plain-text format: a magic line, `key = value` metadata, then one
/// `tensor <name> <dims...>` header per tensor followed by its values,
/// eight per line, shortest-round-trip decimal. save -> load -> save is
/// byte-identical.
inline void save_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
    if (!shapes_match(ckpt.params, ckpt.arch))
        throw checkpoint_error("save_checkpoint: parameter shapes do not match arch");
    os << kCheckpointMagic << "\n";
    os << "num_vehicles = " << ckpt.arch.num_vehicles << "\n";
    os << "window = " << ckpt.arch.window << "\n";
    os << "conv_filters = " << ckpt.arch.conv_filters << "\n";
    os << "lstm_hidden = " << ckpt.arch.lstm_hidden << "\n";
    os << "standardize = " << (ckpt.standardize ? 1 : 0) << "\n";
    os << "input_mean = " << format_double(ckpt.input_mean) << "\n";
    os << "input_std = " << format_double(ckpt.input_std) << "\n";
    os << "output_mean = " << format_double(ckpt.output_mean) << "\n";
    os << "output_std = " << format_double(ckpt.output_std) << "\n";
    os << "seed = " << ckpt.seed << "\n";
    os << "nmse = " << format_double(ckpt.nmse) << "\n";
    os << "angle_second_moment = " << format_double(ckpt.angle_second_moment) << "\n";
    os << "iterations = " << ckpt.iterations << "\n";

    auto names = ClrnetParams::tensor_names();
    auto shapes = ClrnetParams::tensor_shapes(ckpt.arch);
    auto ts = ckpt.params.tensors();
    for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i) {
        os << "tensor " << names[i];
        for (std::size_t d : shapes[i]) os << " " << d;
        os << "\n";
        const auto& v = *ts[i];
        for (std::size_t j = 0; j < v.size(); ++j) {
            os << format_double(v[j]);
            os << (((j + 1) % 8 == 0 || j + 1 == v.size()) ? "\n" : " ");
        }
    }
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw checkpoint_error("cannot open checkpoint file for writing: " + path);
    save_checkpoint(os, ckpt);
    if (!os) throw checkpoint_error("failed to write checkpoint file: " + path);
}

inline Checkpoint load_checkpoint(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kCheckpointMagic)
        throw checkpoint_error("bad checkpoint magic line");

    std::map<std::string, std::string> meta;
    std::string pending_tensor_line;
    while (std::getline(is, line)) {
        const std::string_view t = trim(line);
        if (t.empty()) continue;
        if (t.starts_with("tensor ")) {
            pending_tensor_line = std::string(t);
            break;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            throw checkpoint_error("malformed metadata line: " + std::string(t));
        const std::string key(trim(t.substr(0, eq)));
        const std::string value(trim(t.substr(eq + 1)));
        if (!meta.emplace(key, value).second)
            throw checkpoint_error("duplicate metadata key: " + key);
    }

    auto need = [&meta](const char* key) -> const std::string& {
        auto it = meta.find(key);
        if (it == meta.end())
            throw checkpoint_error(std::string("missing metadata key: ") + key);
        return it->second;
    };
    auto need_u64 = [&need](const char* key) {
        unsigned long long v = 0;
        if (!parse_u64(need(key), v))
            throw checkpoint_error(std::string("bad integer for key: ") + key);
        return static_cast<std::uint64_t>(v);
    };
    auto need_f64 = [&need](const char* key) {
        double v = 0.0;
        if (!parse_double(need(key), v))
            throw checkpoint_error(std::string("bad number for key: ") + key);
        return v;
    };

    Checkpoint ckpt;
    ckpt.arch.num_vehicles = need_u64("num_vehicles");
    ckpt.arch.window = need_u64("window");
    ckpt.arch.conv_filters = need_u64("conv_filters");
    ckpt.arch.lstm_hidden = need_u64("lstm_hidden");
    const std::uint64_t std_flag = need_u64("standardize");
    if (std_flag > 1) throw checkpoint_error("standardize must be 0 or 1");
    ckpt.standardize = std_flag == 1;
    ckpt.input_mean = need_f64("input_mean");
    ckpt.input_std = need_f64("input_std");
    ckpt.output_mean = need_f64("output_mean");
    ckpt.output_std = need_f64("output_std");
    ckpt.seed = need_u64("seed");
    ckpt.nmse = need_f64("nmse");
    ckpt.angle_second_moment = need_f64("angle_second_moment");
    ckpt.iterations = need_u64("iterations");

    static const char* kKnownKeys[] = {
        "num_vehicles", "window", "conv_filters", "lstm_hidden", "standardize",
        "input_mean", "input_std", "output_mean", "output_std", "seed", "nmse",
        "angle_second_moment", "iterations"};
    for (const auto& [key, value] : meta) {
        bool known = false;
        for (const char* k : kKnownKeys) known = known || key == k;
        if (!known) throw checkpoint_error("unknown metadata key: " + key);
    }
    try {
        ckpt.arch.validate();
    } catch (const std::invalid_argument& e) {
        throw checkpoint_error(std::string("invalid architecture in checkpoint: ") + e.what());
    }

    ckpt.params = zeros_like(ckpt.arch);
    auto names = ClrnetParams::tensor_names();
    auto shapes = ClrnetParams::tensor_shapes(ckpt.arch);
    auto ts = ckpt.params.tensors();

    for (std::size_t i = 0; i < ClrnetParams::kTensorCount; ++i) {
        if (pending_tensor_line.empty())
            throw checkpoint_error(std::string("missing tensor block: ") + names[i]);
        std::istringstream header(pending_tensor_line);
        std::string kw, name;
        header >> kw >> name;
        if (kw != "tensor" || name != names[i])
            throw checkpoint_error("expected tensor " + std::string(names[i]) +
                                   ", found: " + pending_tensor_line);
        std::vector<std::size_t> dims;
        unsigned long long d = 0;
        while (header >> d) dims.push_back(static_cast<std::size_t>(d));
        if (dims != shapes[i])
            throw checkpoint_error("tensor " + name + " has unexpected shape");

        auto& v = *ts[i];
        std::size_t filled = 0;
        pending_tensor_line.clear();
        while (filled < v.size()) {
            if (!std::getline(is, line))
                throw checkpoint_error("truncated tensor data: " + name);
            for (const std::string& field : split_fields(trim(line), ' ')) {
                if (field.empty()) continue;
                if (filled >= v.size())
                    throw checkpoint_error("too many values for tensor: " + name);
                if (!parse_double(field, v[filled]))
                    throw checkpoint_error("bad value in tensor " + name + ": " + field);
                ++filled;
            }
        }
        while (std::getline(is, line)) {
            const std::string_view t = trim(line);
            if (t.empty()) continue;
            if (!t.starts_with("tensor "))
                throw checkpoint_error("unexpected trailing data: " + std::string(t));
            pending_tensor_line = std::string(t);
            break;
        }
    }
    if (!pending_tensor_line.empty())
        throw checkpoint_error("unexpected extra tensor block: " + pending_tensor_line);
    return ckpt;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw checkpoint_error("cannot open checkpoint file: " + path);
    return load_checkpoint(is);
}

} // namespace predbeam
