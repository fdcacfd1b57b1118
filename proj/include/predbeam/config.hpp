#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "predbeam/channel.hpp"
#include "predbeam/clrnet.hpp"
#include "predbeam/errors.hpp"
#include "predbeam/mobility.hpp"
#include "predbeam/textio.hpp"

namespace predbeam {

/// Every knob of the experiment pipeline, with desk-scale defaults that run
/// in CI minutes. paper-scale (2,000 realizations / 10,000 training
/// episodes) is applied by apply_paper_scale().
struct ExperimentConfig {
    // geometry / channel
    std::size_t num_vehicles = 8; // K
    std::size_t antennas = 32;    // Nt = Nr
    double ref_path_loss_db = -65.0;
    double ref_distance_m = 1.0;
    double path_loss_exponent = 3.0;
    double noise_power_dbm = -80.0;

    // mobility
    double slot_duration_s = 0.02;
    double process_noise_std_m = 0.02;
    double init_mean_x_m = 25.0;
    double init_mean_y_m = 10.0;
    double init_std_m = 1.0;
    double velocity_min_mps = 8.0;
    double velocity_max_mps = 8.25;
    bool resample_velocity = true;
    double min_distance_m = 0.5; // episodes closer than this are redrawn

    // network
    std::size_t window = 6; // tau
    std::size_t conv_filters = 4;
    std::size_t lstm_hidden = 8;
    // Standardizing inputs/labels is available but off by default: on this
    // task the raw-scale parametrization acts as shrinkage toward the angle
    // prior and validates measurably better at high NMSE.
    bool standardize_inputs = false;

    // sensing
    bool sensing_bias_mode = false; // one error draw per episode instead of per slot

    // training
    std::size_t train_set_size = 2000;
    std::size_t max_iterations = 15000;
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    double validation_fraction = 0.1;
    std::size_t validation_interval = 250;

    // evaluation
    std::size_t realizations = 200;
    std::vector<double> nmse_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> power_grid_dbm = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
    double sweep_power_nmse = 0.7;
    double sweep_nmse_power_dbm = 20.0;

    // run control
    std::uint64_t seed = 1;
    std::size_t threads = 0; // 0 = hardware concurrency

    void validate() const {
        if (num_vehicles < 3) throw config_error("num_vehicles must be >= 3");
        if (window < 1) throw config_error("window must be >= 1");
        if (antennas < 1) throw config_error("antennas must be >= 1");
        if (conv_filters < 1 || lstm_hidden < 1)
            throw config_error("network layer sizes must be >= 1");
        if (train_set_size < 1 || batch_size < 1 || max_iterations < 1)
            throw config_error("training sizes must be >= 1");
        if (!(learning_rate > 0)) throw config_error("learning_rate must be > 0");
        if (!(validation_fraction >= 0.0) || !(validation_fraction < 1.0))
            throw config_error("validation_fraction must be in [0, 1)");
        if (validation_interval < 1)
            throw config_error("validation_interval must be >= 1");
        if (realizations < 1) throw config_error("realizations must be >= 1");
        if (nmse_grid.empty() || power_grid_dbm.empty())
            throw config_error("sweep grids must be non-empty");
        for (double rho : nmse_grid)
            if (!(rho >= 0)) throw config_error("nmse grid values must be >= 0");
        if (!(sweep_power_nmse >= 0)) throw config_error("sweep_power_nmse must be >= 0");
        if (!(min_distance_m >= 0)) throw config_error("min_distance_m must be >= 0");
        try {
            mobility_config().validate();
            channel_params().validate();
            clrnet_arch().validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what());
        }
    }

    MobilityConfig mobility_config() const {
        MobilityConfig m;
        m.slot_duration = slot_duration_s;
        m.process_noise_std = process_noise_std_m;
        m.init_mean_x = init_mean_x_m;
        m.init_mean_y = init_mean_y_m;
        m.init_std = init_std_m;
        m.velocity_min = velocity_min_mps;
        m.velocity_max = velocity_max_mps;
        m.resample_velocity = resample_velocity;
        return m;
    }

    /// Channel at the configured geometry; total_power is set per sweep point.
    ChannelParams channel_params(double power_dbm) const {
        ChannelParams c;
        c.num_tx_antennas = static_cast<int>(antennas);
        c.num_rx_antennas = static_cast<int>(antennas);
        c.ref_path_loss = db_to_linear(ref_path_loss_db);
        c.ref_distance = ref_distance_m;
        c.path_loss_exp = path_loss_exponent;
        c.noise_power = dbm_to_watts(noise_power_dbm);
        c.total_power = dbm_to_watts(power_dbm);
        return c;
    }
    ChannelParams channel_params() const { return channel_params(sweep_nmse_power_dbm); }

    ClrnetArch clrnet_arch() const {
        ClrnetArch a;
        a.num_vehicles = num_vehicles;
        a.window = window;
        a.conv_filters = conv_filters;
        a.lstm_hidden = lstm_hidden;
        return a;
    }

    /// Switches to the full experiment scale.
    void apply_paper_scale() {
        realizations = 2000;
        train_set_size = 10000;
        max_iterations = 20000;
    }
};

namespace detail {

inline bool parse_bool(std::string_view token, bool& out) {
    const std::string t(trim(token));
    if (t == "1" || t == "true") { out = true; return true; }
    if (t == "0" || t == "false") { out = false; return true; }
    return false;
}

inline bool parse_grid(std::string_view token, std::vector<double>& out) {
    std::vector<double> vals;
    for (const std::string& field : split_fields(token, ',')) {
        double v = 0.0;
        if (!parse_double(field, v)) return false;
        vals.push_back(v);
    }
    if (vals.empty()) return false;
    out = std::move(vals);
    return true;
}

} // namespace detail

/// Applies one `key = value` assignment; unknown keys and malformed values
/// are hard errors.
inline void apply_config_override(ExperimentConfig& cfg, std::string_view key_sv,
                                  std::string_view value_sv) {
    const std::string key(trim(key_sv));
    const std::string value(trim(value_sv));
    auto bad_value = [&]() -> config_error {
        return config_error("bad value for config key '" + key + "': " + value);
    };
    auto set_size = [&](std::size_t& field) {
        unsigned long long v = 0;
        if (!parse_u64(value, v)) throw bad_value();
        field = static_cast<std::size_t>(v);
    };
    auto set_f64 = [&](double& field) {
        double v = 0.0;
        if (!parse_double(value, v)) throw bad_value();
        field = v;
    };
    auto set_bool = [&](bool& field) {
        if (!detail::parse_bool(value, field)) throw bad_value();
    };
    auto set_grid = [&](std::vector<double>& field) {
        if (!detail::parse_grid(value, field)) throw bad_value();
    };

    if (key == "num_vehicles") set_size(cfg.num_vehicles);
    else if (key == "antennas") set_size(cfg.antennas);
    else if (key == "ref_path_loss_db") set_f64(cfg.ref_path_loss_db);
    else if (key == "ref_distance_m") set_f64(cfg.ref_distance_m);
    else if (key == "path_loss_exponent") set_f64(cfg.path_loss_exponent);
    else if (key == "noise_power_dbm") set_f64(cfg.noise_power_dbm);
    else if (key == "slot_duration_s") set_f64(cfg.slot_duration_s);
    else if (key == "process_noise_std_m") set_f64(cfg.process_noise_std_m);
    else if (key == "init_mean_x_m") set_f64(cfg.init_mean_x_m);
    else if (key == "init_mean_y_m") set_f64(cfg.init_mean_y_m);
    else if (key == "init_std_m") set_f64(cfg.init_std_m);
    else if (key == "velocity_min_mps") set_f64(cfg.velocity_min_mps);
    else if (key == "velocity_max_mps") set_f64(cfg.velocity_max_mps);
    else if (key == "resample_velocity") set_bool(cfg.resample_velocity);
    else if (key == "min_distance_m") set_f64(cfg.min_distance_m);
    else if (key == "window") set_size(cfg.window);
    else if (key == "conv_filters") set_size(cfg.conv_filters);
    else if (key == "lstm_hidden") set_size(cfg.lstm_hidden);
    else if (key == "standardize_inputs") set_bool(cfg.standardize_inputs);
    else if (key == "sensing_bias_mode") set_bool(cfg.sensing_bias_mode);
    else if (key == "train_set_size") set_size(cfg.train_set_size);
    else if (key == "max_iterations") set_size(cfg.max_iterations);
    else if (key == "batch_size") set_size(cfg.batch_size);
    else if (key == "learning_rate") set_f64(cfg.learning_rate);
    else if (key == "validation_fraction") set_f64(cfg.validation_fraction);
    else if (key == "validation_interval") set_size(cfg.validation_interval);
    else if (key == "realizations") set_size(cfg.realizations);
    else if (key == "nmse_grid") set_grid(cfg.nmse_grid);
    else if (key == "power_grid_dbm") set_grid(cfg.power_grid_dbm);
    else if (key == "sweep_power_nmse") set_f64(cfg.sweep_power_nmse);
    else if (key == "sweep_nmse_power_dbm") set_f64(cfg.sweep_nmse_power_dbm);
    else if (key == "seed") {
        unsigned long long v = 0;
        if (!parse_u64(value, v)) throw bad_value();
        cfg.seed = v;
    } else if (key == "threads") set_size(cfg.threads);
    else throw config_error("unknown config key: " + key);
}

/// Line-oriented `key = value` text; '#' starts a comment, blank lines are
/// skipped.
inline ExperimentConfig parse_config_text(std::istream& is,
                                          ExperimentConfig base = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string_view t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected 'key = value', got: " + std::string(t));
        apply_config_override(base, t.substr(0, eq), t.substr(eq + 1));
    }
    return base;
}

inline ExperimentConfig load_config_file(const std::string& path,
                                         ExperimentConfig base = {}) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file: " + path);
    return parse_config_text(is, std::move(base));
}

/// Canonical `key = value` rendering of every knob; re-parsing it
/// reproduces the config exactly.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    auto grid = [](const std::vector<double>& g) {
        std::string s;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) s += ",";
            s += format_double(g[i]);
        }
        return s;
    };
    os << "num_vehicles = " << cfg.num_vehicles << "\n";
    os << "antennas = " << cfg.antennas << "\n";
    os << "ref_path_loss_db = " << format_double(cfg.ref_path_loss_db) << "\n";
    os << "ref_distance_m = " << format_double(cfg.ref_distance_m) << "\n";
    os << "path_loss_exponent = " << format_double(cfg.path_loss_exponent) << "\n";
    os << "noise_power_dbm = " << format_double(cfg.noise_power_dbm) << "\n";
    os << "slot_duration_s = " << format_double(cfg.slot_duration_s) << "\n";
    os << "process_noise_std_m = " << format_double(cfg.process_noise_std_m) << "\n";
    os << "init_mean_x_m = " << format_double(cfg.init_mean_x_m) << "\n";
    os << "init_mean_y_m = " << format_double(cfg.init_mean_y_m) << "\n";
    os << "init_std_m = " << format_double(cfg.init_std_m) << "\n";
    os << "velocity_min_mps = " << format_double(cfg.velocity_min_mps) << "\n";
    os << "velocity_max_mps = " << format_double(cfg.velocity_max_mps) << "\n";
    os << "resample_velocity = " << (cfg.resample_velocity ? 1 : 0) << "\n";
    os << "min_distance_m = " << format_double(cfg.min_distance_m) << "\n";
    os << "window = " << cfg.window << "\n";
    os << "conv_filters = " << cfg.conv_filters << "\n";
    os << "lstm_hidden = " << cfg.lstm_hidden << "\n";
    os << "standardize_inputs = " << (cfg.standardize_inputs ? 1 : 0) << "\n";
    os << "sensing_bias_mode = " << (cfg.sensing_bias_mode ? 1 : 0) << "\n";
    os << "train_set_size = " << cfg.train_set_size << "\n";
    os << "max_iterations = " << cfg.max_iterations << "\n";
    os << "batch_size = " << cfg.batch_size << "\n";
    os << "learning_rate = " << format_double(cfg.learning_rate) << "\n";
    os << "validation_fraction = " << format_double(cfg.validation_fraction) << "\n";
    os << "validation_interval = " << cfg.validation_interval << "\n";
    os << "realizations = " << cfg.realizations << "\n";
    os << "nmse_grid = " << grid(cfg.nmse_grid) << "\n";
    os << "power_grid_dbm = " << grid(cfg.power_grid_dbm) << "\n";
    os << "sweep_power_nmse = " << format_double(cfg.sweep_power_nmse) << "\n";
    os << "sweep_nmse_power_dbm = " << format_double(cfg.sweep_nmse_power_dbm) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    return os.str();
}

} // namespace predbeam
