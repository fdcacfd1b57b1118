#pragma once

#include <stdexcept>
#include <string>

namespace predbeam {

/// Vehicle coincident with the RSU, arcsin out of domain, and similar
/// geometric breakdowns.
class degenerate_geometry_error : public std::runtime_error {
public:
    explicit degenerate_geometry_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Requested a history window that reaches before the first recorded slot.
class not_enough_history_error : public std::runtime_error {
public:
    explicit not_enough_history_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Non-finite loss or gradients during training.
class training_diverged_error : public std::runtime_error {
public:
    explicit training_diverged_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Version mismatch, corrupt payload, or shape inconsistency in a checkpoint.
class checkpoint_error : public std::runtime_error {
public:
    explicit checkpoint_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Unknown key, malformed line, or out-of-range value in an experiment
/// configuration.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace predbeam
