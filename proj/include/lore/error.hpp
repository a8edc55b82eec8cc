#pragma once
#include <stdexcept>
#include <string>

namespace lore {

/// Invalid configuration value, malformed input document, or mismatched shapes.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

/// Non-finite value produced by a network, loss, or gradient.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace lore
