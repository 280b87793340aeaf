#pragma once

#include <stdexcept>
#include <string>

namespace scts {

// Bad configuration or arguments. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unusable input data (ragged CSV, NaN cells, missing files). Exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Matrix rank below what an operation requires.
struct RankError : std::runtime_error {
    explicit RankError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scts
