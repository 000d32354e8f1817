#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace invlab {

/// Rejected input or violated precondition. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure (non-convergence, lost definiteness, ...). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

using flop_count_t = std::uint64_t;

inline constexpr int kFormatVersion = 1;

} // namespace invlab
