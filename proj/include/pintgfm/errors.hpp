#pragma once

#include <stdexcept>
#include <string>

namespace pintgfm {

/// Invalid argument or configuration value supplied by the caller.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical construction failure: singular or ill-conditioned operator,
/// violated construction invariant, non-finite values.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pintgfm
