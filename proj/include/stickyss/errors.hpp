#ifndef STICKYSS_ERRORS_HPP
#define STICKYSS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stickyss {

struct StabilityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MassLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MomentMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SearchFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnderResolved : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace stickyss

#endif
