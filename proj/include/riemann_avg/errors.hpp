#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ravg {

/// Shape or manifold mismatch between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be inverted (or square-rooted) is numerically singular.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input lies outside the domain where a map is defined (antipodal points,
/// subspaces at 90 degrees, degenerate spectra, invalid schedule index, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The streaming average left the domain of the inverse retraction; carries
/// the iteration index at which the run aborted.
struct AveragingDomainError : std::runtime_error {
  AveragingDomainError(std::int64_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration(iteration) {}
  std::int64_t iteration;
};

/// A map was requested on a manifold that does not provide it.
struct UnsupportedMapError : std::logic_error {
  using std::logic_error::logic_error;
};

/// An iterative solver exhausted its iteration budget.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Not enough usable points for a least-squares fit.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ravg
