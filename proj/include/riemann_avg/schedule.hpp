#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "riemann_avg/errors.hpp"

namespace ravg {

/// Step-size rule: gamma_n = C * n^(-alpha) or a constant gamma.
struct StepSchedule {
  enum class Kind { PolynomialDecay, Constant };

  static StepSchedule polynomial(double c, double alpha) {
    if (c <= 0) throw DomainError("schedule prefactor C must be positive");
    if (alpha <= 0 || alpha > 1) throw DomainError("schedule alpha must lie in (0, 1]");
    StepSchedule s;
    s.kind = Kind::PolynomialDecay;
    s.c = c;
    s.alpha = alpha;
    return s;
  }

  static StepSchedule constant(double gamma) {
    if (gamma <= 0) throw DomainError("constant step size must be positive");
    StepSchedule s;
    s.kind = Kind::Constant;
    s.gamma = gamma;
    return s;
  }

  /// Filesystem-safe identifier, stable across runs.
  std::string label() const {
    char buf[64];
    if (kind == Kind::Constant)
      std::snprintf(buf, sizeof(buf), "const_g%g", gamma);
    else
      std::snprintf(buf, sizeof(buf), "poly_C%g_a%g", c, alpha);
    return buf;
  }

  Kind kind = Kind::Constant;
  double c = 1.0;
  double alpha = 0.5;
  double gamma = 0.0;
};

inline double step_size(const StepSchedule& s, std::int64_t n) {
  if (n < 1) throw DomainError("step index must be >= 1");
  if (s.kind == StepSchedule::Kind::Constant) return s.gamma;
  return s.c * std::pow(static_cast<double>(n), -s.alpha);
}

}  // namespace ravg
