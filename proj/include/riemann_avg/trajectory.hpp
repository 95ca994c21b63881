#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "riemann_avg/errors.hpp"

namespace ravg {

/// Per-run record of iterate and averaged-iterate squared errors at a subset
/// of iteration indices. Entry 0 is the initial point (gamma recorded as 0).
struct Trajectory {
  std::vector<std::int64_t> iters;
  std::vector<double> gamma;
  std::vector<double> err_sgd;
  std::vector<double> err_avg;
  std::uint64_t seed = 0;
  std::string metric_id;

  std::size_t size() const { return iters.size(); }
};

/// Iteration indices at which errors are recorded: index 0 plus a
/// geometric grid with `record_every` points per decade (the final iteration
/// is always included). When record_every exceeds n_iters only the initial
/// error is recorded.
inline std::vector<std::int64_t> record_grid(std::int64_t n_iters, int record_every) {
  if (n_iters < 1) throw DomainError("n_iters must be >= 1");
  if (record_every < 1) throw DomainError("record_every must be >= 1");
  std::vector<std::int64_t> grid{0};
  if (record_every > n_iters) return grid;
  std::int64_t prev = 0;
  for (int j = 0;; ++j) {
    auto n = static_cast<std::int64_t>(
        std::llround(std::pow(10.0, static_cast<double>(j) / record_every)));
    if (n > n_iters) break;
    if (n > prev) {
      grid.push_back(n);
      prev = n;
    }
  }
  if (grid.back() != n_iters) grid.push_back(n_iters);
  return grid;
}

/// Decimal rendering with 17 significant digits (round-trip exact for
/// 64-bit floats).
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace ravg
