#pragma once

#include <cstddef>
#include <span>

#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

/// Iterate x^k, its counter k, and the cached residual r = A x^k - b.
struct solver_state {
  vector x;
  std::size_t k = 0;
  vector residual;

  solver_state() = default;

  solver_state(const linear_system& system, std::span<const double> x0)
      : x(x0.begin(), x0.end()) {
    if (x.size() != system.n())
      throw error(error_kind::dimension_mismatch,
                  "x0 has length " + std::to_string(x.size()) + ", expected " +
                      std::to_string(system.n()));
    residual = system.residual(x);
  }

  void resync(const linear_system& system) { residual = system.residual(x); }
};

}  // namespace kaczmarz
