#pragma once

#include <cstddef>
#include <functional>

namespace siwalk {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t intervals = 0;
};

/// Adaptive Simpson quadrature to absolute tolerance `tol`. Subdivision stops
/// once `max_intervals` subintervals have been created; the estimate is then
/// returned as is (check `error_estimate`).
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol = 1e-10, std::size_t max_intervals = 1'000'000);

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
  return adaptive_simpson(f, a, b, tol).value;
}

}  // namespace siwalk
