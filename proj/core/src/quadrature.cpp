#include "siwalk/quadrature.hpp"

#include <cmath>
#include <vector>

#include "siwalk/errors.hpp"

namespace siwalk {

namespace {

struct Panel {
  double a, b, fa, fm, fb, whole, tol;
  int depth;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol, std::size_t max_intervals) {
  QuadratureResult result;
  if (a == b) return result;
  if (!(tol > 0.0)) throw InvalidArgument("adaptive_simpson: tolerance must be positive");
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  // Explicit stack, left panel processed first so the summation order is fixed.
  std::vector<Panel> stack{{a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 0}};
  std::size_t intervals = 1;
  double total = 0.0;
  double error = 0.0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double flm = f(0.5 * (p.a + m));
    const double frm = f(0.5 * (m + p.b));
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * p.tol || p.depth >= 60 || intervals >= max_intervals) {
      total += left + right + delta / 15.0;
      error += std::abs(delta) / 15.0;
      continue;
    }
    ++intervals;
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol, p.depth + 1});
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol, p.depth + 1});
  }
  result.value = sign * total;
  result.error_estimate = error;
  result.intervals = intervals;
  return result;
}

}  // namespace siwalk
