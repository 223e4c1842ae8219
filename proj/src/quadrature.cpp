#include "rdmc/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace rdmc {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  double abs_tol;
  int max_depth;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm)) throw QuadratureError("non-finite integrand value");
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth) throw QuadratureError("adaptive Simpson did not converge");
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  // A coarse composite pass sets the scale for the relative tolerance.
  constexpr int kPanels = 8;
  const double width = (b - a) / kPanels;
  double fx[2 * kPanels + 1];
  for (int k = 0; k <= 2 * kPanels; ++k) {
    fx[k] = f(a + 0.5 * width * k);
    if (!std::isfinite(fx[k])) throw QuadratureError("non-finite integrand value");
  }
  double scale = 0.0;
  for (int p = 0; p < kPanels; ++p)
    scale += std::abs(width / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]));
  const double tol = std::max(rel_tol * scale, rel_tol * 1e-6 * std::abs(b - a));
  Simpson s{f, tol, max_depth};
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + width * p, pb = pa + width;
    const double whole = width / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    total += s.recurse(pa, pb, fx[2 * p], fx[2 * p + 1], fx[2 * p + 2], whole, tol / kPanels, 0);
  }
  return total;
}

}  // namespace rdmc
