#pragma once

#include <functional>
#include <stdexcept>

namespace rdmc {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive composite Simpson on [a, b] to the requested relative tolerance
/// (with an absolute floor of rel_tol * 1e-6). The integrand is only sampled
/// at closed-interval points, so endpoint singularities must be removed by
/// the caller. Throws QuadratureError on non-convergence or non-finite values.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-9,
                        int max_depth = 48);

}  // namespace rdmc
