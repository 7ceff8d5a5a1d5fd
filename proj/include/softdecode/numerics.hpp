// Copyright 2026 The softdecode authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOFTDECODE_NUMERICS_HPP
#define SOFTDECODE_NUMERICS_HPP

#include <functional>
#include <stdexcept>
#include <string>

namespace softdecode {

/// Tolerances and subdivision budget for adaptive quadrature.
struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  int subdivisions = 0;
  bool converged = false;
};

/// Thrown when adaptive quadrature fails to converge; carries the best
/// estimate reached so callers can inspect or log it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& message, QuadratureResult best_estimate)
      : std::runtime_error(message), best(best_estimate) {}
  QuadratureResult best;
};

/// Complementary error function. Wraps the libm implementation, which meets
/// the 1e-12 absolute accuracy we need on |x| <= 10.
double erfc(double x);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (modified Lentz). Relative accuracy ~1e-14 for moderate a, b.
/// Throws std::domain_error for x outside [0, 1] or non-positive a, b.
double regularized_incomplete_beta(double x, double a, double b);

/// Inverse of the standard normal CDF. Rational approximation polished with
/// one Halley step; accurate to ~1e-15 across (0, 1).
double inverse_normal_cdf(double p);

/// Adaptive Gauss-Kronrod (G7, K15) quadrature of f over [lower, upper].
/// Subdivides the worst interval until the global error estimate meets
/// max(abs_tol, rel_tol * |value|) or the subdivision budget runs out; the
/// result reports which happened.
QuadratureResult integrate(const std::function<double(double)>& f, double lower,
                           double upper, const QuadratureSpec& spec = {});

/// Like integrate() but throws QuadratureError on non-convergence.
double integrate_or_throw(const std::function<double(double)>& f, double lower,
                          double upper, const QuadratureSpec& spec = {});

/// Integral of f over the whole real line through the substitution
/// u = center + scale * atanh(t), which maps (-inf, inf) onto t in (-1, 1).
/// `scale` should be of the order of the integrand's effective support
/// half-width (for the readout models: where the pdf falls below 1e-14 of its
/// peak); the integrand must decay at least as fast as a Gaussian.
QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     double center, double scale,
                                     const QuadratureSpec& spec = {});

struct MaximizeResult {
  double argmax = 0.0;
  double value = 0.0;
};

/// Golden-section maximization of a concave f on [lower, upper]. Returns the
/// boundary point exactly when the maximum sits on the boundary.
MaximizeResult maximize_concave(const std::function<double(double)>& f,
                                double lower, double upper, double tol = 1e-10);

/// Derivative-sign bisection for a concave f with derivative df. If df does
/// not change sign inside the interval the matching boundary is returned
/// exactly.
MaximizeResult maximize_concave(const std::function<double(double)>& f,
                                const std::function<double(double)>& df,
                                double lower, double upper, double tol = 1e-10);

}  // namespace softdecode

#endif  // SOFTDECODE_NUMERICS_HPP
