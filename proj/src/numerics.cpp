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

#include "softdecode/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace softdecode {

double erfc(double x) { return std::erfc(x); }

namespace {

// Continued fraction for the incomplete beta function, modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("regularized_incomplete_beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("regularized_incomplete_beta: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must lie in (0, 1)");
  }

  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley refinement against the exact CDF expressed with erfc.
  const double inv_sqrt2 = 0.7071067811865475244;
  const double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
  const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779;
  const double err = cdf - p;
  const double u = err / pdf;
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

// Gauss-Kronrod 15-point nodes/weights on [-1, 1] (positive half; node 0 is
// listed last). The embedded 7-point Gauss rule uses the odd-index nodes.
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double value = 0.0;
  double error = 0.0;
};

PanelEstimate gauss_kronrod_panel(const std::function<double(double)>& f,
                                  double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double kronrod = 0.0;
  double gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double offset = half * kKronrodNodes[i];
    double fsum;
    if (i == 7) {
      fsum = f(center);
    } else {
      fsum = f(center - offset) + f(center + offset);
    }
    kronrod += kKronrodWeights[i] * fsum;
    // The embedded G7 rule lives on the odd-index nodes plus the center.
    if (i % 2 == 1 || i == 7) {
      gauss += kGaussWeights[i / 2] * fsum;
    }
  }
  PanelEstimate out;
  out.value = kronrod * half;
  out.error = std::abs((kronrod - gauss) * half);
  return out;
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lower,
                           double upper, const QuadratureSpec& spec) {
  if (!(lower < upper)) {
    throw std::invalid_argument("integrate: requires lower < upper");
  }
  if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0) || spec.max_subdivisions < 1) {
    throw std::invalid_argument("integrate: invalid QuadratureSpec");
  }

  std::priority_queue<Panel> panels;
  PanelEstimate first = gauss_kronrod_panel(f, lower, upper);
  panels.push({lower, upper, first.value, first.error});
  double total_value = first.value;
  double total_error = first.error;

  QuadratureResult result;
  result.subdivisions = 0;
  while (total_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value))) {
    if (result.subdivisions >= spec.max_subdivisions) {
      result.value = total_value;
      result.error = total_error;
      result.converged = false;
      return result;
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval has collapsed to machine precision; accept the estimate.
      panels.push(worst);
      break;
    }
    const PanelEstimate left = gauss_kronrod_panel(f, worst.a, mid);
    const PanelEstimate right = gauss_kronrod_panel(f, mid, worst.b);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push({worst.a, mid, left.value, left.error});
    panels.push({mid, worst.b, right.value, right.error});
    ++result.subdivisions;
  }

  result.value = total_value;
  result.error = total_error;
  result.converged = true;
  return result;
}

double integrate_or_throw(const std::function<double(double)>& f, double lower,
                          double upper, const QuadratureSpec& spec) {
  QuadratureResult r = integrate(f, lower, upper, spec);
  if (!r.converged) {
    throw QuadratureError("quadrature failed to converge within subdivision budget", r);
  }
  return r.value;
}

QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     double center, double scale,
                                     const QuadratureSpec& spec) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("integrate_real_line: scale must be positive");
  }
  auto g = [&f, center, scale](double t) {
    const double jac = 1.0 - t * t;
    if (jac <= 0.0) return 0.0;
    const double u = center + scale * std::atanh(t);
    const double fu = f(u);
    if (fu == 0.0) return 0.0;
    return fu * scale / jac;
  };
  return integrate(g, -1.0, 1.0, spec);
}

MaximizeResult maximize_concave(const std::function<double(double)>& f,
                                double lower, double upper, double tol) {
  if (!(lower <= upper)) {
    throw std::invalid_argument("maximize_concave: requires lower <= upper");
  }
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lower, b = upper;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  const double interior = 0.5 * (a + b);
  const double f_interior = f(interior);
  const double f_lower = f(lower);
  const double f_upper = f(upper);
  // Snap to a boundary when it is at least as good as the interior candidate,
  // so monotone inputs return the boundary exactly.
  MaximizeResult best{interior, f_interior};
  if (f_upper >= best.value) best = {upper, f_upper};
  if (f_lower >= best.value && f_lower > f_upper) best = {lower, f_lower};
  return best;
}

MaximizeResult maximize_concave(const std::function<double(double)>& f,
                                const std::function<double(double)>& df,
                                double lower, double upper, double tol) {
  if (!(lower <= upper)) {
    throw std::invalid_argument("maximize_concave: requires lower <= upper");
  }
  if (df(lower) <= 0.0) return {lower, f(lower)};
  if (df(upper) >= 0.0) return {upper, f(upper)};
  double a = lower, b = upper;
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (df(mid) > 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double argmax = 0.5 * (a + b);
  return {argmax, f(argmax)};
}

}  // namespace softdecode
