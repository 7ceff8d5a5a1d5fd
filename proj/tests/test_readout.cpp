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

#include "softdecode/readout.hpp"

#include <cmath>
#include <vector>

#include <doctest.h>

#include "test_util.hpp"

using namespace softdecode;
using namespace softdecode::testutil;

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Reference peak-signal parameters: r=2, <t_f-t_i>/<t_i> = 4, 3 bins.
PeakSignalParams reference_params() { return PeakSignalParams{1.0, 4.0, 2.0, 6.0, 2.0}; }

const TabulatedReadout& reference_tabulation() {
  static const TabulatedReadout tab =
      tabulate_peak_distributions(reference_params(), 1000000, 512, 987654321);
  return tab;
}

// Analytic CDF of the ground-state observable: max of num_bins iid normals.
double ground_cdf(const PeakSignalParams& p, double x) {
  return std::pow(normal_cdf((x + 1.0) / p.bin_sigma()), p.num_bins());
}

// Gaussian readout tabulated on a regular grid (analytic densities).
TabulatedReadout tabulated_gaussian(double snr, int points) {
  const GaussianReadout g(snr);
  const double half = 1.0 + 8.0 / std::sqrt(snr);
  std::vector<double> grid(points), plus(points), minus(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = -half + 2.0 * half * i / (points - 1);
    plus[i] = g.pdf(grid[i], QubitState::plus);
    minus[i] = g.pdf(grid[i], QubitState::minus);
  }
  return TabulatedReadout(std::move(grid), std::move(plus), std::move(minus));
}

}  // namespace

TEST_CASE("gaussian pdf peak value, symmetry and normalization") {
  const GaussianReadout g(2.0);
  CHECK(g.pdf(1.0, QubitState::plus) == doctest::Approx(std::sqrt(1.0 / kPi)).epsilon(1e-12));
  CHECK(g.pdf(0.0, QubitState::plus) == doctest::Approx(g.pdf(0.0, QubitState::minus)).epsilon(1e-14));
  const double norm = g.integrate_over_support(
      [&g](double o) { return g.pdf(o, QubitState::plus); });
  CHECK(std::abs(norm - 1.0) <= 1e-8);
}

TEST_CASE("gaussian readout validation") {
  CHECK_THROWS_AS(GaussianReadout(0.0), std::invalid_argument);
  CHECK_THROWS_AS(GaussianReadout(-1.0), std::invalid_argument);
}

TEST_CASE("gaussian threshold and conditional error rates") {
  const GaussianReadout g(2.0);
  CHECK(g.optimal_threshold() == 0.0);
  const ConditionalErrorRates rates = conditional_error_rates(g, 0.0);
  const double eps = 0.5 * softdecode::erfc(1.0);
  CHECK(std::abs(rates.eps_plus - eps) <= 1e-10);
  CHECK(std::abs(rates.eps_minus - eps) <= 1e-10);
  CHECK(sig3(rates.average()) == doctest::Approx(0.0786));

  // Degenerate threshold far below the support.
  const ConditionalErrorRates degenerate = conditional_error_rates(g, -1e9);
  CHECK(degenerate.eps_plus == 0.0);
  CHECK(degenerate.eps_minus == 1.0);
}

TEST_CASE("tabulated gaussian pair crosses at zero") {
  const TabulatedReadout tab = tabulated_gaussian(2.0, 1025);
  const double nu = tab.optimal_threshold();
  CHECK(std::abs(nu) <= tab.grid_step());
  const ConditionalErrorRates rates = conditional_error_rates(tab, nu);
  CHECK(rates.average() == doctest::Approx(0.5 * softdecode::erfc(1.0)).epsilon(1e-3));
}

TEST_CASE("optimal threshold fails without an interior crossing") {
  // Two identical monotone ramps never cross in the interior.
  std::vector<double> grid{0.0, 1.0, 2.0};
  std::vector<double> pdf{0.0, 1.0, 0.0};
  const TabulatedReadout tab(grid, pdf, pdf);
  CHECK_THROWS_AS(tab.optimal_threshold(), std::runtime_error);
}

TEST_CASE("peak trace: noiseless ground limit") {
  PeakSignalParams p = reference_params();
  p.snr = 1e12;  // bin noise ~ 1e-6
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(simulate_peak_trace(p, QubitState::minus, rng) + 1.0) < 1e-4);
  }
}

TEST_CASE("peak trace: pulse missing the window reproduces the ground trace") {
  PeakSignalParams missed = reference_params();
  missed.mean_turn_on = 1e12;  // pulse essentially never arrives before meas_time
  const PeakSignalParams ground = reference_params();
  const std::size_t n = 20000;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng ra = Rng::for_stream(42, i);
    Rng rb = Rng::for_stream(43, i);
    a[i] = simulate_peak_trace(missed, QubitState::plus, ra);
    b[i] = simulate_peak_trace(ground, QubitState::minus, rb);
  }
  const double d = ks_distance_two_sample(a, b);
  CHECK(d <= ks_two_sample_critical(1e-3, n, n));
}

TEST_CASE("peak trace: ground-state empirical CDF matches the max-of-gaussians closed form") {
  const PeakSignalParams p = reference_params();
  const std::size_t n = 1000000;
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::for_stream(777, i);
    samples[i] = simulate_peak_trace(p, QubitState::minus, rng);
  }
  const double d = ks_distance(std::move(samples),
                               [&p](double x) { return ground_cdf(p, x); });
  CHECK(d <= 0.002);
}

TEST_CASE("peak params validation") {
  PeakSignalParams p = reference_params();
  p.bin_time = 7.0;  // larger than meas_time -> no full bin
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reference_params();
  p.snr = -2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(reference_params().num_bins() == 3);
  CHECK(reference_params().bin_sigma() == doctest::Approx(1.0));
}

TEST_CASE("tabulation: degenerate always-on pulse reproduces the gaussian readout") {
  // Pulse on from t=0 with essentially infinite duration, one bin: the
  // observable is a plain window average, i.e. a Gaussian readout with
  // effective snr = snr * bin_time / mean_duration.
  PeakSignalParams p;
  p.mean_turn_on = 1e-9;
  p.mean_duration = 1e6;
  p.bin_time = 50.0;
  p.meas_time = 50.0;
  p.snr = 4.0 * p.mean_duration / p.bin_time;  // effective snr 4
  const TabulatedReadout tab = tabulate_peak_distributions(p, 6000000, 128, 2024);
  const GaussianReadout reference(4.0);
  const double peak = reference.pdf(1.0, QubitState::plus);
  double worst = 0.0;
  for (std::size_t i = 0; i < tab.grid().size(); ++i) {
    const double o = tab.grid()[i];
    worst = std::max(worst, std::abs(tab.pdf_table(QubitState::plus)[i] -
                                     reference.pdf(o, QubitState::plus)));
    worst = std::max(worst, std::abs(tab.pdf_table(QubitState::minus)[i] -
                                     reference.pdf(o, QubitState::minus)));
  }
  CHECK(worst <= 0.01 * peak);
}

TEST_CASE("tabulation: stored ground cdf matches the closed form") {
  const TabulatedReadout& tab = reference_tabulation();
  const PeakSignalParams p = reference_params();
  double worst = 0.0;
  for (std::size_t i = 0; i < tab.grid().size(); ++i) {
    worst = std::max(worst, std::abs(tab.cdf_table(QubitState::minus)[i] -
                                     ground_cdf(p, tab.grid()[i])));
  }
  CHECK(worst <= 0.002);
}

TEST_CASE("tabulation invariants: normalization, monotone cdf, tail cut, inverse table") {
  const TabulatedReadout& tab = reference_tabulation();
  for (const QubitState s : {QubitState::plus, QubitState::minus}) {
    const auto& grid = tab.grid();
    const auto& pdf = tab.pdf_table(s);
    const auto& cdf = tab.cdf_table(s);
    double total = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      total += 0.5 * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
      CHECK(cdf[i] >= cdf[i - 1]);
    }
    CHECK(std::abs(total - 1.0) <= 1e-6);
    CHECK(cdf.front() == 0.0);
    CHECK(cdf.back() == 1.0);

    const auto& inv = tab.inverse_cdf_table(s);
    for (std::size_t k = 1; k < inv.size(); ++k) CHECK(inv[k] >= inv[k - 1]);
    // Q(Q^-1(x)) = x within interpolation error.
    for (const double x : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      CHECK(std::abs(tab.cdf(tab.quantile(x, s), s) - x) <= 2e-3);
    }
  }
  CHECK(tab.diagnostics().lost_weight_plus + tab.diagnostics().lost_weight_minus <= 2e-7);
  CHECK(tab.diagnostics().warnings.empty());
  CHECK(tab.provenance().n_samples == 1000000);
}

TEST_CASE("tabulation warns about sparse interior bins") {
  const TabulatedReadout tab =
      tabulate_peak_distributions(reference_params(), 2000, 512, 7);
  CHECK_FALSE(tab.diagnostics().warnings.empty());
}

TEST_CASE("threshold optimality on the tabulated grid") {
  const TabulatedReadout& tab = reference_tabulation();
  const double nu = tab.optimal_threshold();
  const double best = conditional_error_rates(tab, nu).average();
  const double step = (tab.grid().back() - tab.grid().front()) / (tab.grid().size() - 1);
  for (const int offset : {-2, -1, 1, 2}) {
    CHECK(best <= conditional_error_rates(tab, nu + offset * step).average() + 1e-12);
  }
}

TEST_CASE("sampling: tabulated quantile hits the stored median") {
  const TabulatedReadout& tab = reference_tabulation();
  for (const QubitState s : {QubitState::plus, QubitState::minus}) {
    const double median = tab.quantile(0.5, s);
    CHECK(std::abs(tab.cdf(median, s) - 0.5) <= 1e-3);
  }
}

TEST_CASE("sampling: gaussian sample mean at CLT scale") {
  const GaussianReadout g(2.0);
  Rng rng(99);
  const long n = 1000000;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) sum += g.sample(QubitState::plus, rng);
  CHECK(std::abs(sum / n - 1.0) <= 3.0 / std::sqrt(2.0 * n));
}

TEST_CASE("sampling: tabulated draws match the stored cdf (one-sample KS)") {
  const TabulatedReadout& tab = reference_tabulation();
  const std::size_t n = 1000000;
  std::vector<double> samples(n);
  Rng rng(314159);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = tab.sample(QubitState::plus, rng);
  }
  const double d = ks_distance(std::move(samples), [&tab](double x) {
    return tab.cdf(x, QubitState::plus);
  });
  CHECK(d <= 0.002);
}

TEST_CASE("sampling: tabulated sampler agrees with fresh traces (two-sample KS)") {
  const TabulatedReadout& tab = reference_tabulation();
  const PeakSignalParams p = reference_params();
  const std::size_t n = 100000;
  for (const QubitState s : {QubitState::plus, QubitState::minus}) {
    std::vector<double> from_table(n), from_trace(n);
    Rng rng(2718);
    for (std::size_t i = 0; i < n; ++i) {
      from_table[i] = tab.sample(s, rng);
      Rng trace_rng = Rng::for_stream(51, i + (s == QubitState::plus ? 0 : n));
      from_trace[i] = simulate_peak_trace(p, s, trace_rng);
    }
    const double d = ks_distance_two_sample(from_table, from_trace);
    CHECK(d <= ks_two_sample_critical(1e-3, n, n));
  }
}

TEST_CASE("tabulated readout constructor validation") {
  std::vector<double> grid{0.0, 1.0, 2.0};
  std::vector<double> tri{0.0, 1.0, 0.0};
  CHECK_NOTHROW(TabulatedReadout(grid, tri, tri));
  CHECK_THROWS_AS(TabulatedReadout({0.0, 1.0, 1.0}, tri, tri), std::invalid_argument);
  CHECK_THROWS_AS(TabulatedReadout({0.0}, {1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(TabulatedReadout(grid, {0.0, -1.0, 0.0}, tri), std::invalid_argument);
  // badly normalized density
  CHECK_THROWS_AS(TabulatedReadout(grid, {0.0, 1.5, 0.0}, tri), std::invalid_argument);
  CHECK_THROWS_AS(TabulatedReadout(grid, {0.0, 1.0}, tri), std::invalid_argument);
}

TEST_CASE("json round trip preserves the document bytes and the tables") {
  const TabulatedReadout& tab = reference_tabulation();
  const std::string doc = tab.to_json_string();
  const TabulatedReadout loaded = TabulatedReadout::from_json_string(doc);
  CHECK(loaded.to_json_string() == doc);
  CHECK(loaded.grid() == tab.grid());
  CHECK(loaded.pdf_table(QubitState::plus) == tab.pdf_table(QubitState::plus));
  CHECK(loaded.cdf_table(QubitState::minus) == tab.cdf_table(QubitState::minus));
  CHECK(loaded.params().has_value());
  CHECK(loaded.provenance().seed == tab.provenance().seed);
}

TEST_CASE("json loader rejects invalid documents") {
  CHECK_THROWS_AS(TabulatedReadout::from_json_string("not json"), std::invalid_argument);
  CHECK_THROWS_AS(TabulatedReadout::from_json_string("{\"version\": 99}"),
                  std::invalid_argument);
  // Corrupt a density value so the normalization invariant fails on load.
  std::string doc = reference_tabulation().to_json_string();
  const auto pos = doc.find("\"pdf_plus\":[");
  REQUIRE(pos != std::string::npos);
  const auto comma = doc.find(',', pos + 12);
  std::string corrupted = doc.substr(0, pos + 12) + "1e9" + doc.substr(comma);
  CHECK_THROWS_AS(TabulatedReadout::from_json_string(corrupted), std::invalid_argument);
}

TEST_CASE("calibration returns a single-candidate grid unchanged") {
  PeakSearchGrids grids;
  grids.meas_times = {6.0};
  grids.bin_times = {2.0};
  PeakCalibrationOptions options;
  options.search_samples = 5000;
  options.refine_samples = 0;
  options.decide_samples = 0;
  options.final_samples = 20000;
  options.grid_size = 128;
  const PeakCalibration cal =
      optimize_peak_parameters(reference_params(), grids, 1234, options);
  CHECK(cal.params.meas_time == 6.0);
  CHECK(cal.params.bin_time == 2.0);
  CHECK(cal.rates.average() > 0.0);
  CHECK(cal.rates.average() < 0.5);
}

TEST_CASE("calibration is deterministic and worker-count independent") {
  PeakSearchGrids grids;
  grids.meas_times = {4.0, 6.0};
  grids.bin_times = {1.0, 2.0, 4.0};
  PeakCalibrationOptions options;
  options.search_samples = 4000;
  options.refine_samples = 8000;
  options.decide_samples = 16000;
  options.final_samples = 20000;
  options.grid_size = 128;
  const PeakCalibration a =
      optimize_peak_parameters(reference_params(), grids, 5678, options);
  options.workers = 3;
  const PeakCalibration b =
      optimize_peak_parameters(reference_params(), grids, 5678, options);
  CHECK(a.readout.to_json_string() == b.readout.to_json_string());
  CHECK(a.threshold == b.threshold);
  CHECK(a.params.bin_time == b.params.bin_time);
}

TEST_CASE("higher snr calibrates to a strictly lower single-shot error") {
  // Reduced budgets; the gap (0.25 vs ~0.13) dwarfs the statistical error.
  PeakSearchGrids grids;
  grids.meas_times = {4.0, 6.0, 8.0};
  grids.bin_times = {0.5, 1.0, 2.0, 4.0, 5.7};
  PeakCalibrationOptions options;
  options.search_samples = 20000;
  options.refine_samples = 40000;
  options.decide_samples = 80000;
  options.final_samples = 100000;
  options.grid_size = 256;
  PeakSignalParams base = reference_params();
  const PeakCalibration low = optimize_peak_parameters(base, grids, 31415, options);
  base.snr = 10.0;
  const PeakCalibration high = optimize_peak_parameters(base, grids, 31415, options);
  CHECK(high.rates.average() < low.rates.average());
}
