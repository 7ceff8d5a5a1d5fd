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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "softdecode/parallel.hpp"

namespace softdecode {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Effective support cut: Gaussian tails below 1e-14 of the peak,
// i.e. sqrt(2 ln 1e14) standard deviations.
constexpr double kSupportSigmas = 8.029505914;
constexpr double kTailCutWeight = 1e-7;

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t x = seed ^ (tag * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// ReadoutModel defaults

double ReadoutModel::log_pdf(double outcome, QubitState state) const {
  const double p = pdf(outcome, state);
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

void ReadoutModel::pdf_pair(double outcome, double& plus, double& minus) const {
  plus = pdf(outcome, QubitState::plus);
  minus = pdf(outcome, QubitState::minus);
}

void ReadoutModel::log_pdf_pair(double outcome, double& log_plus, double& log_minus) const {
  log_plus = log_pdf(outcome, QubitState::plus);
  log_minus = log_pdf(outcome, QubitState::minus);
}

double ReadoutModel::sample(QubitState state, Rng& rng) const {
  return quantile(rng.uniform(), state);
}

double ReadoutModel::clamp_to_support(double outcome) const {
  const auto [lo, hi] = support();
  return std::clamp(outcome, lo, hi);
}

double ReadoutModel::conditional_mean(QubitState state) const {
  return integrate_over_support(
      [this, state](double o) { return o * pdf(o, state); });
}

double ReadoutModel::conditional_second_moment(QubitState state) const {
  return integrate_over_support(
      [this, state](double o) { return o * o * pdf(o, state); });
}

// ---------------------------------------------------------------------------
// GaussianReadout

GaussianReadout::GaussianReadout(double snr) : snr_(snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::invalid_argument("GaussianReadout: snr must be positive and finite");
  }
  sigma_ = 1.0 / std::sqrt(snr);
}

double GaussianReadout::pdf(double outcome, QubitState state) const {
  const double d = outcome - mean(state);
  return std::sqrt(snr_ / (2.0 * kPi)) * std::exp(-0.5 * d * d * snr_);
}

double GaussianReadout::log_pdf(double outcome, QubitState state) const {
  const double d = outcome - mean(state);
  return 0.5 * std::log(snr_ / (2.0 * kPi)) - 0.5 * d * d * snr_;
}

void GaussianReadout::log_pdf_pair(double outcome, double& log_plus, double& log_minus) const {
  const double norm = 0.5 * std::log(snr_ / (2.0 * kPi));
  const double dp = outcome - 1.0;
  const double dm = outcome + 1.0;
  log_plus = norm - 0.5 * dp * dp * snr_;
  log_minus = norm - 0.5 * dm * dm * snr_;
}

double GaussianReadout::cdf(double outcome, QubitState state) const {
  const double z = (mean(state) - outcome) / (sigma_ * 1.4142135623730950488);
  return 0.5 * softdecode::erfc(z);
}

double GaussianReadout::quantile(double p, QubitState state) const {
  return mean(state) + sigma_ * inverse_normal_cdf(p);
}

double GaussianReadout::sample(QubitState state, Rng& rng) const {
  return rng.normal(mean(state), sigma_);
}

std::pair<double, double> GaussianReadout::support() const {
  const double w = 1.0 + kSupportSigmas * sigma_;
  return {-w, w};
}

double GaussianReadout::integrate_over_support(
    const std::function<double(double)>& g, const QuadratureSpec& spec) const {
  const double scale = support().second;
  const QuadratureResult r = integrate_real_line(g, 0.0, scale, spec);
  if (!r.converged) {
    throw QuadratureError("GaussianReadout: integral did not converge", r);
  }
  return r.value;
}

// ---------------------------------------------------------------------------
// PeakSignalParams

int PeakSignalParams::num_bins() const {
  // Tolerate floating point slop in the ratio so e.g. 0.3/0.1 yields 3 bins.
  return static_cast<int>(std::floor(meas_time / bin_time + 1e-9));
}

double PeakSignalParams::bin_sigma() const {
  return std::sqrt(mean_duration / (snr * bin_time));
}

void PeakSignalParams::validate() const {
  if (!(mean_turn_on > 0.0) || !(mean_duration > 0.0) || !(snr > 0.0) ||
      !(meas_time > 0.0) || !(bin_time > 0.0)) {
    throw std::invalid_argument("PeakSignalParams: all parameters must be positive");
  }
  if (num_bins() < 1) {
    throw std::invalid_argument("PeakSignalParams: need at least one full bin (bin_time <= meas_time)");
  }
}

double simulate_peak_trace(const PeakSignalParams& params, QubitState state, Rng& rng) {
  const int n_bins = params.num_bins();
  const double sigma = params.bin_sigma();
  double best = -std::numeric_limits<double>::infinity();
  if (state == QubitState::minus) {
    for (int l = 0; l < n_bins; ++l) {
      best = std::max(best, -1.0 + sigma * rng.normal());
    }
    return best;
  }
  const double turn_on = rng.exponential(params.mean_turn_on);
  const double turn_off = turn_on + rng.exponential(params.mean_duration);
  for (int l = 0; l < n_bins; ++l) {
    const double bin_start = l * params.bin_time;
    const double bin_end = bin_start + params.bin_time;
    // Exact intersection of the pulse with the bin window; pulses past
    // meas_time are clipped by the bin layout itself.
    const double overlap = std::max(0.0, std::min(turn_off, bin_end) - std::max(turn_on, bin_start));
    const double mean = -1.0 + 2.0 * overlap / params.bin_time;
    best = std::max(best, mean + sigma * rng.normal());
  }
  return best;
}

// ---------------------------------------------------------------------------
// TabulatedReadout

TabulatedReadout::TabulatedReadout(std::vector<double> grid,
                                   std::vector<double> pdf_plus,
                                   std::vector<double> pdf_minus,
                                   std::optional<PeakSignalParams> params,
                                   TabulationProvenance provenance,
                                   TabulationDiagnostics diagnostics)
    : grid_(std::move(grid)),
      pdf_plus_(std::move(pdf_plus)),
      pdf_minus_(std::move(pdf_minus)),
      params_(std::move(params)),
      provenance_(provenance),
      diagnostics_(std::move(diagnostics)) {
  const std::size_t n = grid_.size();
  if (n < 2) {
    throw std::invalid_argument("TabulatedReadout: grid needs at least 2 points");
  }
  if (pdf_plus_.size() != n || pdf_minus_.size() != n) {
    throw std::invalid_argument("TabulatedReadout: pdf tables must match the grid length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grid_[i]) || (i > 0 && !(grid_[i] > grid_[i - 1]))) {
      throw std::invalid_argument("TabulatedReadout: grid must be finite and strictly increasing");
    }
    if (!(pdf_plus_[i] >= 0.0) || !(pdf_minus_[i] >= 0.0)) {
      throw std::invalid_argument("TabulatedReadout: densities must be non-negative");
    }
  }
  if (params_) params_->validate();

  auto build_state_tables = [&](std::vector<double>& pdf, std::vector<double>& cdf,
                                std::vector<double>& inv) {
    double total = 0.0;
    cdf.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      total += 0.5 * (pdf[i] + pdf[i - 1]) * (grid_[i] - grid_[i - 1]);
      cdf[i] = total;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw std::invalid_argument("TabulatedReadout: pdf must integrate to 1 within 1e-6 (trapezoid rule)");
    }
    // Remove the normalization residual. Tables already normalized to within
    // a few ulp are left untouched, so serialize/load round trips bit-exactly.
    if (std::abs(total - 1.0) > 1e-12) {
      for (double& v : pdf) v /= total;
    }
    for (std::size_t i = 0; i < n; ++i) {
      cdf[i] = std::min(1.0, cdf[i] / total);
    }
    cdf.back() = 1.0;

    // Piecewise-linear inverse cdf on a uniform probability grid.
    const std::size_t k_inv = 4 * n + 1;
    inv.assign(k_inv, 0.0);
    std::size_t j = 0;
    for (std::size_t k = 0; k < k_inv; ++k) {
      const double p = static_cast<double>(k) / static_cast<double>(k_inv - 1);
      while (j + 2 < n && cdf[j + 1] <= p) ++j;
      const double c0 = cdf[j];
      const double c1 = cdf[j + 1];
      if (c1 > c0) {
        const double frac = std::clamp((p - c0) / (c1 - c0), 0.0, 1.0);
        inv[k] = grid_[j] + frac * (grid_[j + 1] - grid_[j]);
      } else {
        inv[k] = grid_[j];
      }
    }
  };

  build_state_tables(pdf_plus_, cdf_plus_, inv_cdf_plus_);
  build_state_tables(pdf_minus_, cdf_minus_, inv_cdf_minus_);
}

const std::vector<double>& TabulatedReadout::pdf_table(QubitState state) const {
  return state == QubitState::plus ? pdf_plus_ : pdf_minus_;
}

const std::vector<double>& TabulatedReadout::cdf_table(QubitState state) const {
  return state == QubitState::plus ? cdf_plus_ : cdf_minus_;
}

const std::vector<double>& TabulatedReadout::inverse_cdf_table(QubitState state) const {
  return state == QubitState::plus ? inv_cdf_plus_ : inv_cdf_minus_;
}

double TabulatedReadout::grid_step() const {
  return (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
}

namespace {

// Index of the grid segment containing `x`, assuming front() <= x <= back().
std::size_t segment_index(const std::vector<double>& grid, double x) {
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - grid.begin());
  if (j == 0) return 0;
  if (j >= grid.size()) return grid.size() - 2;
  return j - 1;
}

double lerp_at(const std::vector<double>& grid, const std::vector<double>& values,
               std::size_t j, double x) {
  const double h = grid[j + 1] - grid[j];
  const double t = (x - grid[j]) / h;
  return values[j] + t * (values[j + 1] - values[j]);
}

}  // namespace

double TabulatedReadout::pdf(double outcome, QubitState state) const {
  if (outcome < grid_.front() || outcome > grid_.back()) return 0.0;
  const std::size_t j = segment_index(grid_, outcome);
  return lerp_at(grid_, pdf_table(state), j, outcome);
}

void TabulatedReadout::pdf_pair(double outcome, double& plus, double& minus) const {
  if (outcome < grid_.front() || outcome > grid_.back()) {
    plus = 0.0;
    minus = 0.0;
    return;
  }
  const std::size_t j = segment_index(grid_, outcome);
  plus = lerp_at(grid_, pdf_plus_, j, outcome);
  minus = lerp_at(grid_, pdf_minus_, j, outcome);
}

void TabulatedReadout::log_pdf_pair(double outcome, double& log_plus, double& log_minus) const {
  double p, q;
  pdf_pair(outcome, p, q);
  log_plus = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  log_minus = q > 0.0 ? std::log(q) : -std::numeric_limits<double>::infinity();
}

double TabulatedReadout::cdf(double outcome, QubitState state) const {
  if (outcome <= grid_.front()) return 0.0;
  if (outcome >= grid_.back()) return 1.0;
  const std::size_t j = segment_index(grid_, outcome);
  const auto& pdf_v = pdf_table(state);
  const auto& cdf_v = cdf_table(state);
  // Exact integral of the piecewise-linear density within the segment.
  const double h = grid_[j + 1] - grid_[j];
  const double dx = outcome - grid_[j];
  const double slope = (pdf_v[j + 1] - pdf_v[j]) / h;
  return std::min(1.0, cdf_v[j] + dx * (pdf_v[j] + 0.5 * slope * dx));
}

double TabulatedReadout::quantile(double p, QubitState state) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("TabulatedReadout::quantile: p must lie in [0, 1]");
  }
  const auto& inv = inverse_cdf_table(state);
  const double pos = p * static_cast<double>(inv.size() - 1);
  const std::size_t k = std::min(static_cast<std::size_t>(pos), inv.size() - 2);
  const double frac = pos - static_cast<double>(k);
  return inv[k] + frac * (inv[k + 1] - inv[k]);
}

std::pair<double, double> TabulatedReadout::support() const {
  return {grid_.front(), grid_.back()};
}

double TabulatedReadout::integrate_over_support(
    const std::function<double(double)>& g, const QuadratureSpec& spec) const {
  // The stored grid anchors the subdivision; each cell is refined to the
  // shared tolerance. Integrands built from the tables are smooth inside
  // cells and kinked only at the nodes.
  QuadratureSpec cell_spec = spec;
  cell_spec.abs_tol = spec.abs_tol / static_cast<double>(grid_.size());
  cell_spec.max_subdivisions = 64;
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < grid_.size(); ++j) {
    const QuadratureResult r = integrate(g, grid_[j], grid_[j + 1], cell_spec);
    if (!r.converged) {
      throw QuadratureError("TabulatedReadout: cell integral did not converge", r);
    }
    total += r.value;
  }
  return total;
}

double TabulatedReadout::optimal_threshold() const {
  // Average error as a function of the threshold, evaluated on the grid from
  // the stored cdf tables; the minimizer is the pdf crossing point.
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double err = 0.5 * (cdf_plus_[i] + 1.0 - cdf_minus_[i]);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  if (best == 0 || best + 1 == grid_.size()) {
    std::ostringstream msg;
    msg << "TabulatedReadout::optimal_threshold: no interior crossing of the "
           "conditional densities in ["
        << grid_.front() << ", " << grid_.back() << "]";
    throw std::runtime_error(msg.str());
  }
  return grid_[best];
}

// ---------------------------------------------------------------------------
// JSON serialization

std::string TabulatedReadout::to_json_string() const {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["grid"] = grid_;
  doc["pdf_plus"] = pdf_plus_;
  doc["pdf_minus"] = pdf_minus_;
  if (params_) {
    doc["params"] = {{"mean_turn_on", params_->mean_turn_on},
                     {"mean_duration", params_->mean_duration},
                     {"snr", params_->snr},
                     {"meas_time", params_->meas_time},
                     {"bin_time", params_->bin_time}};
  } else {
    doc["params"] = nullptr;
  }
  doc["provenance"] = {{"n_samples", provenance_.n_samples}, {"seed", provenance_.seed}};
  return doc.dump();
}

TabulatedReadout TabulatedReadout::from_json_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("TabulatedReadout: invalid JSON: ") + e.what());
  }
  if (!doc.contains("version") || doc["version"].get<int>() != 1) {
    throw std::invalid_argument("TabulatedReadout: unsupported document version");
  }
  auto grid = doc.at("grid").get<std::vector<double>>();
  auto pdf_plus = doc.at("pdf_plus").get<std::vector<double>>();
  auto pdf_minus = doc.at("pdf_minus").get<std::vector<double>>();
  std::optional<PeakSignalParams> params;
  if (doc.contains("params") && !doc["params"].is_null()) {
    const auto& p = doc["params"];
    params = PeakSignalParams{p.at("mean_turn_on").get<double>(),
                              p.at("mean_duration").get<double>(),
                              p.at("snr").get<double>(),
                              p.at("meas_time").get<double>(),
                              p.at("bin_time").get<double>()};
  }
  TabulationProvenance prov;
  if (doc.contains("provenance")) {
    prov.n_samples = doc["provenance"].value("n_samples", std::int64_t{0});
    prov.seed = doc["provenance"].value("seed", std::uint64_t{0});
  }
  return TabulatedReadout(std::move(grid), std::move(pdf_plus), std::move(pdf_minus),
                          params, prov);
}

void TabulatedReadout::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("TabulatedReadout: cannot open " + path + " for writing");
  }
  out << to_json_string();
  out << '\n';
}

TabulatedReadout TabulatedReadout::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("TabulatedReadout: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

// ---------------------------------------------------------------------------
// Tabulation pipeline

TabulatedReadout tabulate_peak_distributions(const PeakSignalParams& params,
                                             std::int64_t n_samples, int grid_size,
                                             std::uint64_t seed) {
  params.validate();
  if (n_samples < 100) {
    throw std::invalid_argument("tabulate_peak_distributions: n_samples too small");
  }
  if (grid_size < 8) {
    throw std::invalid_argument("tabulate_peak_distributions: grid_size too small");
  }

  std::vector<double> samples_plus(n_samples);
  std::vector<double> samples_minus(n_samples);
  const std::uint64_t seed_plus = derive_seed(seed, 1);
  const std::uint64_t seed_minus = derive_seed(seed, 2);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng_plus = Rng::for_stream(seed_plus, static_cast<std::uint64_t>(i));
    Rng rng_minus = Rng::for_stream(seed_minus, static_cast<std::uint64_t>(i));
    samples_plus[i] = simulate_peak_trace(params, QubitState::plus, rng_plus);
    samples_minus[i] = simulate_peak_trace(params, QubitState::minus, rng_minus);
  }

  const auto [plus_lo, plus_hi] = std::minmax_element(samples_plus.begin(), samples_plus.end());
  const auto [minus_lo, minus_hi] = std::minmax_element(samples_minus.begin(), samples_minus.end());
  const double lo = std::min(*plus_lo, *minus_lo);
  const double hi = std::max(*plus_hi, *minus_hi);
  if (!(hi > lo)) {
    throw std::runtime_error("tabulate_peak_distributions: degenerate sample range");
  }

  const double width = (hi - lo) / grid_size;
  std::vector<double> grid(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    grid[i] = lo + (i + 0.5) * width;
  }

  TabulationDiagnostics diagnostics;
  auto histogram_density = [&](const std::vector<double>& samples, const char* label,
                               double& lost_weight) {
    std::vector<std::int64_t> counts(grid_size, 0);
    for (const double x : samples) {
      const int idx = std::min(grid_size - 1, static_cast<int>((x - lo) / width));
      counts[idx] += 1;
    }
    std::vector<double> pdf(grid_size);
    for (int i = 0; i < grid_size; ++i) {
      pdf[i] = static_cast<double>(counts[i]) /
               (static_cast<double>(n_samples) * width);
    }

    // Cumulative trapezoid mass used for the tail cut and bulk window.
    std::vector<double> cum(grid_size, 0.0);
    for (int i = 1; i < grid_size; ++i) {
      cum[i] = cum[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * width;
    }
    const double total = cum.back();

    // Cut each tail while the removed trapezoid mass stays below 1e-7 of the
    // total, then renormalize.
    int left = 0;
    while (left + 2 < grid_size &&
           cum[left] + 0.5 * pdf[left] * width <= kTailCutWeight * total) {
      ++left;
    }
    int right = grid_size - 1;
    while (right > left + 1 &&
           (total - cum[right]) + 0.5 * pdf[right] * width <= kTailCutWeight * total) {
      --right;
    }
    std::vector<double> cut_pdf = pdf;
    for (int i = 0; i < left; ++i) cut_pdf[i] = 0.0;
    for (int i = right + 1; i < grid_size; ++i) cut_pdf[i] = 0.0;
    double cut_total = 0.0;
    for (int i = 1; i < grid_size; ++i) {
      cut_total += 0.5 * (cut_pdf[i] + cut_pdf[i - 1]) * width;
    }
    lost_weight = (total - cut_total) / total;

    // Sparse-statistics warning over the bulk of the distribution.
    int sparse = 0;
    for (int i = 0; i < grid_size; ++i) {
      if (cum[i] >= 0.01 * total && cum[i] <= 0.99 * total && counts[i] < 10) {
        ++sparse;
      }
    }
    if (sparse > 0) {
      std::ostringstream msg;
      msg << "state " << label << ": " << sparse
          << " interior bins hold fewer than 10 samples; increase n_samples";
      diagnostics.warnings.push_back(msg.str());
    }

    for (double& v : cut_pdf) v /= cut_total;
    return cut_pdf;
  };

  std::vector<double> pdf_plus =
      histogram_density(samples_plus, "+", diagnostics.lost_weight_plus);
  std::vector<double> pdf_minus =
      histogram_density(samples_minus, "-", diagnostics.lost_weight_minus);

  TabulationProvenance provenance{n_samples, seed};
  return TabulatedReadout(std::move(grid), std::move(pdf_plus), std::move(pdf_minus),
                          params, provenance, std::move(diagnostics));
}

// ---------------------------------------------------------------------------
// Thresholding and calibration

ConditionalErrorRates conditional_error_rates(const ReadoutModel& readout,
                                              double threshold) {
  ConditionalErrorRates rates;
  rates.threshold = threshold;
  rates.eps_plus = readout.cdf(threshold, QubitState::plus);
  rates.eps_minus = 1.0 - readout.cdf(threshold, QubitState::minus);
  return rates;
}

double optimal_threshold(const ReadoutModel& readout) {
  return readout.optimal_threshold();
}

PeakSearchGrids default_peak_grids(const PeakSignalParams& base) {
  PeakSearchGrids grids;
  for (int k = 2; k <= 20; k += 2) {
    grids.meas_times.push_back(k * base.mean_turn_on);
  }
  constexpr int kBinPoints = 16;
  const double lo = 0.05, hi = 8.0;
  for (int i = 0; i < kBinPoints; ++i) {
    const double t = static_cast<double>(i) / (kBinPoints - 1);
    grids.bin_times.push_back(base.mean_turn_on * lo * std::pow(hi / lo, t));
  }
  return grids;
}

namespace {

// Scores every listed candidate (average single-shot error at the scanned
// threshold) with `samples` traces per state. Failed candidates score +inf.
void score_candidates(const std::vector<PeakSignalParams>& candidates,
                      const std::vector<std::int64_t>& which,
                      std::vector<double>& errors, std::int64_t samples,
                      int grid_size, std::uint64_t stage_seed, int workers) {
  parallel_for(static_cast<std::int64_t>(which.size()), workers, [&](std::int64_t k) {
    const std::int64_t i = which[k];
    const std::uint64_t candidate_seed =
        derive_seed(stage_seed, static_cast<std::uint64_t>(i));
    try {
      const TabulatedReadout tab = tabulate_peak_distributions(
          candidates[i], samples, grid_size, candidate_seed);
      const double nu = tab.optimal_threshold();
      errors[i] = conditional_error_rates(tab, nu).average();
    } catch (const std::exception&) {
      errors[i] = std::numeric_limits<double>::infinity();
    }
  });
}

// Indices of the m best-scoring candidates, ties broken by index.
std::vector<std::int64_t> best_indices(const std::vector<std::int64_t>& which,
                                       const std::vector<double>& errors,
                                       std::size_t m) {
  std::vector<std::int64_t> order = which;
  std::sort(order.begin(), order.end(), [&errors](std::int64_t a, std::int64_t b) {
    if (errors[a] != errors[b]) return errors[a] < errors[b];
    return a < b;
  });
  if (order.size() > m) order.resize(m);
  return order;
}

}  // namespace

PeakCalibration optimize_peak_parameters(const PeakSignalParams& base,
                                         const PeakSearchGrids& grids,
                                         std::uint64_t seed,
                                         const PeakCalibrationOptions& options) {
  if (grids.meas_times.empty() || grids.bin_times.empty()) {
    throw std::invalid_argument("optimize_peak_parameters: empty search grid");
  }

  // Candidates with the same (bin_time, num_bins) produce the same observable
  // regardless of meas_time; keep the first occurrence only.
  std::vector<PeakSignalParams> candidates;
  std::vector<std::pair<double, int>> seen;
  for (const double meas : grids.meas_times) {
    for (const double bin : grids.bin_times) {
      if (bin > meas) continue;
      PeakSignalParams p = base;
      p.meas_time = meas;
      p.bin_time = bin;
      const std::pair<double, int> key{bin, p.num_bins()};
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      candidates.push_back(p);
    }
  }
  if (candidates.empty()) {
    throw std::invalid_argument("optimize_peak_parameters: no feasible (meas_time, bin_time) candidate");
  }

  const auto n = static_cast<std::int64_t>(candidates.size());
  std::vector<double> errors(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> all(n);
  for (std::int64_t i = 0; i < n; ++i) all[i] = i;

  // Coarse scan, then two re-scoring rounds over a shrinking shortlist.
  score_candidates(candidates, all, errors, options.search_samples,
                   options.grid_size, derive_seed(seed, 0x5CA1), options.workers);
  std::vector<std::int64_t> shortlist =
      best_indices(all, errors, static_cast<std::size_t>(std::max(options.refine_keep, 1)));
  if (!std::isfinite(errors[shortlist.front()])) {
    throw std::runtime_error("optimize_peak_parameters: every candidate failed to tabulate");
  }
  if (shortlist.size() > 1 && options.refine_samples > options.search_samples) {
    score_candidates(candidates, shortlist, errors, options.refine_samples,
                     options.grid_size, derive_seed(seed, 0x3EF1E), options.workers);
    shortlist = best_indices(shortlist, errors, 2);
  }
  if (shortlist.size() > 1 && options.decide_samples > options.refine_samples) {
    score_candidates(candidates, shortlist, errors, options.decide_samples,
                     options.grid_size, derive_seed(seed, 0xD0E1), options.workers);
    shortlist = best_indices(shortlist, errors, 1);
  }
  const std::int64_t best = shortlist.front();
  if (!std::isfinite(errors[best])) {
    throw std::runtime_error("optimize_peak_parameters: the shortlisted candidates failed to tabulate");
  }

  TabulatedReadout final_tab = tabulate_peak_distributions(
      candidates[best], options.final_samples, options.grid_size,
      derive_seed(seed, 0xF17A1ULL));
  const double nu = final_tab.optimal_threshold();
  const ConditionalErrorRates rates = conditional_error_rates(final_tab, nu);
  return PeakCalibration{candidates[best], nu, rates, std::move(final_tab)};
}

}  // namespace softdecode
