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

#ifndef SOFTDECODE_READOUT_HPP
#define SOFTDECODE_READOUT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "softdecode/numerics.hpp"
#include "softdecode/rng.hpp"

namespace softdecode {

/// Physical qubit state conditioning a readout outcome.
enum class QubitState { minus = 0, plus = 1 };

inline QubitState flipped(QubitState s) {
  return s == QubitState::plus ? QubitState::minus : QubitState::plus;
}

/// Single-shot error rates of a thresholded readout:
/// eps_plus  = P(assign c_- | state +), eps_minus = P(assign c_+ | state -).
struct ConditionalErrorRates {
  double eps_plus = 0.0;
  double eps_minus = 0.0;
  double threshold = 0.0;
  double average() const { return 0.5 * (eps_plus + eps_minus); }
};

/// A readout channel: the pair of conditional outcome distributions
/// P(O|+), P(O|-) plus samplers. Immutable after construction, shareable
/// across worker threads; sampling requires a caller-owned Rng stream.
class ReadoutModel {
 public:
  virtual ~ReadoutModel() = default;

  virtual double pdf(double outcome, QubitState state) const = 0;
  virtual double log_pdf(double outcome, QubitState state) const;
  /// Both conditional densities at once (single table lookup for tabulated
  /// models; hot path of the analog decoders).
  virtual void pdf_pair(double outcome, double& plus, double& minus) const;
  /// Log-density pair; -inf where the density vanishes. Kept in log domain so
  /// Gaussian tails far beyond the support never underflow to spurious zeros.
  virtual void log_pdf_pair(double outcome, double& log_plus, double& log_minus) const;
  virtual double cdf(double outcome, QubitState state) const = 0;
  virtual double quantile(double p, QubitState state) const = 0;
  virtual double sample(QubitState state, Rng& rng) const;

  /// Effective support for quadrature and outcome clamping: outside this
  /// interval both pdfs are below 1e-14 of their peak (or identically zero).
  virtual std::pair<double, double> support() const = 0;
  double clamp_to_support(double outcome) const;

  /// Exact conditional moments where a closed form exists, quadrature
  /// otherwise.
  virtual double conditional_mean(QubitState state) const;
  virtual double conditional_second_moment(QubitState state) const;

  /// Integral of g over the effective support, to quadrature tolerance.
  virtual double integrate_over_support(const std::function<double(double)>& g,
                                        const QuadratureSpec& spec = {}) const = 0;

  /// Threshold minimizing the average single-shot error (eps_+ + eps_-)/2.
  virtual double optimal_threshold() const = 0;
};

/// Idealized Gaussian readout: P(O|±) = sqrt(r/2π) exp(-(O∓1)² r/2) with
/// power signal-to-noise ratio r, signal normalized to mean ±1.
class GaussianReadout final : public ReadoutModel {
 public:
  explicit GaussianReadout(double snr);

  double snr() const { return snr_; }
  double mean(QubitState state) const { return state == QubitState::plus ? 1.0 : -1.0; }
  double sigma() const { return sigma_; }

  double pdf(double outcome, QubitState state) const override;
  double log_pdf(double outcome, QubitState state) const override;
  void log_pdf_pair(double outcome, double& log_plus, double& log_minus) const override;
  double cdf(double outcome, QubitState state) const override;
  double quantile(double p, QubitState state) const override;
  double sample(QubitState state, Rng& rng) const override;
  std::pair<double, double> support() const override;
  double conditional_mean(QubitState state) const override { return mean(state); }
  double conditional_second_moment(QubitState) const override { return 1.0 + 1.0 / snr_; }
  double integrate_over_support(const std::function<double(double)>& g,
                                const QuadratureSpec& spec = {}) const override;
  double optimal_threshold() const override { return 0.0; }

 private:
  double snr_;
  double sigma_;
};

/// Parameters of the generative peak-signal process. The excited-state signal
/// is a square pulse of height +1 over baseline -1, with exponentially
/// distributed turn-on time (mean `mean_turn_on`) and duration (mean
/// `mean_duration`). The record of length `meas_time` is split into
/// floor(meas_time / bin_time) bins; the observable is the maximum bin
/// average. White noise is calibrated so that a time average over a window T
/// has variance mean_duration / (snr * T): integrating over T = mean_duration
/// reproduces the Gaussian-readout convention (means ±1, variance 1/snr).
struct PeakSignalParams {
  double mean_turn_on = 1.0;
  double mean_duration = 4.0;
  double snr = 2.0;
  double meas_time = 8.0;
  double bin_time = 1.0;

  int num_bins() const;
  double bin_sigma() const;
  void validate() const;  // throws std::invalid_argument
};

struct TabulationProvenance {
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct TabulationDiagnostics {
  double lost_weight_plus = 0.0;   // tail weight removed before renormalizing
  double lost_weight_minus = 0.0;
  std::vector<std::string> warnings;
};

/// Readout defined by a pair of tabulated densities on a shared grid, with
/// cumulative tables and piecewise-linear inverse-CDF tables on a uniform
/// probability grid for fast sampling.
class TabulatedReadout final : public ReadoutModel {
 public:
  /// Builds cdf and inverse-cdf tables and validates all invariants:
  /// strictly increasing grid (length >= 2), non-negative densities, each
  /// trapezoid-rule normalization within 1e-6 of one.
  TabulatedReadout(std::vector<double> grid, std::vector<double> pdf_plus,
                   std::vector<double> pdf_minus,
                   std::optional<PeakSignalParams> params = std::nullopt,
                   TabulationProvenance provenance = {},
                   TabulationDiagnostics diagnostics = {});

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& pdf_table(QubitState state) const;
  const std::vector<double>& cdf_table(QubitState state) const;
  const std::vector<double>& inverse_cdf_table(QubitState state) const;
  const std::optional<PeakSignalParams>& params() const { return params_; }
  const TabulationProvenance& provenance() const { return provenance_; }
  const TabulationDiagnostics& diagnostics() const { return diagnostics_; }
  double grid_step() const;

  double pdf(double outcome, QubitState state) const override;
  void pdf_pair(double outcome, double& plus, double& minus) const override;
  void log_pdf_pair(double outcome, double& log_plus, double& log_minus) const override;
  double cdf(double outcome, QubitState state) const override;
  double quantile(double p, QubitState state) const override;
  std::pair<double, double> support() const override;
  double integrate_over_support(const std::function<double(double)>& g,
                                const QuadratureSpec& spec = {}) const override;
  double optimal_threshold() const override;

  /// Versioned JSON document: {version, grid, pdf_plus, pdf_minus, params,
  /// provenance{n_samples, seed}}. Loading re-runs full invariant validation.
  std::string to_json_string() const;
  static TabulatedReadout from_json_string(const std::string& text);
  void save_file(const std::string& path) const;
  static TabulatedReadout load_file(const std::string& path);

 private:
  std::vector<double> grid_;
  std::vector<double> pdf_plus_, pdf_minus_;
  std::vector<double> cdf_plus_, cdf_minus_;
  std::vector<double> inv_cdf_plus_, inv_cdf_minus_;
  std::optional<PeakSignalParams> params_;
  TabulationProvenance provenance_;
  TabulationDiagnostics diagnostics_;
};

/// One draw of the peak-signal observablement: the maximum bin average of the
/// noisy trace conditioned on the qubit state.
double simulate_peak_trace(const PeakSignalParams& params, QubitState state, Rng& rng);

/// Monte Carlo tabulation of the peak-signal distributions: histograms of
/// `n_samples` simulated traces per state on a shared `grid_size`-bin grid,
/// tails cut at cumulative weight 1e-7 per side, renormalized, with cdf and
/// inverse-cdf tables. Interior bins of the bulk (1%..99% quantile range)
/// holding fewer than 10 samples produce a warning in the diagnostics.
TabulatedReadout tabulate_peak_distributions(const PeakSignalParams& params,
                                             std::int64_t n_samples, int grid_size,
                                             std::uint64_t seed);

/// Single-shot error rates for thresholding at `threshold`:
/// eps_plus = ∫_{-inf}^{nu} P(O|+) dO, eps_minus = ∫_{nu}^{inf} P(O|-) dO.
ConditionalErrorRates conditional_error_rates(const ReadoutModel& readout,
                                              double threshold);

/// Free-function form of ReadoutModel::optimal_threshold.
double optimal_threshold(const ReadoutModel& readout);

/// Candidate (meas_time, bin_time) grids for the calibration search, in
/// absolute time units.
struct PeakSearchGrids {
  std::vector<double> meas_times;
  std::vector<double> bin_times;
};

/// Default search grids: meas_time/mean_turn_on in {2, 4, ..., 20},
/// bin_time/mean_turn_on log-spaced over [0.05, 8] with 16 points. The upper
/// bin-time end matters: at low SNR the optimum is a single long integration
/// window (bin_time of the order of the mean pulse duration), and a grid
/// capped below it returns a boundary artifact.
PeakSearchGrids default_peak_grids(const PeakSignalParams& base);

struct PeakCalibration {
  PeakSignalParams params;
  double threshold = 0.0;
  ConditionalErrorRates rates;
  TabulatedReadout readout;
};

struct PeakCalibrationOptions {
  std::int64_t search_samples = 60'000;    // per state, coarse scan of every candidate
  std::int64_t refine_samples = 600'000;   // top `refine_keep` candidates
  std::int64_t decide_samples = 10'000'000;  // final duel between the top two
  int refine_keep = 8;
  std::int64_t final_samples = 1'000'000;  // tabulation of the winner
  int grid_size = 512;
  int workers = 1;
};

/// Grid search over (meas_time, bin_time) minimizing the average single-shot
/// error. Candidates that bin the record identically are deduplicated; the
/// coarse scan is followed by two re-scoring rounds with growing sample
/// counts, because distinct binnings can sit within ~1e-3 of each other in
/// single-shot error while differing substantially as repetition-code
/// readouts. The winner is re-tabulated with `final_samples` and its
/// threshold re-optimized. Deterministic for a fixed seed at any worker
/// count.
PeakCalibration optimize_peak_parameters(const PeakSignalParams& base,
                                         const PeakSearchGrids& grids,
                                         std::uint64_t seed,
                                         const PeakCalibrationOptions& options = {});

/// Derives an independent sub-seed for a named purpose (splitmix64 of
/// seed ^ tag); used to decouple the random streams of pipeline stages.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace softdecode

#endif  // SOFTDECODE_READOUT_HPP
