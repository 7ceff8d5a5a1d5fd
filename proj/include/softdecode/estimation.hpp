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

#ifndef SOFTDECODE_ESTIMATION_HPP
#define SOFTDECODE_ESTIMATION_HPP

#include <cstdint>
#include <string>

#include "softdecode/readout.hpp"
#include "softdecode/repcode.hpp"

namespace softdecode {

/// The three estimators of s0 = <sigma_z> compared throughout: bias-corrected
/// thresholded average (TA), rescaled soft average (SA), and the
/// maximum-likelihood estimate applied to the analog outcomes (SD).
enum class EstimationMethod { thresholded_average, soft_average, soft_decoded };

std::string method_name(EstimationMethod method);             // "TA" / "SA" / "SD"
EstimationMethod method_from_name(const std::string& name);

/// Binary outcome values making the thresholded average unbiased:
/// c± = ±(1 ± (ε₊ - ε₋)) / (1 - (ε₊ + ε₋)).
/// Throws std::invalid_argument when ε₊ + ε₋ >= 1 (uninformative readout).
struct BiasCorrectedOutcomes {
  double c_plus = 1.0;
  double c_minus = -1.0;
};
BiasCorrectedOutcomes bias_corrected_outcomes(const ConditionalErrorRates& rates);

/// Mixture density P(O|s0) = (1+s0)/2 P(O|+) + (1-s0)/2 P(O|-).
double mixture_pdf(const ReadoutModel& readout, double outcome, double s0);

/// Thresholded average: threshold each outcome at nu, map to the
/// bias-corrected c±, average. The public estimator clamps to [-1, 1]; the
/// unclamped value backs the clamp bookkeeping and the unbiasedness checks.
double unclamped_thresholded_average(const MeasurementRecord& record,
                                     const ReadoutModel& readout, double threshold);
double thresholded_average(const MeasurementRecord& record,
                           const ReadoutModel& readout, double threshold);

/// Soft average of rescaled outcomes (O - B)/A with A = (<O>₊ - <O>₋)/2 and
/// B = (<O>₊ + <O>₋)/2. Throws std::invalid_argument when A = 0 (states
/// indistinguishable in mean).
double unclamped_soft_average(const MeasurementRecord& record,
                              const ReadoutModel& readout);
double soft_average(const MeasurementRecord& record, const ReadoutModel& readout);

/// Maximum-likelihood estimate over s in [-1, 1] of
/// l(s) = N⁻¹ Σ ln[(1+s)/2 P(O_i|+) + (1-s)/2 P(O_i|-)],
/// solved by sign bisection of the closed-form score; boundary maximizers are
/// returned exactly as ±1.
double mle_soft_decoded(const MeasurementRecord& record, const ReadoutModel& readout);

/// Overlap integral I = ∫ P(O|+) P(O|-) / P(O|s0) dO in [0, 1]; 0 for
/// perfectly separated states, 1 for identical conditional densities.
/// Requires |s0| < 1.
double overlap_integral(const ReadoutModel& readout, double s0);

/// Fisher information of P(O|s0): closed overlap form (1 - I)/(1 - s0²).
double fisher_information(const ReadoutModel& readout, double s0);
/// Same quantity from the score-squared expectation, kept as an independent
/// route for cross-checking: ∫ [P(O|+) - P(O|-)]² / (4 P(O|s0)) dO.
double fisher_information_score(const ReadoutModel& readout, double s0);

/// Normalized asymptotic MSE (N·ζ) of the chosen estimator:
///   TA: P(c₊|s0) c₊² + P(c₋|s0) c₋² - s0²
///   SA: (<O²>_{s0} - (A s0 + B)²) / A²
///   SD: (1 - s0²)/(1 - I)
double asymptotic_mse(const ReadoutModel& readout, double s0, EstimationMethod method);

struct MseReport {
  EstimationMethod method = EstimationMethod::soft_decoded;
  int n_per_record = 0;
  std::int64_t n_records = 0;
  double variance = 0.0;
  double bias = 0.0;
  double mse = 0.0;             // variance + bias², exactly as computed
  double normalized_mse = 0.0;  // n_per_record * mse
  std::int64_t clamped = 0;     // TA/SA estimates pulled back to [-1, 1]
  std::int64_t failures = 0;    // estimator failures, excluded from the stats
};

/// Monte Carlo MSE of an estimator: n_records records of n_per_record i.i.d.
/// draws from the mixture P(O|s0). Per-record streams and a fixed-order
/// reduction over pre-indexed estimates make the report identical for any
/// worker count.
MseReport mse_monte_carlo(const ReadoutModel& readout, double s0,
                          EstimationMethod method, int n_per_record,
                          std::int64_t n_records, std::uint64_t seed,
                          const McOptions& options = {});

}  // namespace softdecode

#endif  // SOFTDECODE_ESTIMATION_HPP
