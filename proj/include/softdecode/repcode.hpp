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

#ifndef SOFTDECODE_REPCODE_HPP
#define SOFTDECODE_REPCODE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "softdecode/readout.hpp"
#include "softdecode/rng.hpp"

namespace softdecode {

/// Ordered analog outcomes of one repetition-code shot.
using MeasurementRecord = std::vector<double>;

/// Uncorrelated bit flips with probability eta applied to each physical qubit
/// during encoding; mixes the conditional outcome distributions to
/// P(O|1) = (1-eta) P(O|+) + eta P(O|-) and vice versa.
struct EncodingChannel {
  double eta = 0.0;
  void validate() const;
};

/// log Λ for a decoding decision; ±inf is legal when a conditional density
/// vanishes with eta = 0. `uninformative` counts outcomes where both
/// densities vanished (they contribute nothing to the decision).
struct LogLikelihoodRatio {
  double value = 0.0;
  int uninformative = 0;
};

struct ErrorRateEstimate {
  std::int64_t errors = 0;
  std::int64_t trials = 0;
  double rate() const { return static_cast<double>(errors) / static_cast<double>(trials); }
  double std_err() const;
};

enum class DecodingMode { analog, thresholded };

/// Likelihood-ratio contribution of one analog outcome, with the encoding
/// channel mixed in:
/// ln[((1-η)P(O|+)+ηP(O|-)) / ((1-η)P(O|-)+ηP(O|+))], evaluated in log
/// domain. Outcomes are clamped to the readout support first.
double analog_outcome_llr(const ReadoutModel& readout, double outcome,
                          const EncodingChannel& channel, int* uninformative = nullptr);

/// Soft decoder input: sum of analog_outcome_llr over the record.
LogLikelihoodRatio log_lr_analog(const ReadoutModel& readout,
                                 const MeasurementRecord& record,
                                 const EncodingChannel& channel = {});

/// Hard decoder input from the thresholded counts:
/// n_plus·ln[((1-η)(1-ε₊)+ηε₋)/((1-η)ε₋+η(1-ε₊))]
///   + (n_total-n_plus)·ln[((1-η)ε₊+η(1-ε₋))/((1-η)(1-ε₋)+ηε₊)].
LogLikelihoodRatio log_lr_thresholded(const ConditionalErrorRates& rates,
                                      int n_plus, int n_total,
                                      const EncodingChannel& channel = {});

/// Logical bit from a log likelihood ratio: 1 if positive, 0 if negative,
/// fair coin on an exact tie (a tie carries no information).
int decide(const LogLikelihoodRatio& lr, Rng& rng);

/// Majority-vote (thresholded) repetition-code error rate for the Gaussian
/// readout: I_eps((M+1)/2, (M+1)/2) with eps = erfc(sqrt(r/2))/2 and M = n for
/// odd n, n-1 for even n (an even-n tie carries no information, so the rate
/// matches the preceding odd n).
double gaussian_majority_error(double snr, int n);

/// Soft-decoded repetition-code error rate for the Gaussian readout:
/// erfc(sqrt(n r / 2))/2.
double gaussian_soft_error(double snr, int n);

/// Large-r approximations of the two rates above (odd n for the majority
/// form); kept as documented consistency checks of the exact expressions.
double gaussian_majority_error_asymptotic(double snr, int n);
double gaussian_soft_error_asymptotic(double snr, int n);

/// Number of soft-decoded qubits matching the error rate of n_thresholded
/// majority-vote qubits, to subleading order in 1/r:
/// (n_c+1)/2 + (n_c-1)/2 · ln(r)/r. Requires odd n_thresholded.
double asymptotic_soft_qubit_count(int n_thresholded, double snr);

/// Smallest n in [1, n_max] with error_fn(n) <= target; error_fn must be
/// non-increasing. Throws std::runtime_error if the target is unreachable.
int min_qubits_to_reach(const std::function<double(int)>& error_fn, double target,
                        int n_max);

struct McOptions {
  int workers = 1;
};

/// Monte Carlo repetition-code error rate. Each trial draws the logical bit
/// uniformly, samples n outcomes from the eta-mixed conditional distribution
/// (per-qubit Bernoulli flip, then the flipped state's sampler) and decodes
/// with the chosen mode. Per-trial random streams derived from (seed, trial)
/// and integer error accumulation make the estimate identical for any worker
/// count.
ErrorRateEstimate estimate_error_rate_mc(const ReadoutModel& readout,
                                         DecodingMode mode, int n,
                                         const EncodingChannel& channel,
                                         std::int64_t trials, std::uint64_t seed,
                                         const McOptions& options = {});

}  // namespace softdecode

#endif  // SOFTDECODE_REPCODE_HPP
