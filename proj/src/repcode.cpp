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

#include "softdecode/repcode.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "softdecode/numerics.hpp"
#include "softdecode/parallel.hpp"

namespace softdecode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; tolerates -inf operands.
double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

void EncodingChannel::validate() const {
  if (!(eta >= 0.0 && eta <= 0.5)) {
    throw std::invalid_argument("EncodingChannel: eta must lie in [0, 0.5]");
  }
}

double ErrorRateEstimate::std_err() const {
  const double p = rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double analog_outcome_llr(const ReadoutModel& readout, double outcome,
                          const EncodingChannel& channel, int* uninformative) {
  const double o = readout.clamp_to_support(outcome);
  double lp, lq;
  readout.log_pdf_pair(o, lp, lq);
  if (lp == -kInf && lq == -kInf) {
    if (uninformative) ++(*uninformative);
    return 0.0;
  }
  if (channel.eta == 0.0) {
    return lp - lq;  // ±inf when exactly one density vanishes
  }
  const double log_keep = std::log1p(-channel.eta);
  const double log_flip = std::log(channel.eta);
  const double num = log_add_exp(log_keep + lp, log_flip + lq);
  const double den = log_add_exp(log_keep + lq, log_flip + lp);
  return num - den;
}

LogLikelihoodRatio log_lr_analog(const ReadoutModel& readout,
                                 const MeasurementRecord& record,
                                 const EncodingChannel& channel) {
  channel.validate();
  LogLikelihoodRatio lr;
  for (const double outcome : record) {
    lr.value += analog_outcome_llr(readout, outcome, channel, &lr.uninformative);
  }
  return lr;
}

LogLikelihoodRatio log_lr_thresholded(const ConditionalErrorRates& rates,
                                      int n_plus, int n_total,
                                      const EncodingChannel& channel) {
  channel.validate();
  if (n_plus < 0 || n_total < 1 || n_plus > n_total) {
    throw std::invalid_argument("log_lr_thresholded: need 0 <= n_plus <= n_total, n_total >= 1");
  }
  const double eta = channel.eta;
  const double keep = 1.0 - eta;
  const double weight_plus =
      std::log(keep * (1.0 - rates.eps_plus) + eta * rates.eps_minus) -
      std::log(keep * rates.eps_minus + eta * (1.0 - rates.eps_plus));
  const double weight_minus =
      std::log(keep * rates.eps_plus + eta * (1.0 - rates.eps_minus)) -
      std::log(keep * (1.0 - rates.eps_minus) + eta * rates.eps_plus);

  LogLikelihoodRatio lr;
  lr.value = 0.0;
  if (n_plus > 0) lr.value += n_plus * weight_plus;
  if (n_total - n_plus > 0) lr.value += (n_total - n_plus) * weight_minus;
  if (std::isnan(lr.value)) {
    // Perfect readout with contradictory counts: a zero-probability record
    // under both hypotheses. Treat as uninformative.
    lr.value = 0.0;
    lr.uninformative = n_total;
  }
  return lr;
}

int decide(const LogLikelihoodRatio& lr, Rng& rng) {
  if (lr.value > 0.0) return 1;
  if (lr.value < 0.0) return 0;
  return rng.bernoulli(0.5) ? 1 : 0;
}

double gaussian_majority_error(double snr, int n) {
  if (!(snr > 0.0) || n < 1) {
    throw std::invalid_argument("gaussian_majority_error: need snr > 0 and n >= 1");
  }
  const double eps = 0.5 * softdecode::erfc(std::sqrt(0.5 * snr));
  const int n_odd = (n % 2 == 1) ? n : n - 1;
  const double half = 0.5 * (n_odd + 1);
  return regularized_incomplete_beta(eps, half, half);
}

double gaussian_soft_error(double snr, int n) {
  if (!(snr > 0.0) || n < 1) {
    throw std::invalid_argument("gaussian_soft_error: need snr > 0 and n >= 1");
  }
  return 0.5 * softdecode::erfc(std::sqrt(0.5 * n * snr));
}

double gaussian_majority_error_asymptotic(double snr, int n) {
  if (n % 2 == 0) {
    throw std::invalid_argument("gaussian_majority_error_asymptotic: n must be odd");
  }
  const double half = 0.5 * (n + 1);
  const double log_binom =
      std::lgamma(n + 1.0) - std::lgamma(half + 1.0) - std::lgamma(n - half + 1.0);
  return std::exp(log_binom - 0.25 * (n + 1) * std::log(2.0 * 3.14159265358979323846 * snr) -
                  0.25 * (n + 1) * snr);
}

double gaussian_soft_error_asymptotic(double snr, int n) {
  return std::exp(-0.5 * n * snr) / std::sqrt(2.0 * 3.14159265358979323846 * n * snr);
}

double asymptotic_soft_qubit_count(int n_thresholded, double snr) {
  if (n_thresholded < 1 || n_thresholded % 2 == 0) {
    throw std::invalid_argument("asymptotic_soft_qubit_count: n_thresholded must be odd and >= 1");
  }
  if (!(snr > 0.0)) {
    throw std::invalid_argument("asymptotic_soft_qubit_count: snr must be positive");
  }
  return 0.5 * (n_thresholded + 1) +
         0.5 * (n_thresholded - 1) * std::log(snr) / snr;
}

int min_qubits_to_reach(const std::function<double(int)>& error_fn, double target,
                        int n_max) {
  for (int n = 1; n <= n_max; ++n) {
    if (error_fn(n) <= target) return n;
  }
  throw std::runtime_error("min_qubits_to_reach: target error rate unreachable within n_max");
}

ErrorRateEstimate estimate_error_rate_mc(const ReadoutModel& readout,
                                         DecodingMode mode, int n,
                                         const EncodingChannel& channel,
                                         std::int64_t trials, std::uint64_t seed,
                                         const McOptions& options) {
  channel.validate();
  if (n < 1 || trials < 1) {
    throw std::invalid_argument("estimate_error_rate_mc: need n >= 1 and trials >= 1");
  }

  // The thresholded decoder consumes the optimal threshold and the base
  // (eta-free) single-shot rates; eta enters through the decoder weights.
  ConditionalErrorRates rates;
  double threshold = 0.0;
  if (mode == DecodingMode::thresholded) {
    threshold = readout.optimal_threshold();
    rates = conditional_error_rates(readout, threshold);
  }

  const std::uint64_t stream_seed = derive_seed(seed, 0x3C0DE);
  std::atomic<std::int64_t> errors{0};
  parallel_for(trials, options.workers, [&](std::int64_t trial) {
    Rng rng = Rng::for_stream(stream_seed, static_cast<std::uint64_t>(trial));
    const int truth = rng.bernoulli(0.5) ? 1 : 0;
    const QubitState encoded = truth == 1 ? QubitState::plus : QubitState::minus;

    double llr_sum = 0.0;
    int n_plus = 0;
    for (int i = 0; i < n; ++i) {
      QubitState state = encoded;
      if (channel.eta > 0.0 && rng.bernoulli(channel.eta)) state = flipped(state);
      const double outcome = readout.sample(state, rng);
      if (mode == DecodingMode::analog) {
        llr_sum += analog_outcome_llr(readout, outcome, channel);
      } else {
        if (outcome > threshold) ++n_plus;
      }
    }

    LogLikelihoodRatio lr;
    if (mode == DecodingMode::analog) {
      lr.value = llr_sum;
    } else {
      lr = log_lr_thresholded(rates, n_plus, n, channel);
    }
    if (decide(lr, rng) != truth) {
      errors.fetch_add(1, std::memory_order_relaxed);
    }
  });

  return ErrorRateEstimate{errors.load(), trials};
}

}  // namespace softdecode
