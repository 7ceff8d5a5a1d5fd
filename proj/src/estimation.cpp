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

#include "softdecode/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "softdecode/numerics.hpp"
#include "softdecode/parallel.hpp"

namespace softdecode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SoftAverageScaling {
  double a = 1.0;
  double b = 0.0;
};

SoftAverageScaling soft_average_scaling(const ReadoutModel& readout) {
  const double mean_plus = readout.conditional_mean(QubitState::plus);
  const double mean_minus = readout.conditional_mean(QubitState::minus);
  SoftAverageScaling s;
  s.a = 0.5 * (mean_plus - mean_minus);
  s.b = 0.5 * (mean_plus + mean_minus);
  if (std::abs(s.a) < 1e-12) {
    throw std::invalid_argument("soft_average: states are indistinguishable in mean (A = 0)");
  }
  return s;
}

}  // namespace

std::string method_name(EstimationMethod method) {
  switch (method) {
    case EstimationMethod::thresholded_average: return "TA";
    case EstimationMethod::soft_average: return "SA";
    case EstimationMethod::soft_decoded: return "SD";
  }
  throw std::logic_error("method_name: unknown method");
}

EstimationMethod method_from_name(const std::string& name) {
  if (name == "TA") return EstimationMethod::thresholded_average;
  if (name == "SA") return EstimationMethod::soft_average;
  if (name == "SD") return EstimationMethod::soft_decoded;
  throw std::invalid_argument("method_from_name: expected TA, SA or SD, got '" + name + "'");
}

BiasCorrectedOutcomes bias_corrected_outcomes(const ConditionalErrorRates& rates) {
  const double sum = rates.eps_plus + rates.eps_minus;
  if (!(sum < 1.0)) {
    throw std::invalid_argument(
        "bias_corrected_outcomes: eps_plus + eps_minus >= 1, readout is uninformative");
  }
  const double diff = rates.eps_plus - rates.eps_minus;
  BiasCorrectedOutcomes out;
  out.c_plus = (1.0 + diff) / (1.0 - sum);
  out.c_minus = -(1.0 - diff) / (1.0 - sum);
  return out;
}

double mixture_pdf(const ReadoutModel& readout, double outcome, double s0) {
  double p, q;
  readout.pdf_pair(outcome, p, q);
  return 0.5 * (1.0 + s0) * p + 0.5 * (1.0 - s0) * q;
}

double unclamped_thresholded_average(const MeasurementRecord& record,
                                     const ReadoutModel& readout, double threshold) {
  if (record.empty()) {
    throw std::invalid_argument("thresholded_average: empty record");
  }
  const ConditionalErrorRates rates = conditional_error_rates(readout, threshold);
  const BiasCorrectedOutcomes c = bias_corrected_outcomes(rates);
  double sum = 0.0;
  for (const double outcome : record) {
    sum += outcome > threshold ? c.c_plus : c.c_minus;
  }
  return sum / static_cast<double>(record.size());
}

double thresholded_average(const MeasurementRecord& record,
                           const ReadoutModel& readout, double threshold) {
  return std::clamp(unclamped_thresholded_average(record, readout, threshold), -1.0, 1.0);
}

double unclamped_soft_average(const MeasurementRecord& record,
                              const ReadoutModel& readout) {
  if (record.empty()) {
    throw std::invalid_argument("soft_average: empty record");
  }
  const SoftAverageScaling s = soft_average_scaling(readout);
  double sum = 0.0;
  for (const double outcome : record) sum += outcome;
  const double mean = sum / static_cast<double>(record.size());
  return (mean - s.b) / s.a;
}

double soft_average(const MeasurementRecord& record, const ReadoutModel& readout) {
  return std::clamp(unclamped_soft_average(record, readout), -1.0, 1.0);
}

namespace {

// Per-outcome likelihood-ratio classification for the MLE score. Outcomes
// with an infinite density ratio push the maximizer toward a boundary; their
// score contribution is the exact limit.
struct ScoreTerm {
  enum class Kind { finite, ratio_infinite, ratio_zero };
  Kind kind = Kind::finite;
  double lambda = 1.0;  // P(O|+)/P(O|-), finite case only
};

std::vector<ScoreTerm> classify_record(const MeasurementRecord& record,
                                       const ReadoutModel& readout) {
  std::vector<ScoreTerm> terms;
  terms.reserve(record.size());
  for (const double outcome : record) {
    const double o = readout.clamp_to_support(outcome);
    double lp, lq;
    readout.log_pdf_pair(o, lp, lq);
    if (lp == -kInf && lq == -kInf) continue;  // uninformative outcome
    const double d = lp - lq;
    ScoreTerm term;
    if (d > 700.0) {
      term.kind = ScoreTerm::Kind::ratio_infinite;
    } else if (d < -700.0) {
      term.kind = ScoreTerm::Kind::ratio_zero;
    } else {
      term.lambda = std::exp(d);
    }
    terms.push_back(term);
  }
  return terms;
}

// dl/ds = Σ (λ_i - 1) / ((1+s) λ_i + (1-s)); monotone decreasing in s for
// a concave log-likelihood.
double score(const std::vector<ScoreTerm>& terms, double s) {
  double total = 0.0;
  for (const ScoreTerm& term : terms) {
    switch (term.kind) {
      case ScoreTerm::Kind::finite:
        total += (term.lambda - 1.0) / ((1.0 + s) * term.lambda + (1.0 - s));
        break;
      case ScoreTerm::Kind::ratio_infinite:
        total += 1.0 / (1.0 + s);  // +inf at s = -1, handled by bisection
        break;
      case ScoreTerm::Kind::ratio_zero:
        total += -1.0 / (1.0 - s);
        break;
    }
  }
  return total;
}

double log_likelihood(const std::vector<ScoreTerm>& terms, double s) {
  double total = 0.0;
  const double wp = 0.5 * (1.0 + s);
  const double wm = 0.5 * (1.0 - s);
  for (const ScoreTerm& term : terms) {
    switch (term.kind) {
      case ScoreTerm::Kind::finite:
        // Densities enter only through λ; the λ-independent offset does not
        // move the maximizer.
        total += std::log(wp * term.lambda + wm);
        break;
      case ScoreTerm::Kind::ratio_infinite:
        total += std::log(wp);
        break;
      case ScoreTerm::Kind::ratio_zero:
        total += std::log(wm);
        break;
    }
  }
  return total / static_cast<double>(terms.size());
}

}  // namespace

double mle_soft_decoded(const MeasurementRecord& record, const ReadoutModel& readout) {
  if (record.empty()) {
    throw std::invalid_argument("mle_soft_decoded: empty record");
  }
  const std::vector<ScoreTerm> terms = classify_record(record, readout);
  if (terms.empty()) {
    // Every outcome fell where both densities vanish; no information at all.
    return 0.0;
  }
  const auto objective = [&terms](double s) { return log_likelihood(terms, s); };
  const auto derivative = [&terms](double s) { return score(terms, s); };
  return maximize_concave(objective, derivative, -1.0, 1.0, 1e-10).argmax;
}

double overlap_integral(const ReadoutModel& readout, double s0) {
  if (!(std::abs(s0) < 1.0)) {
    throw std::invalid_argument("overlap_integral: requires |s0| < 1");
  }
  const double wp = 0.5 * (1.0 + s0);
  const double wm = 0.5 * (1.0 - s0);
  return readout.integrate_over_support([&readout, wp, wm](double o) {
    double p, q;
    readout.pdf_pair(o, p, q);
    const double num = p * q;
    if (num <= 0.0) return 0.0;
    return num / (wp * p + wm * q);
  });
}

double fisher_information(const ReadoutModel& readout, double s0) {
  return (1.0 - overlap_integral(readout, s0)) / (1.0 - s0 * s0);
}

double fisher_information_score(const ReadoutModel& readout, double s0) {
  if (!(std::abs(s0) < 1.0)) {
    throw std::invalid_argument("fisher_information_score: requires |s0| < 1");
  }
  const double wp = 0.5 * (1.0 + s0);
  const double wm = 0.5 * (1.0 - s0);
  return readout.integrate_over_support([&readout, wp, wm](double o) {
    double p, q;
    readout.pdf_pair(o, p, q);
    const double diff = p - q;
    if (diff == 0.0) return 0.0;
    const double mix = wp * p + wm * q;
    if (mix <= 0.0) return 0.0;
    return 0.25 * diff * diff / mix;
  });
}

double asymptotic_mse(const ReadoutModel& readout, double s0, EstimationMethod method) {
  switch (method) {
    case EstimationMethod::thresholded_average: {
      const double nu = readout.optimal_threshold();
      const ConditionalErrorRates rates = conditional_error_rates(readout, nu);
      const BiasCorrectedOutcomes c = bias_corrected_outcomes(rates);
      const double wp = 0.5 * (1.0 + s0);
      const double wm = 0.5 * (1.0 - s0);
      const double prob_plus = wp * (1.0 - rates.eps_plus) + wm * rates.eps_minus;
      const double prob_minus = wp * rates.eps_plus + wm * (1.0 - rates.eps_minus);
      return prob_plus * c.c_plus * c.c_plus + prob_minus * c.c_minus * c.c_minus -
             s0 * s0;
    }
    case EstimationMethod::soft_average: {
      const SoftAverageScaling s = soft_average_scaling(readout);
      const double wp = 0.5 * (1.0 + s0);
      const double wm = 0.5 * (1.0 - s0);
      const double second = wp * readout.conditional_second_moment(QubitState::plus) +
                            wm * readout.conditional_second_moment(QubitState::minus);
      const double mean = s.a * s0 + s.b;
      return (second - mean * mean) / (s.a * s.a);
    }
    case EstimationMethod::soft_decoded:
      return (1.0 - s0 * s0) / (1.0 - overlap_integral(readout, s0));
  }
  throw std::logic_error("asymptotic_mse: unknown method");
}

MseReport mse_monte_carlo(const ReadoutModel& readout, double s0,
                          EstimationMethod method, int n_per_record,
                          std::int64_t n_records, std::uint64_t seed,
                          const McOptions& options) {
  if (n_per_record < 1 || n_records < 1) {
    throw std::invalid_argument("mse_monte_carlo: counts must be >= 1");
  }
  if (!(s0 >= -1.0 && s0 <= 1.0)) {
    throw std::invalid_argument("mse_monte_carlo: s0 must lie in [-1, 1]");
  }

  // Shared per-method precomputation, hoisted out of the record loop.
  double threshold = 0.0;
  BiasCorrectedOutcomes outcomes;
  SoftAverageScaling scaling;
  if (method == EstimationMethod::thresholded_average) {
    threshold = readout.optimal_threshold();
    outcomes = bias_corrected_outcomes(conditional_error_rates(readout, threshold));
  } else if (method == EstimationMethod::soft_average) {
    scaling = soft_average_scaling(readout);
  }

  const double prob_plus = 0.5 * (1.0 + s0);
  const std::uint64_t stream_seed = derive_seed(seed, 0xE57);
  std::vector<double> estimates(n_records, std::numeric_limits<double>::quiet_NaN());
  std::vector<unsigned char> clamped_flags(n_records, 0);
  std::vector<unsigned char> failed_flags(n_records, 0);

  parallel_for(n_records, options.workers, [&](std::int64_t k) {
    Rng rng = Rng::for_stream(stream_seed, static_cast<std::uint64_t>(k));
    MeasurementRecord record(n_per_record);
    for (int i = 0; i < n_per_record; ++i) {
      const QubitState state =
          rng.bernoulli(prob_plus) ? QubitState::plus : QubitState::minus;
      record[i] = readout.sample(state, rng);
    }
    try {
      double value = 0.0;
      switch (method) {
        case EstimationMethod::thresholded_average: {
          double sum = 0.0;
          for (const double o : record) {
            sum += o > threshold ? outcomes.c_plus : outcomes.c_minus;
          }
          value = sum / static_cast<double>(n_per_record);
          break;
        }
        case EstimationMethod::soft_average: {
          double sum = 0.0;
          for (const double o : record) sum += o;
          value = (sum / static_cast<double>(n_per_record) - scaling.b) / scaling.a;
          break;
        }
        case EstimationMethod::soft_decoded:
          value = mle_soft_decoded(record, readout);
          break;
      }
      if (method != EstimationMethod::soft_decoded && std::abs(value) > 1.0) {
        clamped_flags[k] = 1;
        value = std::clamp(value, -1.0, 1.0);
      }
      estimates[k] = value;
    } catch (const std::exception&) {
      failed_flags[k] = 1;
    }
  });

  MseReport report;
  report.method = method;
  report.n_per_record = n_per_record;
  report.n_records = n_records;

  std::int64_t valid = 0;
  double sum = 0.0;
  for (std::int64_t k = 0; k < n_records; ++k) {
    report.clamped += clamped_flags[k];
    report.failures += failed_flags[k];
    if (!failed_flags[k]) {
      sum += estimates[k];
      ++valid;
    }
  }
  if (valid == 0) {
    throw std::runtime_error("mse_monte_carlo: every record failed to produce an estimate");
  }
  const double mean = sum / static_cast<double>(valid);
  double var_sum = 0.0;
  for (std::int64_t k = 0; k < n_records; ++k) {
    if (!failed_flags[k]) {
      const double d = estimates[k] - mean;
      var_sum += d * d;
    }
  }
  report.variance = var_sum / static_cast<double>(valid);
  report.bias = mean - s0;
  report.mse = report.variance + report.bias * report.bias;
  report.normalized_mse = report.mse * static_cast<double>(n_per_record);
  return report;
}

}  // namespace softdecode
