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

#ifndef SOFTDECODE_EXPERIMENTS_HPP
#define SOFTDECODE_EXPERIMENTS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "softdecode/estimation.hpp"
#include "softdecode/readout.hpp"
#include "softdecode/repcode.hpp"

namespace softdecode {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment manifest. A config round-trips through JSON; CLI flags
/// override keys one-for-one. The seed is mandatory so no run ever depends on
/// wall-clock state.
struct ExperimentConfig {
  std::string experiment;            // repetition | estimation | calibrate | tabulate
  std::string readout = "gaussian";  // gaussian | peak-signal | tabulated-file
  std::string readout_file;          // input path for readout = tabulated-file
  double snr = 2.0;
  std::vector<double> snr_grid;      // optional SNR sweep (estimation)
  double eta = 0.0;
  int n_min = 1;
  int n_max = 9;
  std::int64_t trials = 1'000'000;
  std::int64_t records = 50'000;
  int n_per_record = 100;
  std::vector<double> s0_grid = {0.0};
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out;         // output path; empty writes to stdout
  std::string format = "csv";
  std::string readout_out = "peak_readout.json";  // calibrate artifact path

  // Peak-signal generative settings. Times are in units of mean_turn_on
  // except meas_time/bin_time, which are absolute (used by `tabulate`).
  double mean_turn_on = 1.0;
  double duration_ratio = 4.0;  // mean_duration / mean_turn_on
  std::optional<double> meas_time;
  std::optional<double> bin_time;
  std::int64_t tabulation_samples = 1'000'000;
  int grid_size = 512;
  std::int64_t search_samples = 60'000;
  std::vector<double> meas_time_grid;  // units of mean_turn_on; empty = defaults
  std::vector<double> bin_time_grid;

  void validate() const;  // throws ConfigError with line-item diagnostics

  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig load_file(const std::string& path);
  std::string to_json_string() const;  // canonical form, backs the config hash
};

/// FNV-1a hash of the canonical JSON form; embedded in every output row.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

/// Readout construction per the config: `gaussian` directly, `peak-signal`
/// through the calibration grid search, `tabulated-file` from disk.
std::unique_ptr<ReadoutModel> make_readout(const ExperimentConfig& config);

struct RepetitionRow {
  std::string readout;
  double snr = 0.0;
  std::string mode;
  int n = 0;
  double eta = 0.0;
  std::int64_t trials = 0;
  std::int64_t errors = 0;
  double rate = 0.0;
  double std_err = 0.0;
  std::optional<double> analytic_rate;  // Gaussian, eta = 0 only
};

struct EstimationRow {
  std::string readout;
  double snr = 0.0;
  double s0 = 0.0;
  std::string method;
  int n_per_record = 0;
  std::int64_t n_records = 0;
  double variance = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double normalized_mse = 0.0;
  std::optional<double> asymptotic_normalized_mse;  // absent at |s0| = 1 for SD
};

struct RepetitionResult {
  std::vector<RepetitionRow> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct EstimationResult {
  std::vector<EstimationRow> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct CalibrationResult {
  PeakCalibration calibration;
  std::string report_json;   // byte-stable for a fixed config
  std::string readout_json;  // the persisted TabulatedReadout document
};

/// Error-rate table over n in [n_min, n_max] x {analog, thresholded}.
RepetitionResult run_repetition(const ExperimentConfig& config);
/// Normalized-MSE table over the SNR sweep x s0 grid x {TA, SA, SD}.
EstimationResult run_estimation(const ExperimentConfig& config);
/// Peak-signal calibration: optimized (meas_time, bin_time, threshold) plus
/// the persisted readout document.
CalibrationResult run_calibrate(const ExperimentConfig& config);
/// Single tabulation at explicit (meas_time, bin_time); returns the readout
/// JSON document.
std::string run_tabulate(const ExperimentConfig& config);

std::string render_csv(const RepetitionResult& result);
std::string render_csv(const EstimationResult& result);
std::string render_json(const RepetitionResult& result);
std::string render_json(const EstimationResult& result);

}  // namespace softdecode

#endif  // SOFTDECODE_EXPERIMENTS_HPP
