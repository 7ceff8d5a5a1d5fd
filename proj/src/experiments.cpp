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

#include "softdecode/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace softdecode {

namespace {

using nlohmann::json;

// Fixed-precision float formatting keeps rendered tables byte-stable.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

json config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["experiment"] = c.experiment;
  doc["readout"] = c.readout;
  doc["readout_file"] = c.readout_file;
  doc["snr"] = c.snr;
  doc["snr_grid"] = c.snr_grid;
  doc["eta"] = c.eta;
  doc["n_min"] = c.n_min;
  doc["n_max"] = c.n_max;
  doc["trials"] = c.trials;
  doc["records"] = c.records;
  doc["n_per_record"] = c.n_per_record;
  doc["s0"] = c.s0_grid;
  if (c.seed) {
    doc["seed"] = *c.seed;
  } else {
    doc["seed"] = nullptr;
  }
  doc["workers"] = c.workers;
  doc["out"] = c.out;
  doc["format"] = c.format;
  doc["readout_out"] = c.readout_out;
  doc["mean_turn_on"] = c.mean_turn_on;
  doc["duration_ratio"] = c.duration_ratio;
  if (c.meas_time) doc["meas_time"] = *c.meas_time;
  if (c.bin_time) doc["bin_time"] = *c.bin_time;
  doc["tabulation_samples"] = c.tabulation_samples;
  doc["grid_size"] = c.grid_size;
  doc["search_samples"] = c.search_samples;
  doc["meas_time_grid"] = c.meas_time_grid;
  doc["bin_time_grid"] = c.bin_time_grid;
  return doc;
}

template <typename T>
void read_if_present(const json& doc, const char* key, T& target) {
  if (doc.contains(key) && !doc[key].is_null()) {
    target = doc[key].get<T>();
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  auto require = [&problems](bool ok, const std::string& message) {
    if (!ok) problems.push_back(message);
  };

  require(experiment == "repetition" || experiment == "estimation" ||
              experiment == "calibrate" || experiment == "tabulate",
          "experiment must be one of repetition, estimation, calibrate, tabulate");
  require(readout == "gaussian" || readout == "peak-signal" || readout == "tabulated-file",
          "readout must be one of gaussian, peak-signal, tabulated-file");
  require(readout != "tabulated-file" || !readout_file.empty(),
          "readout_file is required when readout = tabulated-file");
  require(snr > 0.0, "snr must be positive");
  for (const double r : snr_grid) require(r > 0.0, "snr_grid entries must be positive");
  require(eta >= 0.0 && eta <= 0.5, "eta must lie in [0, 0.5]");
  require(n_min >= 1, "n_min must be >= 1");
  require(n_max >= n_min, "n_max must be >= n_min");
  require(trials >= 1, "trials must be >= 1");
  require(records >= 1, "records must be >= 1");
  require(n_per_record >= 1, "n_per_record must be >= 1");
  require(!s0_grid.empty(), "s0 grid must be non-empty");
  for (const double s : s0_grid) {
    require(s >= -1.0 && s <= 1.0, "s0 values must lie in [-1, 1]");
  }
  require(seed.has_value(), "seed is required (runs never default to wall-clock entropy)");
  require(workers >= 1, "workers must be >= 1");
  require(format == "csv" || format == "json", "format must be csv or json");
  require(mean_turn_on > 0.0, "mean_turn_on must be positive");
  require(duration_ratio > 0.0, "duration_ratio must be positive");
  require(tabulation_samples >= 100, "tabulation_samples must be >= 100");
  require(grid_size >= 8, "grid_size must be >= 8");
  require(search_samples >= 100, "search_samples must be >= 100");
  if (experiment == "tabulate") {
    require(meas_time.has_value() && bin_time.has_value(),
            "tabulate requires explicit meas_time and bin_time");
    if (meas_time && bin_time) {
      require(*bin_time > 0.0 && *meas_time >= *bin_time,
              "tabulate requires 0 < bin_time <= meas_time");
    }
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    read_if_present(doc, "experiment", c.experiment);
    read_if_present(doc, "readout", c.readout);
    read_if_present(doc, "readout_file", c.readout_file);
    if (doc.contains("snr") && doc["snr"].is_array()) {
      c.snr_grid = doc["snr"].get<std::vector<double>>();
      if (!c.snr_grid.empty()) c.snr = c.snr_grid.front();
    } else {
      read_if_present(doc, "snr", c.snr);
    }
    read_if_present(doc, "snr_grid", c.snr_grid);
    read_if_present(doc, "eta", c.eta);
    read_if_present(doc, "n_min", c.n_min);
    read_if_present(doc, "n_max", c.n_max);
    read_if_present(doc, "trials", c.trials);
    read_if_present(doc, "records", c.records);
    read_if_present(doc, "n_per_record", c.n_per_record);
    read_if_present(doc, "s0", c.s0_grid);
    if (doc.contains("seed") && !doc["seed"].is_null()) {
      c.seed = doc["seed"].get<std::uint64_t>();
    }
    read_if_present(doc, "workers", c.workers);
    read_if_present(doc, "out", c.out);
    read_if_present(doc, "format", c.format);
    read_if_present(doc, "readout_out", c.readout_out);
    read_if_present(doc, "mean_turn_on", c.mean_turn_on);
    read_if_present(doc, "duration_ratio", c.duration_ratio);
    if (doc.contains("meas_time") && !doc["meas_time"].is_null()) {
      c.meas_time = doc["meas_time"].get<double>();
    }
    if (doc.contains("bin_time") && !doc["bin_time"].is_null()) {
      c.bin_time = doc["bin_time"].get<double>();
    }
    read_if_present(doc, "tabulation_samples", c.tabulation_samples);
    read_if_present(doc, "grid_size", c.grid_size);
    read_if_present(doc, "search_samples", c.search_samples);
    read_if_present(doc, "meas_time_grid", c.meas_time_grid);
    read_if_present(doc, "bin_time_grid", c.bin_time_grid);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

std::string ExperimentConfig::to_json_string() const {
  return config_to_json(*this).dump();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string canonical = config.to_json_string();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char byte : canonical) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string config_hash_hex(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

namespace {

PeakSignalParams peak_base_params(const ExperimentConfig& config, double snr) {
  PeakSignalParams base;
  base.mean_turn_on = config.mean_turn_on;
  base.mean_duration = config.duration_ratio * config.mean_turn_on;
  base.snr = snr;
  // Placeholder window; the calibration search owns (meas_time, bin_time).
  base.meas_time = 8.0 * config.mean_turn_on;
  base.bin_time = config.mean_turn_on;
  return base;
}

PeakSearchGrids peak_search_grids(const ExperimentConfig& config,
                                  const PeakSignalParams& base) {
  PeakSearchGrids grids = default_peak_grids(base);
  if (!config.meas_time_grid.empty()) {
    grids.meas_times.clear();
    for (const double m : config.meas_time_grid) {
      grids.meas_times.push_back(m * config.mean_turn_on);
    }
  }
  if (!config.bin_time_grid.empty()) {
    grids.bin_times.clear();
    for (const double b : config.bin_time_grid) {
      grids.bin_times.push_back(b * config.mean_turn_on);
    }
  }
  return grids;
}

PeakCalibration calibrate_peak(const ExperimentConfig& config, double snr) {
  const PeakSignalParams base = peak_base_params(config, snr);
  PeakCalibrationOptions options;
  options.search_samples = config.search_samples;
  // Re-scoring budgets scale with the coarse scan so small test runs stay
  // small; at the default 60k this reproduces the library defaults.
  options.refine_samples = 10 * config.search_samples;
  options.decide_samples = 160 * config.search_samples;
  options.final_samples = config.tabulation_samples;
  options.grid_size = config.grid_size;
  options.workers = config.workers;
  return optimize_peak_parameters(base, peak_search_grids(config, base),
                                  derive_seed(*config.seed, 0xCA11B), options);
}

std::unique_ptr<ReadoutModel> make_readout_at(const ExperimentConfig& config,
                                              double snr) {
  if (config.readout == "gaussian") {
    return std::make_unique<GaussianReadout>(snr);
  }
  if (config.readout == "peak-signal") {
    return std::make_unique<TabulatedReadout>(calibrate_peak(config, snr).readout);
  }
  return std::make_unique<TabulatedReadout>(TabulatedReadout::load_file(config.readout_file));
}

}  // namespace

std::unique_ptr<ReadoutModel> make_readout(const ExperimentConfig& config) {
  config.validate();
  return make_readout_at(config, config.snr);
}

RepetitionResult run_repetition(const ExperimentConfig& config) {
  config.validate();
  const std::unique_ptr<ReadoutModel> readout = make_readout_at(config, config.snr);
  const EncodingChannel channel{config.eta};
  const bool analytic = config.readout == "gaussian" && config.eta == 0.0;

  RepetitionResult result;
  result.seed = *config.seed;
  result.config_hash = config_hash_hex(config);
  McOptions mc{config.workers};
  for (int n = config.n_min; n <= config.n_max; ++n) {
    for (const DecodingMode mode : {DecodingMode::analog, DecodingMode::thresholded}) {
      const std::uint64_t cell_seed = derive_seed(
          *config.seed, 2 * static_cast<std::uint64_t>(n) +
                            (mode == DecodingMode::thresholded ? 1 : 0));
      const ErrorRateEstimate estimate = estimate_error_rate_mc(
          *readout, mode, n, channel, config.trials, cell_seed, mc);
      RepetitionRow row;
      row.readout = config.readout;
      row.snr = config.snr;
      row.mode = mode == DecodingMode::analog ? "analog" : "thresholded";
      row.n = n;
      row.eta = config.eta;
      row.trials = estimate.trials;
      row.errors = estimate.errors;
      row.rate = estimate.rate();
      row.std_err = estimate.std_err();
      if (analytic) {
        row.analytic_rate = mode == DecodingMode::analog
                                ? gaussian_soft_error(config.snr, n)
                                : gaussian_majority_error(config.snr, n);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

EstimationResult run_estimation(const ExperimentConfig& config) {
  config.validate();
  std::vector<double> snrs = config.snr_grid;
  if (snrs.empty()) snrs.push_back(config.snr);

  EstimationResult result;
  result.seed = *config.seed;
  result.config_hash = config_hash_hex(config);
  McOptions mc{config.workers};
  for (std::size_t si = 0; si < snrs.size(); ++si) {
    const std::unique_ptr<ReadoutModel> readout = make_readout_at(config, snrs[si]);
    for (std::size_t gi = 0; gi < config.s0_grid.size(); ++gi) {
      const double s0 = config.s0_grid[gi];
      for (const EstimationMethod method :
           {EstimationMethod::thresholded_average, EstimationMethod::soft_average,
            EstimationMethod::soft_decoded}) {
        const std::uint64_t cell_seed =
            derive_seed(*config.seed, 1000003ULL * si + 1009ULL * gi +
                                          static_cast<std::uint64_t>(method));
        const MseReport report =
            mse_monte_carlo(*readout, s0, method, config.n_per_record,
                            config.records, cell_seed, mc);
        EstimationRow row;
        row.readout = config.readout;
        row.snr = snrs[si];
        row.s0 = s0;
        row.method = method_name(method);
        row.n_per_record = report.n_per_record;
        row.n_records = report.n_records;
        row.variance = report.variance;
        row.bias = report.bias;
        row.mse = report.mse;
        row.normalized_mse = report.normalized_mse;
        if (method != EstimationMethod::soft_decoded || std::abs(s0) < 1.0) {
          row.asymptotic_normalized_mse = asymptotic_mse(*readout, s0, method);
        }
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

CalibrationResult run_calibrate(const ExperimentConfig& config) {
  config.validate();
  if (config.readout != "peak-signal") {
    throw ConfigError("calibrate requires readout = peak-signal");
  }
  CalibrationResult result{calibrate_peak(config, config.snr), "", ""};
  result.readout_json = result.calibration.readout.to_json_string();

  json report;
  report["version"] = 1;
  report["snr"] = config.snr;
  report["mean_turn_on"] = result.calibration.params.mean_turn_on;
  report["mean_duration"] = result.calibration.params.mean_duration;
  report["meas_time"] = result.calibration.params.meas_time;
  report["bin_time"] = result.calibration.params.bin_time;
  report["threshold"] = result.calibration.threshold;
  report["eps_plus"] = result.calibration.rates.eps_plus;
  report["eps_minus"] = result.calibration.rates.eps_minus;
  report["average_error"] = result.calibration.rates.average();
  report["seed"] = *config.seed;
  report["config_hash"] = config_hash_hex(config);
  report["readout_path"] = config.readout_out;
  result.report_json = report.dump();
  return result;
}

std::string run_tabulate(const ExperimentConfig& config) {
  config.validate();
  PeakSignalParams params = peak_base_params(config, config.snr);
  params.meas_time = *config.meas_time;
  params.bin_time = *config.bin_time;
  const TabulatedReadout readout = tabulate_peak_distributions(
      params, config.tabulation_samples, config.grid_size,
      derive_seed(*config.seed, 0x7AB));
  return readout.to_json_string();
}

namespace {

std::string csv_row(const RepetitionRow& row, std::uint64_t seed,
                    const std::string& hash) {
  std::ostringstream out;
  out << row.readout << ',' << format_double(row.snr) << ',' << row.mode << ','
      << row.n << ',' << format_double(row.eta) << ',' << row.trials << ','
      << row.errors << ',' << format_double(row.rate) << ','
      << format_double(row.std_err) << ',' << format_optional(row.analytic_rate)
      << ',' << seed << ',' << hash;
  return out.str();
}

std::string csv_row(const EstimationRow& row, std::uint64_t seed,
                    const std::string& hash) {
  std::ostringstream out;
  out << row.readout << ',' << format_double(row.snr) << ','
      << format_double(row.s0) << ',' << row.method << ',' << row.n_per_record
      << ',' << row.n_records << ',' << format_double(row.variance) << ','
      << format_double(row.bias) << ',' << format_double(row.mse) << ','
      << format_double(row.normalized_mse) << ','
      << format_optional(row.asymptotic_normalized_mse) << ',' << seed << ','
      << hash;
  return out.str();
}

json json_row(const RepetitionRow& row, std::uint64_t seed, const std::string& hash) {
  json j;
  j["readout"] = row.readout;
  j["snr"] = row.snr;
  j["mode"] = row.mode;
  j["n"] = row.n;
  j["eta"] = row.eta;
  j["trials"] = row.trials;
  j["errors"] = row.errors;
  j["rate"] = row.rate;
  j["std_err"] = row.std_err;
  if (row.analytic_rate) {
    j["analytic_rate"] = *row.analytic_rate;
  } else {
    j["analytic_rate"] = nullptr;
  }
  j["seed"] = seed;
  j["config_hash"] = hash;
  return j;
}

json json_row(const EstimationRow& row, std::uint64_t seed, const std::string& hash) {
  json j;
  j["readout"] = row.readout;
  j["snr"] = row.snr;
  j["s0"] = row.s0;
  j["method"] = row.method;
  j["n_per_record"] = row.n_per_record;
  j["n_records"] = row.n_records;
  j["variance"] = row.variance;
  j["bias"] = row.bias;
  j["mse"] = row.mse;
  j["normalized_mse"] = row.normalized_mse;
  if (row.asymptotic_normalized_mse) {
    j["asymptotic_normalized_mse"] = *row.asymptotic_normalized_mse;
  } else {
    j["asymptotic_normalized_mse"] = nullptr;
  }
  j["seed"] = seed;
  j["config_hash"] = hash;
  return j;
}

}  // namespace

std::string render_csv(const RepetitionResult& result) {
  std::ostringstream out;
  out << "readout,snr,mode,n,eta,trials,errors,rate,std_err,analytic_rate,seed,config_hash\n";
  for (const auto& row : result.rows) {
    out << csv_row(row, result.seed, result.config_hash) << '\n';
  }
  return out.str();
}

std::string render_csv(const EstimationResult& result) {
  std::ostringstream out;
  out << "readout,snr,s0,method,n_per_record,n_records,variance,bias,mse,"
         "normalized_mse,asymptotic_normalized_mse,seed,config_hash\n";
  for (const auto& row : result.rows) {
    out << csv_row(row, result.seed, result.config_hash) << '\n';
  }
  return out.str();
}

std::string render_json(const RepetitionResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back(json_row(row, result.seed, result.config_hash));
  }
  return rows.dump();
}

std::string render_json(const EstimationResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back(json_row(row, result.seed, result.config_hash));
  }
  return rows.dump();
}

}  // namespace softdecode
