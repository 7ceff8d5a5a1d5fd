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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softdecode/experiments.hpp"

namespace {

using softdecode::ConfigError;
using softdecode::ExperimentConfig;

struct FlagValues {
  std::string config_path;
  std::string readout;
  std::string readout_file;
  std::string readout_out;
  double snr = 0.0;
  std::vector<double> snr_grid;
  double eta = 0.0;
  int n_min = 0;
  int n_max = 0;
  std::int64_t trials = 0;
  std::int64_t records = 0;
  int n_per_record = 0;
  std::vector<double> s0;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  std::string format;
  double meas_time = 0.0;
  double bin_time = 0.0;
  std::int64_t tabulation_samples = 0;
  int grid_size = 0;
  std::int64_t search_samples = 0;
};

void add_common_options(CLI::App* cmd, FlagValues& v) {
  cmd->add_option("--config", v.config_path, "JSON config file; flags override its keys");
  cmd->add_option("--readout", v.readout, "gaussian | peak-signal | tabulated-file");
  cmd->add_option("--readout-file", v.readout_file, "tabulated readout JSON to load");
  cmd->add_option("--snr", v.snr, "power signal-to-noise ratio r");
  cmd->add_option("--snr-grid", v.snr_grid, "comma-separated SNR sweep")->delimiter(',');
  cmd->add_option("--eta", v.eta, "encoding bit-flip probability");
  cmd->add_option("--n-min", v.n_min, "smallest repetition-code size");
  cmd->add_option("--n-max", v.n_max, "largest repetition-code size");
  cmd->add_option("--trials", v.trials, "Monte Carlo trials per error-rate cell");
  cmd->add_option("--records", v.records, "measurement records per MSE cell");
  cmd->add_option("--n-per-record", v.n_per_record, "qubits per estimation record");
  cmd->add_option("--s0", v.s0, "comma-separated list of s0 values")->delimiter(',');
  cmd->add_option("--seed", v.seed, "64-bit experiment seed (required)");
  cmd->add_option("--workers", v.workers, "worker threads (never changes results)");
  cmd->add_option("--out", v.out, "output path (default: stdout)");
  cmd->add_option("--format", v.format, "csv | json");
  cmd->add_option("--readout-out", v.readout_out, "path for the calibrated readout JSON");
  cmd->add_option("--meas-time", v.meas_time, "measurement window (tabulate)");
  cmd->add_option("--bin-time", v.bin_time, "bin length (tabulate)");
  cmd->add_option("--tabulation-samples", v.tabulation_samples, "samples per state when tabulating");
  cmd->add_option("--grid-size", v.grid_size, "histogram bins for tabulated readouts");
  cmd->add_option("--search-samples", v.search_samples, "samples per candidate during calibration");
}

ExperimentConfig build_config(const CLI::App* cmd, const FlagValues& v,
                              const std::string& experiment) {
  ExperimentConfig config;
  if (cmd->count("--config") > 0) {
    config = ExperimentConfig::load_file(v.config_path);
  }
  config.experiment = experiment;
  if (cmd->count("--readout") > 0) config.readout = v.readout;
  if (cmd->count("--readout-file") > 0) config.readout_file = v.readout_file;
  if (cmd->count("--snr") > 0) {
    config.snr = v.snr;
    config.snr_grid.clear();
  }
  if (cmd->count("--snr-grid") > 0) config.snr_grid = v.snr_grid;
  if (cmd->count("--eta") > 0) config.eta = v.eta;
  if (cmd->count("--n-min") > 0) config.n_min = v.n_min;
  if (cmd->count("--n-max") > 0) config.n_max = v.n_max;
  if (cmd->count("--trials") > 0) config.trials = v.trials;
  if (cmd->count("--records") > 0) config.records = v.records;
  if (cmd->count("--n-per-record") > 0) config.n_per_record = v.n_per_record;
  if (cmd->count("--s0") > 0) config.s0_grid = v.s0;
  if (cmd->count("--seed") > 0) config.seed = v.seed;
  if (cmd->count("--workers") > 0) config.workers = v.workers;
  if (cmd->count("--out") > 0) config.out = v.out;
  if (cmd->count("--format") > 0) config.format = v.format;
  if (cmd->count("--readout-out") > 0) config.readout_out = v.readout_out;
  if (cmd->count("--meas-time") > 0) config.meas_time = v.meas_time;
  if (cmd->count("--bin-time") > 0) config.bin_time = v.bin_time;
  if (cmd->count("--tabulation-samples") > 0) config.tabulation_samples = v.tabulation_samples;
  if (cmd->count("--grid-size") > 0) config.grid_size = v.grid_size;
  if (cmd->count("--search-samples") > 0) config.search_samples = v.search_samples;
  return config;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  out << content;
}

int run(const CLI::App* cmd, const FlagValues& flags, const std::string& experiment) {
  ExperimentConfig config = build_config(cmd, flags, experiment);
  if (experiment == "repetition") {
    const auto result = softdecode::run_repetition(config);
    write_output(config.out, config.format == "json" ? render_json(result)
                                                     : render_csv(result));
  } else if (experiment == "estimation") {
    const auto result = softdecode::run_estimation(config);
    write_output(config.out, config.format == "json" ? render_json(result)
                                                     : render_csv(result));
  } else if (experiment == "calibrate") {
    const auto result = softdecode::run_calibrate(config);
    std::ofstream readout_out(config.readout_out, std::ios::binary);
    if (!readout_out) {
      throw std::runtime_error("cannot open output file: " + config.readout_out);
    }
    readout_out << result.readout_json << '\n';
    write_output(config.out, result.report_json + "\n");
  } else {
    const std::string doc = softdecode::run_tabulate(config);
    write_output(config.out, doc + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-decision vs thresholded decoding of qubit readout channels"};
  app.require_subcommand(1);

  FlagValues flags;
  CLI::App* repetition =
      app.add_subcommand("repetition", "Repetition-code error-rate table");
  CLI::App* estimation =
      app.add_subcommand("estimation", "Estimator MSE table for s0 = <sigma_z>");
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Optimize the peak-signal readout parameters");
  CLI::App* tabulate =
      app.add_subcommand("tabulate", "Tabulate peak-signal distributions at fixed parameters");
  for (CLI::App* cmd : {repetition, estimation, calibrate, tabulate}) {
    add_common_options(cmd, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Help/version exit cleanly; anything else is a config error.
    return code == 0 ? 0 : 2;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  try {
    return run(cmd, flags, cmd->get_name());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
