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
#include <sstream>

#include <doctest.h>
#include <json.hpp>

using namespace softdecode;

namespace {

ExperimentConfig small_repetition_config() {
  ExperimentConfig c;
  c.experiment = "repetition";
  c.readout = "gaussian";
  c.snr = 2.0;
  c.eta = 0.0;
  c.n_min = 1;
  c.n_max = 3;
  c.trials = 20000;
  c.seed = 7;
  return c;
}

ExperimentConfig small_estimation_config() {
  ExperimentConfig c;
  c.experiment = "estimation";
  c.readout = "gaussian";
  c.snr = 2.0;
  c.records = 2000;
  c.n_per_record = 50;
  c.s0_grid = {0.0, 0.5};
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("config validation reports line-item diagnostics") {
  ExperimentConfig c = small_repetition_config();
  c.seed.reset();
  c.eta = 0.9;
  c.n_max = 0;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    CHECK(message.find("seed is required") != std::string::npos);
    CHECK(message.find("eta") != std::string::npos);
    CHECK(message.find("n_max") != std::string::npos);
  }
}

TEST_CASE("config validation accepts a good manifest") {
  CHECK_NOTHROW(small_repetition_config().validate());
  ExperimentConfig c = small_repetition_config();
  c.readout = "tabulated-file";
  CHECK_THROWS_AS(c.validate(), ConfigError);  // missing readout_file
  c.readout_file = "somewhere.json";
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config json round trip and flag-style overrides") {
  const std::string text = R"({
    "experiment": "repetition",
    "readout": "gaussian",
    "snr": 4.0,
    "eta": 0.01,
    "n_min": 2,
    "n_max": 5,
    "trials": 1234,
    "seed": 99,
    "s0": [0.0, -0.5],
    "format": "json"
  })";
  const ExperimentConfig c = ExperimentConfig::from_json_string(text);
  CHECK(c.snr == 4.0);
  CHECK(c.eta == 0.01);
  CHECK(c.n_min == 2);
  CHECK(c.trials == 1234);
  CHECK(c.seed.has_value());
  CHECK(*c.seed == 99);
  CHECK(c.s0_grid == std::vector<double>{0.0, -0.5});
  CHECK(c.format == "json");

  const ExperimentConfig back = ExperimentConfig::from_json_string(c.to_json_string());
  CHECK(back.to_json_string() == c.to_json_string());

  CHECK_THROWS_AS(ExperimentConfig::from_json_string("{bad json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string("{\"snr\": \"high\"}"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const ExperimentConfig a = small_repetition_config();
  ExperimentConfig b = small_repetition_config();
  CHECK(config_hash_hex(a) == config_hash_hex(b));
  b.seed = 8;
  CHECK(config_hash_hex(a) != config_hash_hex(b));
  CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("repetition run emits analytic columns and plausible rates") {
  const RepetitionResult result = run_repetition(small_repetition_config());
  REQUIRE(result.rows.size() == 6);  // n = 1..3, two modes
  for (const auto& row : result.rows) {
    REQUIRE(row.analytic_rate.has_value());
    const double expected = row.mode == "analog"
                                ? gaussian_soft_error(2.0, row.n)
                                : gaussian_majority_error(2.0, row.n);
    CHECK(*row.analytic_rate == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(row.rate - expected) <= 4.0 * row.std_err + 1e-9);
    CHECK(row.trials == 20000);
  }

  ExperimentConfig with_eta = small_repetition_config();
  with_eta.eta = 0.05;
  const RepetitionResult noisy = run_repetition(with_eta);
  for (const auto& row : noisy.rows) CHECK_FALSE(row.analytic_rate.has_value());
}

TEST_CASE("repetition csv output is byte-identical across worker counts") {
  ExperimentConfig c = small_repetition_config();
  c.workers = 1;
  const std::string csv1 = render_csv(run_repetition(c));
  c.workers = 3;
  const std::string csv3 = render_csv(run_repetition(c));
  CHECK(csv1 == csv3);
  CHECK(csv1.substr(0, csv1.find('\n')) ==
        "readout,snr,mode,n,eta,trials,errors,rate,std_err,analytic_rate,seed,config_hash");
  // Every row embeds the seed and the config hash.
  const std::string hash = config_hash_hex(c);
  std::istringstream lines(csv1);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    CHECK(line.find(",7," + hash) != std::string::npos);
  }
}

TEST_CASE("repetition json mirror carries the same rows") {
  const RepetitionResult result = run_repetition(small_repetition_config());
  const auto doc = nlohmann::json::parse(render_json(result));
  REQUIRE(doc.is_array());
  CHECK(doc.size() == result.rows.size());
  CHECK(doc[0].contains("rate"));
  CHECK(doc[0].contains("config_hash"));
}

TEST_CASE("estimation run covers the method grid with asymptotic columns") {
  const EstimationResult result = run_estimation(small_estimation_config());
  REQUIRE(result.rows.size() == 6);  // 2 s0 values x 3 methods
  for (const auto& row : result.rows) {
    REQUIRE(row.asymptotic_normalized_mse.has_value());
    CHECK(std::abs(row.normalized_mse / *row.asymptotic_normalized_mse - 1.0) <= 0.25);
  }
  // SD tracks the Cramer-Rao bound below TA for every s0.
  for (std::size_t i = 0; i < result.rows.size(); i += 3) {
    const double ta = *result.rows[i].asymptotic_normalized_mse;
    const double sd = *result.rows[i + 2].asymptotic_normalized_mse;
    CHECK(sd <= ta + 1e-9);
  }
}

TEST_CASE("estimation sweep covers an snr grid") {
  ExperimentConfig c = small_estimation_config();
  c.snr_grid = {1.0, 4.0};
  c.s0_grid = {0.0};
  c.records = 500;
  const EstimationResult result = run_estimation(c);
  REQUIRE(result.rows.size() == 6);
  CHECK(result.rows.front().snr == 1.0);
  CHECK(result.rows.back().snr == 4.0);
  const std::string csv = render_csv(result);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "readout,snr,s0,method,n_per_record,n_records,variance,bias,mse,"
        "normalized_mse,asymptotic_normalized_mse,seed,config_hash");
}

TEST_CASE("estimation csv is byte-identical across worker counts") {
  ExperimentConfig c = small_estimation_config();
  c.workers = 1;
  const std::string csv1 = render_csv(run_estimation(c));
  c.workers = 4;
  const std::string csv4 = render_csv(run_estimation(c));
  CHECK(csv1 == csv4);
}

TEST_CASE("estimation excludes the SD asymptotic column at the s0 boundary") {
  ExperimentConfig c = small_estimation_config();
  c.s0_grid = {1.0};
  c.records = 200;
  c.n_per_record = 20;
  const EstimationResult result = run_estimation(c);
  REQUIRE(result.rows.size() == 3);
  CHECK(result.rows[0].asymptotic_normalized_mse.has_value());  // TA
  CHECK(result.rows[1].asymptotic_normalized_mse.has_value());  // SA
  CHECK_FALSE(result.rows[2].asymptotic_normalized_mse.has_value());  // SD
}

TEST_CASE("calibrate is deterministic: same seed, same bytes") {
  ExperimentConfig c;
  c.experiment = "calibrate";
  c.readout = "peak-signal";
  c.snr = 2.0;
  c.seed = 4321;
  c.search_samples = 3000;
  c.tabulation_samples = 20000;
  c.grid_size = 128;
  c.meas_time_grid = {6.0};
  c.bin_time_grid = {2.0};
  const CalibrationResult a = run_calibrate(c);
  const CalibrationResult b = run_calibrate(c);
  CHECK(a.report_json == b.report_json);
  CHECK(a.readout_json == b.readout_json);
  CHECK(a.calibration.params.meas_time == 6.0);  // single-candidate passthrough
  CHECK(a.calibration.params.bin_time == 2.0);

  const auto report = nlohmann::json::parse(a.report_json);
  CHECK(report.contains("average_error"));
  CHECK(report.contains("threshold"));
  CHECK(report["seed"] == 4321);
}

TEST_CASE("calibrate rejects non-peak readouts") {
  ExperimentConfig c;
  c.experiment = "calibrate";
  c.readout = "gaussian";
  c.seed = 1;
  CHECK_THROWS_AS(run_calibrate(c), ConfigError);
}

TEST_CASE("tabulate produces a loadable readout document") {
  ExperimentConfig c;
  c.experiment = "tabulate";
  c.readout = "peak-signal";
  c.snr = 2.0;
  c.seed = 5;
  c.meas_time = 6.0;
  c.bin_time = 2.0;
  c.tabulation_samples = 20000;
  c.grid_size = 128;
  const std::string doc = run_tabulate(c);
  const TabulatedReadout tab = TabulatedReadout::from_json_string(doc);
  CHECK(tab.grid().size() == 128);
  REQUIRE(tab.params().has_value());
  CHECK(tab.params()->meas_time == 6.0);

  c.meas_time.reset();
  CHECK_THROWS_AS(run_tabulate(c), ConfigError);
}

TEST_CASE("tabulated-file readouts feed the repetition harness") {
  ExperimentConfig tab_config;
  tab_config.experiment = "tabulate";
  tab_config.readout = "peak-signal";
  tab_config.snr = 2.0;
  tab_config.seed = 6;
  tab_config.meas_time = 6.0;
  tab_config.bin_time = 5.7;
  tab_config.tabulation_samples = 50000;
  tab_config.grid_size = 128;
  const std::string doc = run_tabulate(tab_config);
  const std::string path = "test_readout_artifact.json";
  {
    const TabulatedReadout tab = TabulatedReadout::from_json_string(doc);
    tab.save_file(path);
  }

  ExperimentConfig c;
  c.experiment = "repetition";
  c.readout = "tabulated-file";
  c.readout_file = path;
  c.n_min = 1;
  c.n_max = 2;
  c.trials = 5000;
  c.seed = 77;
  const RepetitionResult result = run_repetition(c);
  REQUIRE(result.rows.size() == 4);
  for (const auto& row : result.rows) {
    CHECK_FALSE(row.analytic_rate.has_value());
    CHECK(row.rate > 0.0);
    CHECK(row.rate < 0.5);
  }
  std::remove(path.c_str());
}
