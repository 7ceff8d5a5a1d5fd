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

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "softdecode/estimation.hpp"
#include "softdecode/experiments.hpp"
#include "softdecode/numerics.hpp"
#include "softdecode/readout.hpp"
#include "softdecode/repcode.hpp"

namespace py = pybind11;
using namespace softdecode;

namespace {

// Python-side entry points wrap the C++ harnesses with the config types kept
// on the C++ side; sweep runners go through a JSON config string.
ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig config = ExperimentConfig::from_json_string(text);
  config.validate();
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Soft-decision vs thresholded decoding of qubit readout channels";

  py::enum_<QubitState>(m, "QubitState")
      .value("minus", QubitState::minus)
      .value("plus", QubitState::plus);

  py::enum_<DecodingMode>(m, "DecodingMode")
      .value("analog", DecodingMode::analog)
      .value("thresholded", DecodingMode::thresholded);

  py::enum_<EstimationMethod>(m, "EstimationMethod")
      .value("thresholded_average", EstimationMethod::thresholded_average)
      .value("soft_average", EstimationMethod::soft_average)
      .value("soft_decoded", EstimationMethod::soft_decoded);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("for_stream", &Rng::for_stream, py::arg("seed"), py::arg("stream"))
      .def("uniform", &Rng::uniform)
      .def("normal", py::overload_cast<>(&Rng::normal))
      .def("exponential", &Rng::exponential, py::arg("mean"));

  py::class_<ConditionalErrorRates>(m, "ConditionalErrorRates")
      .def(py::init([](double eps_plus, double eps_minus, double threshold) {
             return ConditionalErrorRates{eps_plus, eps_minus, threshold};
           }),
           py::arg("eps_plus"), py::arg("eps_minus"), py::arg("threshold") = 0.0)
      .def_readonly("eps_plus", &ConditionalErrorRates::eps_plus)
      .def_readonly("eps_minus", &ConditionalErrorRates::eps_minus)
      .def_readonly("threshold", &ConditionalErrorRates::threshold)
      .def("average", &ConditionalErrorRates::average);

  py::class_<ReadoutModel, std::shared_ptr<ReadoutModel>>(m, "ReadoutModel")
      .def("pdf", &ReadoutModel::pdf, py::arg("outcome"), py::arg("state"))
      .def("cdf", &ReadoutModel::cdf, py::arg("outcome"), py::arg("state"))
      .def("quantile", &ReadoutModel::quantile, py::arg("p"), py::arg("state"))
      .def("sample", &ReadoutModel::sample, py::arg("state"), py::arg("rng"))
      .def("support", &ReadoutModel::support)
      .def("optimal_threshold", &ReadoutModel::optimal_threshold)
      .def("conditional_mean", &ReadoutModel::conditional_mean, py::arg("state"));

  py::class_<GaussianReadout, ReadoutModel, std::shared_ptr<GaussianReadout>>(
      m, "GaussianReadout")
      .def(py::init<double>(), py::arg("snr"))
      .def_property_readonly("snr", &GaussianReadout::snr);

  py::class_<PeakSignalParams>(m, "PeakSignalParams")
      .def(py::init([](double mean_turn_on, double mean_duration, double snr,
                       double meas_time, double bin_time) {
             PeakSignalParams p{mean_turn_on, mean_duration, snr, meas_time, bin_time};
             p.validate();
             return p;
           }),
           py::arg("mean_turn_on"), py::arg("mean_duration"), py::arg("snr"),
           py::arg("meas_time"), py::arg("bin_time"))
      .def_readwrite("mean_turn_on", &PeakSignalParams::mean_turn_on)
      .def_readwrite("mean_duration", &PeakSignalParams::mean_duration)
      .def_readwrite("snr", &PeakSignalParams::snr)
      .def_readwrite("meas_time", &PeakSignalParams::meas_time)
      .def_readwrite("bin_time", &PeakSignalParams::bin_time)
      .def("num_bins", &PeakSignalParams::num_bins)
      .def("bin_sigma", &PeakSignalParams::bin_sigma);

  py::class_<TabulatedReadout, ReadoutModel, std::shared_ptr<TabulatedReadout>>(
      m, "TabulatedReadout")
      .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>>(),
           py::arg("grid"), py::arg("pdf_plus"), py::arg("pdf_minus"))
      .def_property_readonly("grid", &TabulatedReadout::grid)
      .def("pdf_table", &TabulatedReadout::pdf_table, py::arg("state"))
      .def("cdf_table", &TabulatedReadout::cdf_table, py::arg("state"))
      .def("to_json", &TabulatedReadout::to_json_string)
      .def_static("from_json", &TabulatedReadout::from_json_string, py::arg("text"))
      .def("save", &TabulatedReadout::save_file, py::arg("path"))
      .def_static("load", &TabulatedReadout::load_file, py::arg("path"));

  m.def("erfc", &softdecode::erfc, py::arg("x"));
  m.def("regularized_incomplete_beta", &regularized_incomplete_beta, py::arg("x"),
        py::arg("a"), py::arg("b"));

  m.def("simulate_peak_trace", &simulate_peak_trace, py::arg("params"),
        py::arg("state"), py::arg("rng"));
  m.def(
      "tabulate_peak_distributions",
      [](const PeakSignalParams& params, std::int64_t n_samples, int grid_size,
         std::uint64_t seed) {
        return tabulate_peak_distributions(params, n_samples, grid_size, seed);
      },
      py::arg("params"), py::arg("n_samples"), py::arg("grid_size"), py::arg("seed"));
  m.def("conditional_error_rates",
        py::overload_cast<const ReadoutModel&, double>(&conditional_error_rates),
        py::arg("readout"), py::arg("threshold"));
  m.def(
      "optimal_threshold",
      [](const ReadoutModel& r) { return r.optimal_threshold(); },
      py::arg("readout"));

  m.def(
      "log_lr_analog",
      [](const ReadoutModel& readout, const MeasurementRecord& record, double eta) {
        return log_lr_analog(readout, record, EncodingChannel{eta}).value;
      },
      py::arg("readout"), py::arg("record"), py::arg("eta") = 0.0);
  m.def(
      "log_lr_thresholded",
      [](const ConditionalErrorRates& rates, int n_plus, int n_total, double eta) {
        return log_lr_thresholded(rates, n_plus, n_total, EncodingChannel{eta}).value;
      },
      py::arg("rates"), py::arg("n_plus"), py::arg("n_total"), py::arg("eta") = 0.0);

  m.def("gaussian_majority_error", &gaussian_majority_error, py::arg("snr"), py::arg("n"));
  m.def("gaussian_soft_error", &gaussian_soft_error, py::arg("snr"), py::arg("n"));
  m.def("asymptotic_soft_qubit_count", &asymptotic_soft_qubit_count,
        py::arg("n_thresholded"), py::arg("snr"));
  m.def("min_qubits_to_reach", &min_qubits_to_reach, py::arg("error_fn"),
        py::arg("target"), py::arg("n_max") = 64);

  m.def(
      "estimate_error_rate_mc",
      [](const ReadoutModel& readout, DecodingMode mode, int n, double eta,
         std::int64_t trials, std::uint64_t seed, int workers) {
        const ErrorRateEstimate e = estimate_error_rate_mc(
            readout, mode, n, EncodingChannel{eta}, trials, seed, McOptions{workers});
        return py::make_tuple(e.errors, e.trials, e.rate(), e.std_err());
      },
      py::arg("readout"), py::arg("mode"), py::arg("n"), py::arg("eta"),
      py::arg("trials"), py::arg("seed"), py::arg("workers") = 1,
      "Returns (errors, trials, rate, std_err)");

  m.def("thresholded_average", &thresholded_average, py::arg("record"),
        py::arg("readout"), py::arg("threshold"));
  m.def("soft_average", &soft_average, py::arg("record"), py::arg("readout"));
  m.def("mle_soft_decoded", &mle_soft_decoded, py::arg("record"), py::arg("readout"));
  m.def("bias_corrected_outcomes",
        [](const ConditionalErrorRates& rates) {
          const BiasCorrectedOutcomes c = bias_corrected_outcomes(rates);
          return py::make_tuple(c.c_plus, c.c_minus);
        },
        py::arg("rates"));
  m.def("overlap_integral", &overlap_integral, py::arg("readout"), py::arg("s0"));
  m.def("fisher_information", &fisher_information, py::arg("readout"), py::arg("s0"));
  m.def("fisher_information_score", &fisher_information_score, py::arg("readout"),
        py::arg("s0"));
  m.def("asymptotic_mse", &asymptotic_mse, py::arg("readout"), py::arg("s0"),
        py::arg("method"));

  py::class_<MseReport>(m, "MseReport")
      .def_readonly("n_per_record", &MseReport::n_per_record)
      .def_readonly("n_records", &MseReport::n_records)
      .def_readonly("variance", &MseReport::variance)
      .def_readonly("bias", &MseReport::bias)
      .def_readonly("mse", &MseReport::mse)
      .def_readonly("normalized_mse", &MseReport::normalized_mse)
      .def_readonly("clamped", &MseReport::clamped)
      .def_readonly("failures", &MseReport::failures);

  m.def(
      "mse_monte_carlo",
      [](const ReadoutModel& readout, double s0, EstimationMethod method,
         int n_per_record, std::int64_t n_records, std::uint64_t seed, int workers) {
        return mse_monte_carlo(readout, s0, method, n_per_record, n_records, seed,
                               McOptions{workers});
      },
      py::arg("readout"), py::arg("s0"), py::arg("method"), py::arg("n_per_record"),
      py::arg("n_records"), py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "run_repetition_csv",
      [](const std::string& config_json) {
        return render_csv(run_repetition(config_from_json(config_json)));
      },
      py::arg("config_json"));
  m.def(
      "run_estimation_csv",
      [](const std::string& config_json) {
        return render_csv(run_estimation(config_from_json(config_json)));
      },
      py::arg("config_json"));
}
