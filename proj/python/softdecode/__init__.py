# Copyright 2026 The softdecode authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Soft-decision versus thresholded decoding of qubit readout channels."""

from softdecode._core import (
    ConditionalErrorRates,
    DecodingMode,
    EstimationMethod,
    GaussianReadout,
    MseReport,
    PeakSignalParams,
    QubitState,
    ReadoutModel,
    Rng,
    TabulatedReadout,
    asymptotic_mse,
    asymptotic_soft_qubit_count,
    bias_corrected_outcomes,
    conditional_error_rates,
    erfc,
    estimate_error_rate_mc,
    fisher_information,
    fisher_information_score,
    gaussian_majority_error,
    gaussian_soft_error,
    log_lr_analog,
    log_lr_thresholded,
    min_qubits_to_reach,
    mle_soft_decoded,
    mse_monte_carlo,
    optimal_threshold,
    overlap_integral,
    regularized_incomplete_beta,
    run_estimation_csv,
    run_repetition_csv,
    simulate_peak_trace,
    soft_average,
    tabulate_peak_distributions,
    thresholded_average,
)

__all__ = [
    "ConditionalErrorRates",
    "DecodingMode",
    "EstimationMethod",
    "GaussianReadout",
    "MseReport",
    "PeakSignalParams",
    "QubitState",
    "ReadoutModel",
    "Rng",
    "TabulatedReadout",
    "asymptotic_mse",
    "asymptotic_soft_qubit_count",
    "bias_corrected_outcomes",
    "conditional_error_rates",
    "erfc",
    "estimate_error_rate_mc",
    "fisher_information",
    "fisher_information_score",
    "gaussian_majority_error",
    "gaussian_soft_error",
    "log_lr_analog",
    "log_lr_thresholded",
    "min_qubits_to_reach",
    "mle_soft_decoded",
    "mse_monte_carlo",
    "optimal_threshold",
    "overlap_integral",
    "regularized_incomplete_beta",
    "run_estimation_csv",
    "run_repetition_csv",
    "simulate_peak_trace",
    "soft_average",
    "tabulate_peak_distributions",
    "thresholded_average",
]

__version__ = "0.1.0"
