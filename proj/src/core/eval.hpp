// Copyright 2026 The dcsurrogate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/sim_engine.hpp"
#include "core/surrogate.hpp"

namespace dcs {

/// 1 - SS_res / SS_tot. Negative values are legal.
double r_squared(const std::vector<double>& pred, const std::vector<double>& actual);

/// 0.9 * min(std, IQR / 1.34) * n^(-1/5), floored at 1e-9.
double silverman_bandwidth(const std::vector<double>& values);

std::vector<double> kde(const std::vector<double>& values, const std::vector<double>& grid,
                        std::optional<double> bandwidth = std::nullopt);

std::vector<double> linspace(double lo, double hi, std::size_t n);

struct KdeCurve {
    std::vector<double> grid;
    std::vector<double> target;
    std::vector<double> predicted;
};

struct ObservableReport {
    std::string name;
    double r2 = 0.0;
    KdeCurve kde;
};

struct EvalReport {
    std::vector<ObservableReport> observables;
    std::size_t n_rows = 0;
    std::size_t n_simulations = 0;
    double inference_seconds = 0.0;
    std::map<std::string, std::string> provenance;

    const ObservableReport& observable(const std::string& name) const;
};

/// Per-observable R² and KDE curves on a shared grid spanning both
/// distributions plus 3 bandwidths on each side.
EvalReport evaluate_predictions(const std::vector<std::string>& names, const std::vector<std::vector<double>>& pred,
                                const std::vector<std::vector<double>>& actual, std::size_t grid_points = 256);

/// Runs the surrogate on original-scale rows and scores it against their targets.
EvalReport evaluate_model(Surrogate& surrogate, const SampleTable& table, std::size_t grid_points = 256);

/// Writes report.json, r2.csv and kde_<observable>.csv into dir.
void write_eval_report(const EvalReport& report, const std::string& dir);

std::string bench_csv(const std::vector<BenchRow>& rows);
std::vector<BenchRow> read_bench_csv(const std::string& path);

struct SpeedupRow {
    std::string scenario;
    std::int64_t n_jobs = 0;
    double simulator_seconds = 0.0;
    double surrogate_seconds = 0.0;
    double ratio = 0.0;
};

std::vector<SpeedupRow> speedup_report(const std::vector<BenchRow>& simulator, const std::vector<BenchRow>& surrogate);
std::string speedup_csv(const std::vector<SpeedupRow>& rows);

}  // namespace dcs
