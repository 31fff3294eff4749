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

#include "core/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "core/trace_io.hpp"

namespace dcs {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double quantile(std::vector<double> sorted_values, double q) {
    const double pos = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    return sorted_values[lo] + (pos - static_cast<double>(lo)) * (sorted_values[hi] - sorted_values[lo]);
}

}  // namespace

double r_squared(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.size() != actual.size()) fail(ErrorCategory::argument, "r_squared: length mismatch");
    if (actual.size() < 2) fail(ErrorCategory::argument, "r_squared: need at least 2 values");
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - pred[i]) * (actual[i] - pred[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0) fail(ErrorCategory::numeric, "r_squared: actual values are constant, R² is undefined");
    return 1.0 - ss_res / ss_tot;
}

double silverman_bandwidth(const std::vector<double>& values) {
    if (values.size() < 2) fail(ErrorCategory::argument, "kde: need at least 2 values");
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    return std::max(0.9 * spread * std::pow(n, -0.2), 1e-9);
}

std::vector<double> kde(const std::vector<double>& values, const std::vector<double>& grid,
                        std::optional<double> bandwidth) {
    if (values.size() < 2) fail(ErrorCategory::argument, "kde: need at least 2 values");
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
    if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorCategory::argument, "kde: bandwidth must be positive");
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * M_PI));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> density(grid.size(), 0.0);
    const double reach = 9.0 * h;  // kernel below 1e-17 beyond this
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), grid[g] - reach);
        auto hi = std::upper_bound(sorted.begin(), sorted.end(), grid[g] + reach);
        double sum = 0.0;
        for (auto it = lo; it != hi; ++it) {
            const double z = (grid[g] - *it) / h;
            sum += std::exp(-0.5 * z * z);
        }
        density[g] = sum * norm;
    }
    return density;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) fail(ErrorCategory::argument, "linspace: need at least 2 points");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

const ObservableReport& EvalReport::observable(const std::string& name) const {
    for (const auto& o : observables)
        if (o.name == name) return o;
    fail(ErrorCategory::argument, "report has no observable '" + name + "'");
}

EvalReport evaluate_predictions(const std::vector<std::string>& names, const std::vector<std::vector<double>>& pred,
                                const std::vector<std::vector<double>>& actual, std::size_t grid_points) {
    if (pred.size() != actual.size()) fail(ErrorCategory::argument, "prediction and target row counts differ");
    EvalReport report;
    report.n_rows = actual.size();
    for (std::size_t k = 0; k < names.size(); ++k) {
        std::vector<double> p, a;
        p.reserve(pred.size());
        a.reserve(actual.size());
        for (std::size_t i = 0; i < actual.size(); ++i) {
            if (pred[i].size() != names.size() || actual[i].size() != names.size())
                fail(ErrorCategory::argument, "row " + std::to_string(i) + " has the wrong number of observables");
            p.push_back(pred[i][k]);
            a.push_back(actual[i][k]);
        }
        ObservableReport obs;
        obs.name = names[k];
        obs.r2 = r_squared(p, a);
        const double ha = silverman_bandwidth(a), hp = silverman_bandwidth(p);
        const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
        const auto [pmin, pmax] = std::minmax_element(p.begin(), p.end());
        const double lo = std::min(*amin - 3 * ha, *pmin - 3 * hp);
        const double hi = std::max(*amax + 3 * ha, *pmax + 3 * hp);
        obs.kde.grid = linspace(lo, hi, grid_points);
        obs.kde.target = kde(a, obs.kde.grid, ha);
        obs.kde.predicted = kde(p, obs.kde.grid, hp);
        report.observables.push_back(std::move(obs));
    }
    return report;
}

EvalReport evaluate_model(Surrogate& surrogate, const SampleTable& table, std::size_t grid_points) {
    check_schema(surrogate, table);
    const SampleTable selected = select_targets(table, surrogate.target_names());
    const auto t0 = std::chrono::steady_clock::now();
    const auto predictions = predict(surrogate, selected.rows);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<SampleRow> sorted = selected.rows;
    std::sort(sorted.begin(), sorted.end(), [](const SampleRow& a, const SampleRow& b) {
        return std::tie(a.simulation_id, a.job_index) < std::tie(b.simulation_id, b.job_index);
    });
    if (predictions.size() != sorted.size()) fail(ErrorCategory::internal, "prediction count does not match rows");
    std::vector<std::vector<double>> pred, actual;
    std::set<std::int64_t> sims;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        pred.push_back(predictions[i].values);
        actual.push_back(sorted[i].targets);
        sims.insert(sorted[i].simulation_id);
    }
    EvalReport report = evaluate_predictions(surrogate.target_names(), pred, actual, grid_points);
    report.n_simulations = sims.size();
    report.inference_seconds = seconds;
    const auto& cfg = surrogate.model->config();
    report.provenance["scenario"] = to_string(surrogate.scenario);
    report.provenance["architecture"] = nn::to_string(cfg.architecture);
    report.provenance["model_seed"] = std::to_string(cfg.seed);
    return report;
}

void write_eval_report(const EvalReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json obs = json::object();
    std::string r2 = "observable,r2\n";
    for (const auto& o : report.observables) {
        obs[o.name] = {{"r2", o.r2}, {"kde_file", "kde_" + o.name + ".csv"}};
        r2 += o.name + ',' + fmt(o.r2) + '\n';
        std::string curve = "grid,target_density,predicted_density\n";
        for (std::size_t i = 0; i < o.kde.grid.size(); ++i)
            curve += fmt(o.kde.grid[i]) + ',' + fmt(o.kde.target[i]) + ',' + fmt(o.kde.predicted[i]) + '\n';
        write_text_file(dir + "/kde_" + o.name + ".csv", curve);
    }
    json doc{{"observables", obs},
             {"n_rows", report.n_rows},
             {"n_simulations", report.n_simulations},
             {"inference_seconds", report.inference_seconds},
             {"provenance", report.provenance}};
    write_text_file(dir + "/report.json", doc.dump(2) + "\n");
    write_text_file(dir + "/r2.csv", r2);
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "scenario,n_jobs,seconds\n";
    for (const auto& r : rows) out += r.scenario + ',' + std::to_string(r.n_jobs) + ',' + fmt(r.seconds) + '\n';
    return out;
}

std::vector<BenchRow> read_bench_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto cs = t.column("scenario"), cn = t.column("n_jobs"), ct = t.column("seconds");
    std::vector<BenchRow> rows;
    for (const auto& r : t.rows) rows.push_back({r[cs], parse_int(r[cn], path), parse_double(r[ct], path)});
    return rows;
}

std::vector<SpeedupRow> speedup_report(const std::vector<BenchRow>& simulator, const std::vector<BenchRow>& surrogate) {
    if (simulator.empty() || surrogate.empty()) fail(ErrorCategory::argument, "speedup report needs both timing sets");
    std::vector<SpeedupRow> out;
    for (const auto& s : simulator) {
        auto it = std::find_if(surrogate.begin(), surrogate.end(),
                               [&](const BenchRow& r) { return r.scenario == s.scenario && r.n_jobs == s.n_jobs; });
        if (it == surrogate.end())
            fail(ErrorCategory::validation, "no surrogate timing for (" + s.scenario + ", " + std::to_string(s.n_jobs) + ")");
        if (!(it->seconds > 0.0) || !(s.seconds > 0.0))
            fail(ErrorCategory::validation, "timings must be positive for (" + s.scenario + ", " + std::to_string(s.n_jobs) + ")");
        out.push_back({s.scenario, s.n_jobs, s.seconds, it->seconds, s.seconds / it->seconds});
    }
    if (out.size() != surrogate.size())
        fail(ErrorCategory::validation, "surrogate timings contain keys missing from the simulator timings");
    return out;
}

std::string speedup_csv(const std::vector<SpeedupRow>& rows) {
    std::string out = "scenario,n_jobs,simulator_seconds,surrogate_seconds,ratio\n";
    for (const auto& r : rows)
        out += r.scenario + ',' + std::to_string(r.n_jobs) + ',' + fmt(r.simulator_seconds) + ',' +
               fmt(r.surrogate_seconds) + ',' + fmt(r.ratio) + '\n';
    return out;
}

}  // namespace dcs
