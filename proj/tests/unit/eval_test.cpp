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

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <fstream>

#include "core/eval.hpp"
#include "core/rng.hpp"
#include "core/trace_io.hpp"
#include "support/temp_dir.hpp"

namespace dcs {
namespace {

using dcs::testing::TempDir;

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

TEST(RSquared, Examples) {
    const std::vector<double> a = {1.0, 4.0, 2.0, 8.0};
    EXPECT_EQ(r_squared(a, a), 1.0);
    EXPECT_NEAR(r_squared(std::vector<double>(4, 3.75), a), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(r_squared({2, 1, 0}, {0, 1, 2}), -3.0);
}

TEST(RSquared, AffineInvariance) {
    Xoshiro256 rng(1);
    std::vector<double> a, p;
    for (int i = 0; i < 100; ++i) {
        a.push_back(rng.normal());
        p.push_back(a.back() + 0.3 * rng.normal());
    }
    const double base = r_squared(p, a);
    for (auto [scale, shift] : {std::pair{3.0, -7.0}, std::pair{-0.01, 1e3}}) {
        std::vector<double> a2, p2;
        for (std::size_t i = 0; i < a.size(); ++i) {
            a2.push_back(scale * a[i] + shift);
            p2.push_back(scale * p[i] + shift);
        }
        EXPECT_NEAR(r_squared(p2, a2), base, 1e-10);
    }
}

TEST(RSquared, Errors) {
    EXPECT_THROW(r_squared({1.0}, {1.0}), Error);
    EXPECT_THROW(r_squared({1.0, 2.0}, {3.0, 3.0}), Error);
    EXPECT_THROW(r_squared({1.0, 2.0}, {3.0}), Error);
}

TEST(Kde, SilvermanMatchesHandComputation) {
    const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const double sd = std::sqrt(82.5 / 9.0);       // sample std
    const double iqr = 7.75 - 3.25;                // linear-interpolated quartiles
    EXPECT_NEAR(silverman_bandwidth(v), 0.9 * std::min(sd, iqr / 1.34) * std::pow(10.0, -0.2), 1e-12);
    EXPECT_EQ(silverman_bandwidth({2.0, 2.0, 2.0}), 1e-9);
}

TEST(Kde, NormalizedAndNonnegativeOnRandomData) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Xoshiro256 rng(seed);
        std::vector<double> v;
        const int n = 20 + static_cast<int>(rng.below(200));
        for (int i = 0; i < n; ++i) v.push_back(rng.uniform() < 0.5 ? rng.normal() : 5.0 + 2.0 * rng.exponential(1.0));
        const double h = silverman_bandwidth(v);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const auto grid = linspace(*lo - 6 * h, *hi + 6 * h, 4000);
        const auto d = kde(v, grid);
        for (double x : d) EXPECT_GE(x, 0.0);
        EXPECT_NEAR(trapezoid(grid, d), 1.0, 1e-3) << "seed " << seed;
    }
}

TEST(Kde, SymmetricDataGivesSymmetricDensity) {
    const std::vector<double> v = {-3.0, -1.0, -0.5, 0.5, 1.0, 3.0};
    const auto grid = linspace(-8.0, 8.0, 161);
    const auto d = kde(v, grid, 0.7);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(d[i], d[grid.size() - 1 - i], 1e-9);
}

TEST(Kde, TwoClustersGiveTwoModes) {
    Xoshiro256 rng(3);
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back((i % 2 ? 10.0 : -10.0) + rng.normal());
    const auto grid = linspace(-20.0, 20.0, 401);
    const auto d = kde(v, grid);
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < d.size(); ++i)
        if (d[i] > d[i - 1] && d[i] >= d[i + 1] && d[i] > 1e-3) ++maxima;
    EXPECT_EQ(maxima, 2);
}

TEST(Kde, Errors) {
    EXPECT_THROW(kde({}, {0.0}), Error);
    EXPECT_THROW(kde({1.0, 2.0}, {0.0}, -1.0), Error);
}

TEST(EvaluatePredictions, OraclePredictionsGivePerfectScores) {
    Xoshiro256 rng(4);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({rng.uniform(), rng.normal()});
    const EvalReport r = evaluate_predictions({"compute_time", "input_files_transfer_time"}, rows, rows, 64);
    for (const auto& o : r.observables) {
        EXPECT_EQ(o.r2, 1.0);
        EXPECT_EQ(o.kde.target, o.kde.predicted);
        EXPECT_EQ(o.kde.grid.size(), 64u);
    }
    TempDir dir;
    write_eval_report(r, dir.path().string());
    const CsvTable r2 = read_csv(dir.file("r2.csv"));
    ASSERT_EQ(r2.rows.size(), 2u);
    EXPECT_EQ(r2.rows[0][0], "compute_time");
    const CsvTable curve = read_csv(dir.file("kde_input_files_transfer_time.csv"));
    EXPECT_EQ(curve.header, (std::vector<std::string>{"grid", "target_density", "predicted_density"}));
    EXPECT_EQ(curve.rows.size(), 64u);
    std::ifstream report(dir.file("report.json"));
    EXPECT_TRUE(report.good());
}

TEST(Speedup, RatioIsElementwiseDivision) {
    const std::vector<BenchRow> sim = {{"homogeneous", 100, 10.0}, {"heterogeneous", 10000, 3.0}};
    const std::vector<BenchRow> sur = {{"heterogeneous", 10000, 0.5}, {"homogeneous", 100, 0.1}};
    const auto rows = speedup_report(sim, sur);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(rows[0].ratio, 100.0);
    EXPECT_DOUBLE_EQ(rows[1].ratio, 6.0);
    for (const auto& r : rows) EXPECT_GT(r.ratio, 0.0);
    EXPECT_NE(speedup_csv(rows).find("scenario,n_jobs,simulator_seconds,surrogate_seconds,ratio"), std::string::npos);
}

TEST(Speedup, KeyMismatchIsRejected) {
    EXPECT_THROW(speedup_report({{"homogeneous", 100, 1.0}}, {{"homogeneous", 200, 1.0}}), Error);
    EXPECT_THROW(speedup_report({{"homogeneous", 100, 1.0}}, {{"homogeneous", 100, 1.0}, {"x", 1, 1.0}}), Error);
    EXPECT_THROW(speedup_report({}, {{"homogeneous", 100, 1.0}}), Error);
}

TEST(BenchCsv, RoundTrip) {
    TempDir dir;
    const std::vector<BenchRow> rows = {{"homogeneous", 1, 1e-5}, {"heterogeneous", 10000, 0.123456789}};
    write_text_file(dir.file("bench.csv"), bench_csv(rows));
    const auto back = read_bench_csv(dir.file("bench.csv"));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].seconds, rows[1].seconds);
    EXPECT_EQ(back[0].scenario, "homogeneous");
}

}  // namespace
}  // namespace dcs
