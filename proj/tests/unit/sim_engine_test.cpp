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

#include <algorithm>
#include <cmath>
#include <queue>

#include "core/sim_engine.hpp"
#include "core/trace_io.hpp"

namespace dcs {
namespace {

// storage --link--> worker, one worker with the given cores and speed.
PlatformSpec one_link_platform(int cores, double speed, double bandwidth, double latency,
                               double disk_bw = 1e15) {
    PlatformSpec p;
    p.nodes.push_back({"storage", NodeRole::storage, 0, 0.0, disk_bw, disk_bw, 1e15});
    p.nodes.push_back({"worker", NodeRole::worker, cores, speed, 0.0, 0.0, 0.0});
    p.links.push_back({"wan", bandwidth, latency});
    p.routes[{"storage", "worker"}] = {"wan"};
    validate_platform(p);
    return p;
}

struct Jobs {
    std::vector<JobSpec> jobs;
    DatasetSpec dataset;

    void add(double submit, double flops, std::uint64_t in_bytes, std::uint64_t out_bytes,
             const std::string& location = "storage") {
        const auto i = static_cast<std::int64_t>(jobs.size());
        const std::string file = "f" + std::to_string(i);
        dataset.files.push_back({file, in_bytes, location});
        jobs.push_back({0, i, submit, flops, {file}, out_bytes, 0});
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(SimEngine, EmptyJobListGivesEmptyTrace) {
    EXPECT_TRUE(run_simulation(builtin_platform(Scenario::homogeneous), {}, {}).empty());
}

TEST(SimEngine, UncontendedJobMatchesClosedForms) {
    const PlatformSpec p = one_link_platform(4, 1.2e10, 1.25e8, 1e-4);
    Jobs w;
    w.add(3.0, 2.4e11, 1'000'000'000, 250'000'000);
    const auto trace = run_simulation(p, w.jobs, w.dataset);
    ASSERT_EQ(trace.size(), 1u);
    const TraceRecord& r = trace[0];
    EXPECT_LT(rel(r.compute_time, 20.0), 1e-9);
    EXPECT_LT(rel(r.input_files_transfer_time, 8.0001), 1e-9);
    EXPECT_LT(rel(r.output_files_transfer_time, 1e-4 + 2.0), 1e-9);
    EXPECT_EQ(r.submission_time, 3.0);
    EXPECT_EQ(r.start_time, 3.0);
    EXPECT_LT(rel(r.end_time, 3.0 + 8.0001 + 20.0 + 2.0001), 1e-9);
    EXPECT_EQ(r.input_bytes, 1'000'000'000u);
    EXPECT_EQ(r.output_bytes, 250'000'000u);
    EXPECT_EQ(r.worker_id, "worker");
}

TEST(SimEngine, SlowDiskBoundsTransferRate) {
    const PlatformSpec p = one_link_platform(1, 1e9, 1.25e8, 0.0, 5e7);
    Jobs w;
    w.add(0.0, 1e9, 100'000'000, 0);
    const auto r = run_simulation(p, w.jobs, w.dataset)[0];
    EXPECT_LT(rel(r.input_files_transfer_time, 2.0), 1e-9);
    EXPECT_EQ(r.output_files_transfer_time, 0.0);
}

TEST(SimEngine, TwoEqualTransfersShareTheLink) {
    const double B = 1.25e8, L = 1e-4, S = 5e8;
    const PlatformSpec p = one_link_platform(2, 1e9, B, L);
    Jobs w;
    w.add(0.0, 1e9, static_cast<std::uint64_t>(S), 0);
    w.add(0.0, 1e9, static_cast<std::uint64_t>(S), 0);
    const auto trace = run_simulation(p, w.jobs, w.dataset);
    for (const auto& r : trace) EXPECT_LT(rel(r.input_files_transfer_time, L + 2 * S / B), 1e-9);
}

TEST(SimEngine, StaggeredTransfersFollowPiecewiseRates) {
    // Second transfer arrives at t=2 when the first has 2.5e8 left; both share
    // until the first finishes, then the second runs alone.
    const double B = 1.25e8;
    const PlatformSpec p = one_link_platform(2, 1e9, B, 0.0);
    Jobs w;
    w.add(0.0, 1e9, 500'000'000, 0);
    w.add(2.0, 1e9, 500'000'000, 0);
    const auto trace = run_simulation(p, w.jobs, w.dataset);
    const double first_done = 2.0 + 2.5e8 / (B / 2);  // 6
    EXPECT_LT(rel(trace[0].input_files_transfer_time, first_done), 1e-9);
    const double second_left = 5e8 - (first_done - 2.0) * B / 2;
    EXPECT_LT(rel(trace[1].input_files_transfer_time, first_done - 2.0 + second_left / B), 1e-9);
}

// Independent FIFO wave schedule: each job takes the earliest free core.
std::vector<double> wave_oracle(std::size_t n, int cores, double duration) {
    std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
    for (int c = 0; c < cores; ++c) free_at.push(0.0);
    std::vector<double> end(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double start = free_at.top();
        free_at.pop();
        end[i] = start + duration;
        free_at.push(end[i]);
    }
    return end;
}

TEST(SimEngine, IdenticalJobsCompleteInWaves) {
    for (int cores : {1, 3, 8}) {
        for (std::size_t n : {1u, 7u, 24u}) {
            const PlatformSpec p = one_link_platform(cores, 1e9, 1e18, 0.0);
            Jobs w;
            for (std::size_t i = 0; i < n; ++i) w.add(0.0, 5e9, 1, 0);
            const auto trace = run_simulation(p, w.jobs, w.dataset);
            const auto expected = wave_oracle(n, cores, 5.0);
            std::size_t waves = 0;
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_NEAR(trace[i].end_time, expected[i], 1e-6) << "cores=" << cores << " job " << i;
                waves = std::max(waves, static_cast<std::size_t>(std::lround(trace[i].end_time / 5.0)));
            }
            EXPECT_EQ(waves, (n + static_cast<std::size_t>(cores) - 1) / static_cast<std::size_t>(cores));
        }
    }
}

TEST(SimEngine, SchedulerPicksMostFreeCoresThenNodeId) {
    PlatformSpec p;
    p.nodes.push_back({"storage", NodeRole::storage, 0, 0.0, 1e15, 1e15, 1e15});
    p.nodes.push_back({"b-worker", NodeRole::worker, 2, 1e9, 0, 0, 0});
    p.nodes.push_back({"a-worker", NodeRole::worker, 2, 1e9, 0, 0, 0});
    p.nodes.push_back({"c-worker", NodeRole::worker, 3, 1e9, 0, 0, 0});
    for (const char* n : {"a-worker", "b-worker", "c-worker"}) {
        p.links.push_back({std::string("l-") + n, 1e18, 0.0});
        p.routes[{"storage", n}] = {std::string("l-") + n};
    }
    Jobs w;
    for (int i = 0; i < 4; ++i) w.add(0.0, 1e10, 1, 0);
    const auto trace = run_simulation(p, w.jobs, w.dataset);
    // free: a2 b2 c3 -> c; a2 b2 c2 -> a; a1 b2 c2 -> b; a1 b1 c2 -> c
    EXPECT_EQ(trace[0].worker_id, "c-worker");
    EXPECT_EQ(trace[1].worker_id, "a-worker");
    EXPECT_EQ(trace[2].worker_id, "b-worker");
    EXPECT_EQ(trace[3].worker_id, "c-worker");
}

TEST(SimEngine, MissingInputFileNamesJobAndFile) {
    Jobs w;
    w.add(0.0, 1e9, 10, 0);
    w.dataset.files.clear();
    try {
        run_simulation(one_link_platform(1, 1e9, 1e8, 0.0), w.jobs, w.dataset);
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("job 0"), std::string::npos) << msg;
        EXPECT_NE(msg.find("f0"), std::string::npos) << msg;
    }
}

TEST(SimEngine, UnroutablePairNamesNodes) {
    PlatformSpec p = one_link_platform(1, 1e9, 1e8, 0.0);
    p.nodes.push_back({"island", NodeRole::storage, 0, 0.0, 1e9, 1e9, 1e15});
    Jobs w;
    w.add(0.0, 1e9, 10, 0, "island");
    try {
        run_simulation(p, w.jobs, w.dataset);
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("island"), std::string::npos) << msg;
        EXPECT_NE(msg.find("worker"), std::string::npos) << msg;
    }
}

class ScenarioSim : public ::testing::TestWithParam<Scenario> {};

TEST_P(ScenarioSim, TraceInvariantsHoldUnderAudit) {
    const Scenario s = GetParam();
    const PlatformSpec p = builtin_platform(s);
    const Workload w = generate_workload(s, 300, 4, 11);
    SimStats stats;
    const auto trace = run_simulation(p, w.jobs, w.dataset, {true, &stats});
    ASSERT_EQ(trace.size(), w.jobs.size());
    EXPECT_GT(stats.audit_checks, 0u);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceRecord& r = trace[i];
        EXPECT_EQ(r.job_index, static_cast<std::int64_t>(i));
        EXPECT_LE(r.submission_time, r.start_time);
        EXPECT_LE(r.start_time, r.end_time);
        EXPECT_GE(r.compute_time, 0.0);
        EXPECT_GE(r.input_files_transfer_time, 0.0);
        EXPECT_GE(r.output_files_transfer_time, 0.0);
        EXPECT_NEAR(r.end_time - r.start_time,
                    r.input_files_transfer_time + r.compute_time + r.output_files_transfer_time, 1e-9);
        EXPECT_LT(rel(r.compute_time, w.jobs[i].flops / p.node(r.worker_id).core_speed), 1e-9);
        EXPECT_EQ(r.input_bytes, input_files_size(w.jobs[i], w.dataset));
        EXPECT_EQ(r.output_bytes, w.jobs[i].output_files_size);
    }
}

TEST_P(ScenarioSim, IsBitwiseDeterministic) {
    const Scenario s = GetParam();
    const PlatformSpec p = builtin_platform(s);
    const Workload w = generate_workload(s, 200, 1, 5);
    EXPECT_EQ(trace_csv(run_simulation(p, w.jobs, w.dataset)), trace_csv(run_simulation(p, w.jobs, w.dataset)));
}

TEST_P(ScenarioSim, CoreCountNeverExceeded) {
    // Replay start/end intervals per worker and check concurrency against cores.
    const Scenario s = GetParam();
    const PlatformSpec p = builtin_platform(s);
    const Workload w = generate_workload(s, 500, 2, 3);
    const auto trace = run_simulation(p, w.jobs, w.dataset);
    std::map<std::string, std::vector<std::pair<double, int>>> events;
    for (const auto& r : trace) {
        events[r.worker_id].push_back({r.start_time, +1});
        events[r.worker_id].push_back({r.end_time, -1});
    }
    for (auto& [worker, ev] : events) {
        std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.first != b.first ? a.first < b.first : a.second < b.second; });
        int running = 0;
        for (const auto& e : ev) {
            running += e.second;
            EXPECT_LE(running, p.node(worker).cores) << worker;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Builtin, ScenarioSim, ::testing::Values(Scenario::homogeneous, Scenario::heterogeneous),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(BenchSimulation, OneRowPerSuiteEntry) {
    const std::vector<SuiteEntry> suite = {{1, 1, false}, {50, 1, false}, {400, 1, false}};
    const auto rows = bench_simulation(builtin_platform(Scenario::homogeneous), Scenario::homogeneous, suite, 1);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].scenario, "homogeneous");
        EXPECT_EQ(rows[i].n_jobs, suite[i].n_jobs);
        EXPECT_GT(rows[i].seconds, 0.0);
    }
    EXPECT_LE(rows[0].seconds, rows[2].seconds);
}

TEST(BenchSimulation, EmptySuiteIsRejected) {
    EXPECT_THROW(bench_simulation(builtin_platform(Scenario::homogeneous), Scenario::homogeneous, {}, 1), Error);
}

}  // namespace
}  // namespace dcs
