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
#include <string>
#include <vector>

#include "core/platform.hpp"
#include "core/workload.hpp"

namespace dcs {

/// Observables of one simulated job. Field order is the trace CSV column order.
struct TraceRecord {
    std::int64_t simulation_id = 0;
    std::int64_t job_index = 0;
    double submission_time = 0.0;
    double start_time = 0.0;
    double end_time = 0.0;
    double compute_time = 0.0;
    double input_files_transfer_time = 0.0;
    double output_files_transfer_time = 0.0;
    std::uint64_t input_bytes = 0;
    std::uint64_t output_bytes = 0;
    std::string worker_id;

    bool operator==(const TraceRecord&) const = default;
};

enum class SimEventKind : int {
    job_submitted = 0,
    transfer_rate_change = 1,  // a transfer clears its route latency and starts sharing bandwidth
    transfer_done = 2,
    compute_done = 3,
    output_done = 4,
};

struct SimStats {
    std::uint64_t events = 0;
    std::uint64_t rate_recomputations = 0;
    std::size_t max_active_transfers = 0;
    std::size_t max_queue_length = 0;
    std::uint64_t audit_checks = 0;
};

struct SimOptions {
    // Checks core conservation after every event and byte conservation at
    // every transfer completion; violations throw Error(internal).
    bool audit = false;
    SimStats* stats = nullptr;
};

/// Flow-level discrete-event simulation of a workload on a platform.
///
/// Jobs queue FIFO at submission and run on one core of the worker with the
/// most free cores (ties by node id). Each job reads its inputs, computes for
/// flops / core_speed, then writes its output back to the storage node that
/// held its first input. Concurrent transfers split every shared link and
/// disk equally; rates are recomputed whenever a transfer starts or ends.
/// Route latency is paid once, before the transfer starts moving bytes.
std::vector<TraceRecord> run_simulation(const PlatformSpec& platform, const std::vector<JobSpec>& jobs,
                                        const DatasetSpec& dataset, const SimOptions& options = {});

struct BenchRow {
    std::string scenario;
    std::int64_t n_jobs = 0;
    double seconds = 0.0;  // median wall-clock of one run_simulation call
};

std::vector<BenchRow> bench_simulation(const PlatformSpec& platform, Scenario scenario,
                                       const std::vector<SuiteEntry>& suite, std::uint64_t seed,
                                       const WorkloadConfig& config = WorkloadConfig::defaults(),
                                       int repeats = 3);

}  // namespace dcs
