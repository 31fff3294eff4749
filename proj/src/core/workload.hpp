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

#include "core/common.hpp"

namespace dcs {

struct JobSpec {
    std::int64_t simulation_id = 0;
    std::int64_t job_index = 0;
    double submission_time = 0.0;  // s
    double flops = 0.0;
    std::vector<std::string> input_files;
    std::uint64_t output_files_size = 0;  // bytes
    int class_id = 0;

    bool operator==(const JobSpec&) const = default;
};

struct FileSpec {
    std::string file_id;
    std::uint64_t size = 0;  // bytes
    std::string location;    // node id

    bool operator==(const FileSpec&) const = default;
};

struct DatasetSpec {
    std::vector<FileSpec> files;

    bool operator==(const DatasetSpec&) const = default;

    const FileSpec* find(const std::string& file_id) const;
};

struct Workload {
    std::vector<JobSpec> jobs;
    DatasetSpec dataset;

    bool operator==(const Workload&) const = default;
};

// Sum of the sizes of a job's input files; throws when a file is missing.
std::uint64_t input_files_size(const JobSpec& job, const DatasetSpec& dataset);

struct LogNormal {
    double location = 0.0;  // mean of log(x)
    double scale = 0.0;     // std of log(x)
};

struct JobClassSpec {
    int class_id = 0;
    LogNormal flops;
    LogNormal input_files_size;
    LogNormal output_files_size;
    double mean_interarrival = 0.0;  // s, exponential
};

struct WorkloadConfig {
    // Homogeneous scenario: every job carries exactly these demands.
    double homogeneous_flops = 1e11;
    std::uint64_t homogeneous_input_size = 1'000'000'000;
    std::uint64_t homogeneous_output_size = 100'000'000;
    std::string homogeneous_storage = "storage";

    std::vector<JobClassSpec> classes;
    std::string heterogeneous_storage = "dc1-storage";

    static WorkloadConfig defaults();
};

void validate_workload_config(const WorkloadConfig& config);

// Class-parameter file: {"classes": [{"class_id", "flops": {"median", "sigma"},
// "input_files_size_bytes": {...}, "output_files_size_bytes": {...},
// "mean_interarrival_s"}]}. Medians map to location = ln(median).
WorkloadConfig parse_workload_config(const std::string& text);
std::string serialize_workload_config(const WorkloadConfig& config);
WorkloadConfig load_workload_config_file(const std::string& path);

/// Deterministic workload for one simulation.
///
/// Heterogeneous draw order per job, from a xoshiro256** stream seeded with
/// mix_seed(seed, simulation_id, 1): class, interarrival gap, flops, input
/// size, output size. Byte sizes are rounded and truncated to >= 1.
Workload generate_workload(Scenario scenario, std::int64_t n_jobs, std::int64_t simulation_id,
                           std::uint64_t seed, const WorkloadConfig& config = WorkloadConfig::defaults());

struct SuiteEntry {
    std::int64_t n_jobs = 0;
    std::int64_t n_simulations = 0;
    bool extrapolation = false;

    bool operator==(const SuiteEntry&) const = default;
};

inline constexpr std::int64_t kFullSimulationsPerBatch = 1000;

std::vector<std::int64_t> default_training_job_counts();

// Training batches (one per job count) followed by the extrapolation entry.
std::vector<SuiteEntry> scenario_suite(Scenario scenario,
                                       std::int64_t simulations_per_batch = kFullSimulationsPerBatch,
                                       std::vector<std::int64_t> job_counts = default_training_job_counts(),
                                       std::int64_t extrapolation_simulations = 10,
                                       std::int64_t extrapolation_jobs = 10'000);

}  // namespace dcs
