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
#include <optional>
#include <string>
#include <vector>

#include "core/trace_io.hpp"
#include "core/train.hpp"
#include "core/workload.hpp"

namespace dcs {

inline constexpr std::int64_t kDeskSimulationsPerBatch = 20;

struct ExperimentManifest {
    Scenario scenario = Scenario::heterogeneous;
    std::int64_t simulations_per_batch = kDeskSimulationsPerBatch;
    std::vector<std::int64_t> job_counts = default_training_job_counts();
    std::int64_t extrapolation_simulations = 10;
    std::int64_t extrapolation_jobs = 10'000;
    std::uint64_t seed = 0;
    std::vector<std::string> targets = all_target_names();
    double train_fraction = 0.7;
    TrainConfig train;  // model dims and seeds are filled in by the pipeline
    bool use_tuned_config = false;
    std::optional<SearchSpace> search_space;  // defaults per architecture
    int tune_epochs = 0;                      // 0: same as train.max_epochs
    std::string platform_file;                // empty: builtin platform
    std::string job_classes_file;             // empty: builtin classes
    int kde_grid_points = 256;
    int bench_repeats = 3;
    std::string out = "runs";
    int jobs = 1;  // worker threads; never affects outputs

    void validate() const;
};

// Fields present in `text` override `base`; unknown keys are rejected.
ExperimentManifest parse_manifest(const std::string& text, ExperimentManifest base = {});
ExperimentManifest load_manifest(const std::string& path, ExperimentManifest base = {});
std::string serialize_manifest(const ExperimentManifest& manifest);

// FNV-1a over the canonical serialization, excluding `out` and `jobs`.
std::uint64_t manifest_hash(const ExperimentManifest& manifest);
std::string hex64(std::uint64_t value);

struct DerivedSeeds {
    std::uint64_t workload = 0;
    std::uint64_t split = 0;
    std::uint64_t init = 0;
    std::uint64_t shuffle = 0;
    std::uint64_t tune = 0;
};
DerivedSeeds derive_seeds(std::uint64_t seed);

// Directory layout under out/<scenario>/.
struct RunPaths {
    std::string root;
    std::string simulation(std::int64_t simulation_id) const;
    std::string simulation_index() const;  // simulations.csv
    std::string preprocess() const;
    std::string tune() const;
    std::string model() const;
    std::string eval() const;
    std::string bench() const;
};
RunPaths run_paths(const ExperimentManifest& manifest);

struct SimulationEntry {
    std::int64_t simulation_id = 0;
    std::int64_t n_jobs = 0;
    bool extrapolation = false;
};
std::vector<SimulationEntry> enumerate_simulations(const ExperimentManifest& manifest);

PlatformSpec manifest_platform(const ExperimentManifest& manifest);
WorkloadConfig manifest_workload_config(const ExperimentManifest& manifest);

// Each command returns a short human-readable summary.
std::string cmd_simulate(const ExperimentManifest& manifest);
std::string cmd_preprocess(const ExperimentManifest& manifest);
std::string cmd_tune(const ExperimentManifest& manifest);
std::string cmd_train(const ExperimentManifest& manifest);
std::string cmd_evaluate(const ExperimentManifest& manifest);
std::string cmd_bench(const ExperimentManifest& manifest);

}  // namespace dcs
