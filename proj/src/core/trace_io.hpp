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
#include <string_view>
#include <vector>

#include "core/common.hpp"
#include "core/sim_engine.hpp"
#include "core/workload.hpp"

namespace dcs {

// Minimal CSV support: comma separated, no quoting (fields never contain commas).
std::vector<std::string> split_csv_line(std::string_view line, char sep = ',');
double parse_double(std::string_view field, const std::string& where);
std::int64_t parse_int(std::string_view field, const std::string& where);
std::uint64_t parse_uint(std::string_view field, const std::string& where);
std::string format_time(double seconds);  // fixed, 9 decimals

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// One workload.csv row: the job plus the resolved input size.
struct WorkloadRow {
    JobSpec job;
    std::uint64_t input_files_size = 0;

    bool operator==(const WorkloadRow&) const = default;
};

std::vector<WorkloadRow> workload_rows(const Workload& workload);

std::string workload_csv(const std::vector<WorkloadRow>& rows);
std::vector<WorkloadRow> read_workload_csv(const std::string& path);
std::vector<WorkloadRow> parse_workload_csv(const CsvTable& table, const std::string& source);

std::string dataset_csv(const DatasetSpec& dataset);
DatasetSpec read_dataset_csv(const std::string& path);

std::string trace_csv(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::string& path);
std::vector<TraceRecord> parse_trace_csv(const CsvTable& table, const std::string& source);

std::vector<std::string> feature_names(Scenario scenario);
std::vector<std::string> all_target_names();

/// Model-ready row. simulation_id is carried for reconstruction only and is
/// never part of the feature vector; job_index is (as feature "index").
struct SampleRow {
    std::int64_t simulation_id = 0;
    std::int64_t job_index = 0;
    std::vector<double> features;
    std::vector<double> targets;

    bool operator==(const SampleRow&) const = default;
};

struct SampleTable {
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;
    std::vector<SampleRow> rows;

    bool operator==(const SampleTable&) const = default;
};

// Joins workload features with trace observables on (simulation_id, job_index).
// Unmatched keys on either side raise an error listing up to 10 offenders.
std::vector<double> feature_row(Scenario scenario, const WorkloadRow& row);

// Features only; targets are left empty. Used for inference on unsimulated workloads.
SampleTable feature_table(Scenario scenario, const std::vector<WorkloadRow>& workload);

SampleTable join_traces(Scenario scenario, const std::vector<WorkloadRow>& workload,
                        const std::vector<TraceRecord>& trace);

// Sample files use full round-trip precision for every value.
std::string samples_csv(const SampleTable& table);
SampleTable read_samples_csv(const std::string& path);

}  // namespace dcs
