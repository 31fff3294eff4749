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

#include "core/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace dcs {

namespace {

[[noreturn]] void bad_field(const std::string& where, std::string_view field) {
    fail(ErrorCategory::parse, where + ": cannot parse '" + std::string(field) + "'");
}

std::string format_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected, const std::string& source) {
    if (table.header != expected)
        fail(ErrorCategory::parse, source + ": unexpected header '" + join(table.header, ',') + "', expected '" +
                                       join(expected, ',') + "'");
}

const std::vector<std::string> kWorkloadHeader = {"simulation_id", "job_index",        "submission_time",
                                                  "flops",         "input_files",      "input_files_size",
                                                  "output_files_size", "class_id"};
const std::vector<std::string> kDatasetHeader = {"file_id", "size", "location"};
const std::vector<std::string> kTraceHeader = {"simulation_id",
                                               "job_index",
                                               "submission_time",
                                               "start_time",
                                               "end_time",
                                               "compute_time",
                                               "input_files_transfer_time",
                                               "output_files_transfer_time",
                                               "input_bytes",
                                               "output_bytes",
                                               "worker_id"};

using Key = std::pair<std::int64_t, std::int64_t>;

std::string key_string(const Key& k) {
    return "(" + std::to_string(k.first) + ", " + std::to_string(k.second) + ")";
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view field, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) bad_field(where, field);
    return v;
}

std::int64_t parse_int(std::string_view field, const std::string& where) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) bad_field(where, field);
    return v;
}

std::uint64_t parse_uint(std::string_view field, const std::string& where) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) bad_field(where, field);
    return v;
}

std::string format_time(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", seconds);
    return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCategory::parse, "missing CSV column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            fail(ErrorCategory::parse, path + ":" + std::to_string(line_no) + ": expected " +
                                           std::to_string(table.header.size()) + " fields, got " +
                                           std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) fail(ErrorCategory::parse, path + ": missing header row");
    return table;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCategory::io, "cannot write '" + path + "' (check that the directory exists and is writable)");
    out << text;
    if (!out) fail(ErrorCategory::io, "write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCategory::io, "cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<WorkloadRow> workload_rows(const Workload& workload) {
    std::vector<WorkloadRow> rows;
    rows.reserve(workload.jobs.size());
    for (const auto& job : workload.jobs) rows.push_back({job, input_files_size(job, workload.dataset)});
    return rows;
}

std::string workload_csv(const std::vector<WorkloadRow>& rows) {
    std::string out = join(kWorkloadHeader, ',') + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.job.simulation_id) + ',' + std::to_string(r.job.job_index) + ',' +
               format_exact(r.job.submission_time) + ',' + format_exact(r.job.flops) + ',' +
               join(r.job.input_files, ';') + ',' + std::to_string(r.input_files_size) + ',' +
               std::to_string(r.job.output_files_size) + ',' + std::to_string(r.job.class_id) + '\n';
    }
    return out;
}

std::vector<WorkloadRow> parse_workload_csv(const CsvTable& table, const std::string& source) {
    require_header(table, kWorkloadHeader, source);
    std::vector<WorkloadRow> rows;
    rows.reserve(table.rows.size());
    std::size_t line = 1;
    for (const auto& f : table.rows) {
        const std::string where = source + ":" + std::to_string(++line);
        WorkloadRow r;
        r.job.simulation_id = parse_int(f[0], where);
        r.job.job_index = parse_int(f[1], where);
        r.job.submission_time = parse_double(f[2], where);
        r.job.flops = parse_double(f[3], where);
        if (!f[4].empty()) r.job.input_files = split_csv_line(f[4], ';');
        r.input_files_size = parse_uint(f[5], where);
        r.job.output_files_size = parse_uint(f[6], where);
        r.job.class_id = static_cast<int>(parse_int(f[7], where));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<WorkloadRow> read_workload_csv(const std::string& path) { return parse_workload_csv(read_csv(path), path); }

std::string dataset_csv(const DatasetSpec& dataset) {
    std::string out = join(kDatasetHeader, ',') + "\n";
    for (const auto& f : dataset.files) out += f.file_id + ',' + std::to_string(f.size) + ',' + f.location + '\n';
    return out;
}

DatasetSpec read_dataset_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    require_header(table, kDatasetHeader, path);
    DatasetSpec d;
    std::size_t line = 1;
    for (const auto& f : table.rows) d.files.push_back({f[0], parse_uint(f[1], path + ":" + std::to_string(++line)), f[2]});
    return d;
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
    std::string out = join(kTraceHeader, ',') + "\n";
    for (const auto& r : trace) {
        out += std::to_string(r.simulation_id) + ',' + std::to_string(r.job_index) + ',' +
               format_time(r.submission_time) + ',' + format_time(r.start_time) + ',' + format_time(r.end_time) +
               ',' + format_time(r.compute_time) + ',' + format_time(r.input_files_transfer_time) + ',' +
               format_time(r.output_files_transfer_time) + ',' + std::to_string(r.input_bytes) + ',' +
               std::to_string(r.output_bytes) + ',' + r.worker_id + '\n';
    }
    return out;
}

std::vector<TraceRecord> parse_trace_csv(const CsvTable& table, const std::string& source) {
    require_header(table, kTraceHeader, source);
    std::vector<TraceRecord> trace;
    trace.reserve(table.rows.size());
    std::size_t line = 1;
    for (const auto& f : table.rows) {
        const std::string where = source + ":" + std::to_string(++line);
        TraceRecord r;
        r.simulation_id = parse_int(f[0], where);
        r.job_index = parse_int(f[1], where);
        r.submission_time = parse_double(f[2], where);
        r.start_time = parse_double(f[3], where);
        r.end_time = parse_double(f[4], where);
        r.compute_time = parse_double(f[5], where);
        r.input_files_transfer_time = parse_double(f[6], where);
        r.output_files_transfer_time = parse_double(f[7], where);
        r.input_bytes = parse_uint(f[8], where);
        r.output_bytes = parse_uint(f[9], where);
        r.worker_id = f[10];
        trace.push_back(std::move(r));
    }
    return trace;
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) { return parse_trace_csv(read_csv(path), path); }

std::vector<std::string> feature_names(Scenario scenario) {
    std::vector<std::string> names = {"index", "flops", "input_files_size", "output_files_size"};
    if (scenario == Scenario::heterogeneous) names.push_back("submission_time");
    return names;
}

std::vector<std::string> all_target_names() {
    return {"compute_time", "input_files_transfer_time", "output_files_transfer_time", "start_time", "end_time"};
}

std::vector<double> feature_row(Scenario scenario, const WorkloadRow& w) {
    std::vector<double> f = {static_cast<double>(w.job.job_index), w.job.flops,
                             static_cast<double>(w.input_files_size), static_cast<double>(w.job.output_files_size)};
    if (scenario == Scenario::heterogeneous) f.push_back(w.job.submission_time);
    return f;
}

SampleTable feature_table(Scenario scenario, const std::vector<WorkloadRow>& workload) {
    SampleTable table;
    table.feature_names = feature_names(scenario);
    table.rows.reserve(workload.size());
    for (const auto& w : workload)
        table.rows.push_back({w.job.simulation_id, w.job.job_index, feature_row(scenario, w), {}});
    return table;
}

SampleTable join_traces(Scenario scenario, const std::vector<WorkloadRow>& workload,
                        const std::vector<TraceRecord>& trace) {
    std::map<Key, const WorkloadRow*> by_key;
    for (const auto& w : workload) {
        const Key k{w.job.simulation_id, w.job.job_index};
        if (!by_key.emplace(k, &w).second)
            fail(ErrorCategory::validation, "duplicate workload row " + key_string(k));
    }

    std::vector<std::string> unmatched;
    std::size_t unmatched_count = 0;
    auto note = [&](const std::string& what) {
        if (unmatched.size() < 10) unmatched.push_back(what);
        ++unmatched_count;
    };

    std::map<Key, const TraceRecord*> traced;
    for (const auto& t : trace) {
        const Key k{t.simulation_id, t.job_index};
        if (!by_key.count(k)) note("trace " + key_string(k));
        if (!traced.emplace(k, &t).second) fail(ErrorCategory::validation, "duplicate trace row " + key_string(k));
    }
    for (const auto& [k, w] : by_key)
        if (!traced.count(k)) note("workload " + key_string(k));
    if (unmatched_count) {
        std::string msg = std::to_string(unmatched_count) + " unmatched keys; first offenders:";
        for (const auto& u : unmatched) msg += " " + u;
        fail(ErrorCategory::validation, msg);
    }

    SampleTable table;
    table.feature_names = feature_names(scenario);
    table.target_names = all_target_names();
    table.rows.reserve(traced.size());
    for (const auto& [k, t] : traced) {
        const WorkloadRow& w = *by_key.at(k);
        SampleRow row;
        row.simulation_id = k.first;
        row.job_index = k.second;
        row.features = feature_row(scenario, w);
        row.targets = {t->compute_time, t->input_files_transfer_time, t->output_files_transfer_time, t->start_time,
                       t->end_time};
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string samples_csv(const SampleTable& table) {
    std::vector<std::string> header = {"simulation_id", "job_index"};
    header.insert(header.end(), table.feature_names.begin(), table.feature_names.end());
    header.insert(header.end(), table.target_names.begin(), table.target_names.end());
    std::string out = join(header, ',') + "\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.simulation_id) + ',' + std::to_string(r.job_index);
        for (double v : r.features) out += ',' + format_exact(v);
        for (double v : r.targets) out += ',' + format_exact(v);
        out += '\n';
    }
    return out;
}

SampleTable read_samples_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header.size() < 2 || csv.header[0] != "simulation_id" || csv.header[1] != "job_index")
        fail(ErrorCategory::parse, path + ": samples file must start with simulation_id,job_index");
    SampleTable table;
    const auto all_targets = all_target_names();
    for (std::size_t c = 2; c < csv.header.size(); ++c) {
        const bool is_target = std::find(all_targets.begin(), all_targets.end(), csv.header[c]) != all_targets.end();
        if (is_target)
            table.target_names.push_back(csv.header[c]);
        else if (!table.target_names.empty())
            fail(ErrorCategory::parse, path + ": feature column '" + csv.header[c] + "' after target columns");
        else
            table.feature_names.push_back(csv.header[c]);
    }
    const std::size_t nf = table.feature_names.size();
    std::size_t line = 1;
    for (const auto& f : csv.rows) {
        const std::string where = path + ":" + std::to_string(++line);
        SampleRow r;
        r.simulation_id = parse_int(f[0], where);
        r.job_index = parse_int(f[1], where);
        for (std::size_t c = 0; c < nf; ++c) r.features.push_back(parse_double(f[2 + c], where));
        for (std::size_t c = 2 + nf; c < f.size(); ++c) r.targets.push_back(parse_double(f[c], where));
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace dcs
