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

#include "core/workload.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/rng.hpp"

namespace dcs {

using nlohmann::json;

namespace {

JobClassSpec make_class(int id, double flops_median, double input_median, double output_median,
                        double flops_sigma, double size_sigma, double interarrival) {
    return JobClassSpec{id,
                        {std::log(flops_median), flops_sigma},
                        {std::log(input_median), size_sigma},
                        {std::log(output_median), size_sigma},
                        interarrival};
}

std::uint64_t sample_bytes(Xoshiro256& rng, const LogNormal& dist) {
    const double x = std::exp(dist.location + dist.scale * rng.normal());
    const double rounded = std::round(x);
    return rounded < 1.0 ? 1 : static_cast<std::uint64_t>(rounded);
}

double sample_positive(Xoshiro256& rng, const LogNormal& dist) {
    const double x = std::exp(dist.location + dist.scale * rng.normal());
    return x > 0.0 ? x : std::numeric_limits<double>::min();
}

std::string file_id(std::int64_t simulation_id, std::int64_t job_index) {
    return "sim" + std::to_string(simulation_id) + "-job" + std::to_string(job_index) + "-in";
}

json lognormal_to_json(const LogNormal& d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", std::exp(d.location));
    return {{"median", std::strtod(buf, nullptr)}, {"sigma", d.scale}};
}

LogNormal lognormal_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("median") || !j.contains("sigma"))
        fail(ErrorCategory::validation, where + ": expected {\"median\", \"sigma\"}");
    const double median = j["median"].get<double>();
    if (!(median > 0.0)) fail(ErrorCategory::validation, where + ": median must be positive");
    return {std::log(median), j["sigma"].get<double>()};
}

}  // namespace

const FileSpec* DatasetSpec::find(const std::string& file_id) const {
    for (const auto& f : files)
        if (f.file_id == file_id) return &f;
    return nullptr;
}

std::uint64_t input_files_size(const JobSpec& job, const DatasetSpec& dataset) {
    std::uint64_t total = 0;
    for (const auto& id : job.input_files) {
        const FileSpec* f = dataset.find(id);
        if (!f)
            fail(ErrorCategory::simulation,
                 "job " + std::to_string(job.job_index) + ": missing input file '" + id + "'");
        total += f->size;
    }
    return total;
}

WorkloadConfig WorkloadConfig::defaults() {
    WorkloadConfig c;
    c.classes = {
        make_class(0, 2e10, 2e8, 2e7, 0.25, 0.5, 15.0),
        make_class(1, 6e10, 5e8, 5e7, 0.25, 0.5, 15.0),
        make_class(2, 1.5e11, 1e9, 1e8, 0.25, 0.5, 15.0),
        make_class(3, 4e11, 2e9, 2e8, 0.25, 0.5, 15.0),
        make_class(4, 1e12, 4e9, 4e8, 0.25, 0.5, 15.0),
    };
    return c;
}

void validate_workload_config(const WorkloadConfig& config) {
    auto check = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorCategory::validation, "workload config: " + what);
    };
    check(config.homogeneous_flops > 0.0, "homogeneous flops must be positive");
    check(config.homogeneous_input_size > 0, "homogeneous input size must be positive");
    check(!config.classes.empty(), "at least one job class is required");
    std::set<int> ids;
    for (const auto& k : config.classes) {
        const std::string tag = "class " + std::to_string(k.class_id) + ": ";
        check(ids.insert(k.class_id).second, tag + "duplicate class_id");
        for (const LogNormal* d : {&k.flops, &k.input_files_size, &k.output_files_size}) {
            check(std::isfinite(d->location) && std::isfinite(d->scale), tag + "distribution parameters must be finite");
            check(d->scale >= 0.0, tag + "sigma must be non-negative");
        }
        check(std::isfinite(k.mean_interarrival) && k.mean_interarrival > 0.0,
              tag + "mean interarrival must be positive");
    }
}

WorkloadConfig parse_workload_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::parse, "workload config syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    WorkloadConfig config = WorkloadConfig::defaults();
    try {
        if (doc.contains("homogeneous")) {
            const auto& h = doc["homogeneous"];
            config.homogeneous_flops = h.value("flops", config.homogeneous_flops);
            config.homogeneous_input_size = h.value("input_files_size_bytes", config.homogeneous_input_size);
            config.homogeneous_output_size = h.value("output_files_size_bytes", config.homogeneous_output_size);
            config.homogeneous_storage = h.value("storage", config.homogeneous_storage);
        }
        if (doc.contains("heterogeneous_storage"))
            config.heterogeneous_storage = doc["heterogeneous_storage"].get<std::string>();
        if (doc.contains("classes")) {
            config.classes.clear();
            for (const auto& k : doc["classes"]) {
                JobClassSpec spec;
                spec.class_id = k.at("class_id").get<int>();
                const std::string where = "class " + std::to_string(spec.class_id);
                spec.flops = lognormal_from_json(k.at("flops"), where + " flops");
                spec.input_files_size = lognormal_from_json(k.at("input_files_size_bytes"), where + " input");
                spec.output_files_size = lognormal_from_json(k.at("output_files_size_bytes"), where + " output");
                spec.mean_interarrival = k.at("mean_interarrival_s").get<double>();
                config.classes.push_back(spec);
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorCategory::validation, std::string("workload config: ") + e.what());
    }
    validate_workload_config(config);
    return config;
}

std::string serialize_workload_config(const WorkloadConfig& config) {
    json doc;
    doc["homogeneous"] = {{"flops", config.homogeneous_flops},
                          {"input_files_size_bytes", config.homogeneous_input_size},
                          {"output_files_size_bytes", config.homogeneous_output_size},
                          {"storage", config.homogeneous_storage}};
    doc["heterogeneous_storage"] = config.heterogeneous_storage;
    doc["classes"] = json::array();
    for (const auto& k : config.classes) {
        doc["classes"].push_back({{"class_id", k.class_id},
                                  {"flops", lognormal_to_json(k.flops)},
                                  {"input_files_size_bytes", lognormal_to_json(k.input_files_size)},
                                  {"output_files_size_bytes", lognormal_to_json(k.output_files_size)},
                                  {"mean_interarrival_s", k.mean_interarrival}});
    }
    return doc.dump(2) + "\n";
}

WorkloadConfig load_workload_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open workload config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_workload_config(buffer.str());
}

Workload generate_workload(Scenario scenario, std::int64_t n_jobs, std::int64_t simulation_id,
                           std::uint64_t seed, const WorkloadConfig& config) {
    if (n_jobs < 0) fail(ErrorCategory::argument, "n_jobs must be non-negative, got " + std::to_string(n_jobs));
    Workload w;
    w.jobs.reserve(static_cast<std::size_t>(n_jobs));
    w.dataset.files.reserve(static_cast<std::size_t>(n_jobs));

    if (scenario == Scenario::homogeneous) {
        for (std::int64_t i = 0; i < n_jobs; ++i) {
            JobSpec job;
            job.simulation_id = simulation_id;
            job.job_index = i;
            job.flops = config.homogeneous_flops;
            job.input_files = {file_id(simulation_id, i)};
            job.output_files_size = config.homogeneous_output_size;
            w.dataset.files.push_back({job.input_files.front(), config.homogeneous_input_size,
                                       config.homogeneous_storage});
            w.jobs.push_back(std::move(job));
        }
        return w;
    }

    validate_workload_config(config);
    Xoshiro256 rng(mix_seed(seed, static_cast<std::uint64_t>(simulation_id), 1));
    double clock = 0.0;
    for (std::int64_t i = 0; i < n_jobs; ++i) {
        const auto& k = config.classes[rng.below(config.classes.size())];
        double gap = rng.exponential(k.mean_interarrival);
        double next = clock + gap;
        if (!(next > clock)) next = std::nextafter(clock, std::numeric_limits<double>::infinity());
        clock = next;

        JobSpec job;
        job.simulation_id = simulation_id;
        job.job_index = i;
        job.submission_time = clock;
        job.class_id = k.class_id;
        job.flops = sample_positive(rng, k.flops);
        const std::uint64_t input_size = sample_bytes(rng, k.input_files_size);
        job.output_files_size = sample_bytes(rng, k.output_files_size);
        job.input_files = {file_id(simulation_id, i)};
        w.dataset.files.push_back({job.input_files.front(), input_size, config.heterogeneous_storage});
        w.jobs.push_back(std::move(job));
    }
    return w;
}

std::vector<std::int64_t> default_training_job_counts() {
    return {1, 10, 20, 50, 100, 250, 500, 1000, 1500, 2000};
}

std::vector<SuiteEntry> scenario_suite(Scenario /*scenario*/, std::int64_t simulations_per_batch,
                                       std::vector<std::int64_t> job_counts,
                                       std::int64_t extrapolation_simulations, std::int64_t extrapolation_jobs) {
    if (simulations_per_batch < 1) fail(ErrorCategory::argument, "simulations per batch must be >= 1");
    std::vector<SuiteEntry> suite;
    for (auto n : job_counts) {
        if (n < 1) fail(ErrorCategory::argument, "suite job counts must be >= 1");
        suite.push_back({n, simulations_per_batch, false});
    }
    if (extrapolation_simulations > 0) {
        if (extrapolation_jobs < 1) fail(ErrorCategory::argument, "extrapolation job count must be >= 1");
        suite.push_back({extrapolation_jobs, extrapolation_simulations, true});
    }
    return suite;
}

}  // namespace dcs
