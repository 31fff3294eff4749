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

#include "dcsurrogate/dcsurrogate.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>
#include <utility>

#include "core/pipeline.hpp"
#include "core/platform.hpp"
#include "core/surrogate.hpp"

struct dcs_manifest {
    dcs::ExperimentManifest value;
};

struct dcs_surrogate {
    dcs::Surrogate value;
};

namespace {

thread_local std::string last_error;

dcs_status set_error(dcs_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <typename F>
dcs_status guarded(F&& f) {
    try {
        f();
        return DCS_OK;
    } catch (const dcs::Error& e) {
        return set_error(static_cast<dcs_status>(e.category()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(DCS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(DCS_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(DCS_ERR_INTERNAL, "unknown error");
    }
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void need(const void* p, const char* what) {
    if (!p) dcs::fail(dcs::ErrorCategory::argument, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* dcs_version(void) { return "0.1.0"; }

const char* dcs_status_name(dcs_status status) {
    switch (status) {
        case DCS_OK: return "ok";
        case DCS_ERR_ARGUMENT: return "argument";
        case DCS_ERR_PARSE: return "parse";
        case DCS_ERR_VALIDATION: return "validation";
        case DCS_ERR_IO: return "io";
        case DCS_ERR_SIMULATION: return "simulation";
        case DCS_ERR_NUMERIC: return "numeric";
        case DCS_ERR_MISSING_ARTIFACT: return "missing_artifact";
        case DCS_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* dcs_last_error(void) { return last_error.c_str(); }

void dcs_string_free(char* s) { std::free(s); }

dcs_status dcs_manifest_new(dcs_manifest** out) {
    return guarded([&] {
        need(out, "out");
        *out = new dcs_manifest{};
    });
}

void dcs_manifest_free(dcs_manifest* manifest) { delete manifest; }

dcs_status dcs_manifest_apply_json(dcs_manifest* manifest, const char* json) {
    return guarded([&] {
        need(manifest, "manifest");
        need(json, "json");
        manifest->value = dcs::parse_manifest(json, manifest->value);
    });
}

dcs_status dcs_manifest_apply_file(dcs_manifest* manifest, const char* path) {
    return guarded([&] {
        need(manifest, "manifest");
        need(path, "path");
        manifest->value = dcs::load_manifest(path, manifest->value);
    });
}

dcs_status dcs_manifest_validate(const dcs_manifest* manifest) {
    return guarded([&] {
        need(manifest, "manifest");
        manifest->value.validate();
    });
}

dcs_status dcs_manifest_to_json(const dcs_manifest* manifest, char** out) {
    return guarded([&] {
        need(manifest, "manifest");
        need(out, "out");
        *out = copy_string(dcs::serialize_manifest(manifest->value));
    });
}

dcs_status dcs_manifest_hash(const dcs_manifest* manifest, uint64_t* out) {
    return guarded([&] {
        need(manifest, "manifest");
        need(out, "out");
        *out = dcs::manifest_hash(manifest->value);
    });
}

dcs_status dcs_command_from_name(const char* name, dcs_command* out) {
    return guarded([&] {
        need(name, "name");
        need(out, "out");
        static const std::map<std::string, dcs_command> names = {
            {"simulate", DCS_CMD_SIMULATE}, {"preprocess", DCS_CMD_PREPROCESS}, {"tune", DCS_CMD_TUNE},
            {"train", DCS_CMD_TRAIN},       {"evaluate", DCS_CMD_EVALUATE},     {"bench", DCS_CMD_BENCH}};
        const auto it = names.find(name);
        if (it == names.end()) dcs::fail(dcs::ErrorCategory::argument, std::string("unknown command '") + name + "'");
        *out = it->second;
    });
}

dcs_status dcs_run(dcs_command command, const dcs_manifest* manifest, char** summary) {
    return guarded([&] {
        need(manifest, "manifest");
        const auto& m = manifest->value;
        std::string text;
        switch (command) {
            case DCS_CMD_SIMULATE: text = dcs::cmd_simulate(m); break;
            case DCS_CMD_PREPROCESS: text = dcs::cmd_preprocess(m); break;
            case DCS_CMD_TUNE: text = dcs::cmd_tune(m); break;
            case DCS_CMD_TRAIN: text = dcs::cmd_train(m); break;
            case DCS_CMD_EVALUATE: text = dcs::cmd_evaluate(m); break;
            case DCS_CMD_BENCH: text = dcs::cmd_bench(m); break;
            default: dcs::fail(dcs::ErrorCategory::argument, "unknown command " + std::to_string(command));
        }
        if (summary) *summary = copy_string(text);
    });
}

dcs_status dcs_platform_json(const char* scenario, char** out) {
    return guarded([&] {
        need(scenario, "scenario");
        need(out, "out");
        *out = copy_string(dcs::serialize_platform(dcs::builtin_platform(dcs::scenario_from_string(scenario))));
    });
}

dcs_status dcs_surrogate_load(const char* path, dcs_surrogate** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new dcs_surrogate{dcs::load_surrogate(path)};
    });
}

void dcs_surrogate_free(dcs_surrogate* surrogate) { delete surrogate; }

dcs_status dcs_surrogate_dims(const dcs_surrogate* surrogate, size_t* n_features, size_t* n_targets) {
    return guarded([&] {
        need(surrogate, "surrogate");
        if (n_features) *n_features = surrogate->value.feature_names().size();
        if (n_targets) *n_targets = surrogate->value.target_names().size();
    });
}

dcs_status dcs_surrogate_predict(dcs_surrogate* surrogate, size_t n_rows, const int64_t* simulation_ids,
                                 const double* features, double* out) {
    return guarded([&] {
        need(surrogate, "surrogate");
        if (n_rows == 0) return;
        need(features, "features");
        need(out, "out");
        const std::size_t nf = surrogate->value.feature_names().size();
        const std::size_t nt = surrogate->value.target_names().size();
        std::vector<dcs::SampleRow> rows(n_rows);
        std::map<std::int64_t, std::int64_t> next_index;
        std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> position;
        for (std::size_t i = 0; i < n_rows; ++i) {
            const std::int64_t sim = simulation_ids ? simulation_ids[i] : 0;
            rows[i].simulation_id = sim;
            rows[i].job_index = next_index[sim]++;
            rows[i].features.assign(features + i * nf, features + (i + 1) * nf);
            position[{sim, rows[i].job_index}] = i;
        }
        for (const auto& p : dcs::predict(surrogate->value, rows)) {
            const std::size_t i = position.at({p.simulation_id, p.job_index});
            std::copy(p.values.begin(), p.values.end(), out + i * nt);
        }
    });
}

}  // extern "C"
