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

// dcsurrogate: command-line driver for the simulate -> preprocess -> tune ->
// train -> evaluate -> bench pipeline. Precedence: defaults < --manifest < flags.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "dcsurrogate/dcsurrogate.h"

namespace {

using json = nlohmann::json;

struct Flags {
    std::string manifest;
    std::optional<std::string> scenario;
    std::optional<std::int64_t> sims_per_batch;
    std::optional<std::vector<std::int64_t>> job_counts;
    std::optional<std::int64_t> extrapolation_sims;
    std::optional<std::int64_t> extrapolation_jobs;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::string>> targets;
    std::optional<std::string> arch;
    std::optional<int> hidden_size, num_layers, window_size, window_overlap, batch_size, num_heads;
    std::optional<double> learning_rate;
    std::optional<int> epochs, patience, tune_epochs;
    bool use_tuned = false;
    std::optional<std::string> platform_file, job_classes_file;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<int> bench_repeats, kde_grid_points;
};

void add_manifest_flags(CLI::App& app, Flags& f) {
    app.add_option("--manifest", f.manifest, "Experiment manifest (JSON)")->check(CLI::ExistingFile);
    app.add_option("--scenario", f.scenario, "homogeneous or heterogeneous");
    app.add_option("--sims-per-batch", f.sims_per_batch, "Simulations per job count");
    app.add_option("--job-counts", f.job_counts, "Training job counts")->delimiter(',');
    app.add_option("--extrapolation-sims", f.extrapolation_sims, "Extrapolation simulations (0 disables)");
    app.add_option("--extrapolation-jobs", f.extrapolation_jobs, "Jobs per extrapolation simulation");
    app.add_option("--seed", f.seed, "Master seed");
    app.add_option("--targets", f.targets, "Target observables")->delimiter(',');
    app.add_option("--arch", f.arch, "bigru, bilstm or transformer");
    app.add_option("--hidden-size", f.hidden_size);
    app.add_option("--num-layers", f.num_layers);
    app.add_option("--window-size", f.window_size);
    app.add_option("--window-overlap", f.window_overlap);
    app.add_option("--batch-size", f.batch_size);
    app.add_option("--num-heads", f.num_heads, "Attention heads (transformer)");
    app.add_option("--learning-rate", f.learning_rate);
    app.add_option("--epochs", f.epochs, "Maximum training epochs");
    app.add_option("--patience", f.patience, "Early-stopping patience in epochs");
    app.add_option("--tune-epochs", f.tune_epochs, "Epoch budget per tuning trial");
    app.add_flag("--use-tuned", f.use_tuned, "Train with tune/best_config.json");
    app.add_option("--platform-file", f.platform_file, "Platform JSON instead of the builtin");
    app.add_option("--job-classes-file", f.job_classes_file, "Job class JSON instead of the builtin");
    app.add_option("--out", f.out, "Output root directory");
    app.add_option("--jobs", f.jobs, "Worker threads");
    app.add_option("--bench-repeats", f.bench_repeats, "Timing repeats (median is reported)");
    app.add_option("--kde-grid-points", f.kde_grid_points, "KDE evaluation grid size");
}

json overlay(const Flags& f) {
    json j = json::object();
    auto put = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
    };
    put("scenario", f.scenario);
    put("simulations_per_batch", f.sims_per_batch);
    put("job_counts", f.job_counts);
    put("extrapolation_simulations", f.extrapolation_sims);
    put("extrapolation_jobs", f.extrapolation_jobs);
    put("seed", f.seed);
    put("targets", f.targets);
    put("tune_epochs", f.tune_epochs);
    put("platform_file", f.platform_file);
    put("job_classes_file", f.job_classes_file);
    put("out", f.out);
    put("jobs", f.jobs);
    put("bench_repeats", f.bench_repeats);
    put("kde_grid_points", f.kde_grid_points);
    if (f.use_tuned) j["use_tuned_config"] = true;

    json model = json::object();
    auto put_model = [&](const char* key, const auto& v) {
        if (v) model[key] = *v;
    };
    put_model("architecture", f.arch);
    put_model("hidden_size", f.hidden_size);
    put_model("num_layers", f.num_layers);
    put_model("window_size", f.window_size);
    put_model("window_overlap", f.window_overlap);
    put_model("batch_size", f.batch_size);
    put_model("num_heads", f.num_heads);
    if (!model.empty()) j["model"] = model;

    json training = json::object();
    if (f.learning_rate) training["learning_rate"] = *f.learning_rate;
    if (f.epochs) training["max_epochs"] = *f.epochs;
    if (f.patience) training["patience"] = *f.patience;
    if (!training.empty()) j["training"] = training;
    return j;
}

int report_failure(dcs_status status) {
    std::fprintf(stderr, "dcsurrogate: %s error: %s\n", dcs_status_name(status), dcs_last_error());
    return static_cast<int>(status);
}

class Manifest {
public:
    Manifest() { status_ = dcs_manifest_new(&m_); }
    ~Manifest() { dcs_manifest_free(m_); }
    Manifest(const Manifest&) = delete;
    Manifest& operator=(const Manifest&) = delete;

    dcs_status build(const Flags& f) {
        if (status_ != DCS_OK) return status_;
        if (!f.manifest.empty()) {
            if (auto s = dcs_manifest_apply_file(m_, f.manifest.c_str()); s != DCS_OK) return s;
        }
        return dcs_manifest_apply_json(m_, overlay(f).dump().c_str());
    }
    dcs_manifest* get() const { return m_; }

private:
    dcs_manifest* m_ = nullptr;
    dcs_status status_ = DCS_OK;
};

int run_commands(const Flags& f, const std::vector<dcs_command>& commands) {
    Manifest manifest;
    if (auto s = manifest.build(f); s != DCS_OK) return report_failure(s);
    for (dcs_command c : commands) {
        char* summary = nullptr;
        if (auto s = dcs_run(c, manifest.get(), &summary); s != DCS_OK) return report_failure(s);
        std::printf("%s\n", summary);
        dcs_string_free(summary);
    }
    return 0;
}

int print_manifest(const Flags& f) {
    Manifest manifest;
    if (auto s = manifest.build(f); s != DCS_OK) return report_failure(s);
    char* text = nullptr;
    std::uint64_t hash = 0;
    if (auto s = dcs_manifest_validate(manifest.get()); s != DCS_OK) return report_failure(s);
    if (auto s = dcs_manifest_to_json(manifest.get(), &text); s != DCS_OK) return report_failure(s);
    dcs_manifest_hash(manifest.get(), &hash);
    std::printf("%s", text);
    std::fprintf(stderr, "manifest hash %016llx\n", static_cast<unsigned long long>(hash));
    dcs_string_free(text);
    return 0;
}

int print_platform(const std::string& scenario) {
    char* text = nullptr;
    if (auto s = dcs_platform_json(scenario.c_str(), &text); s != DCS_OK) return report_failure(s);
    std::printf("%s", text);
    dcs_string_free(text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate models for distributed-computing simulations"};
    app.set_version_flag("--version", std::string(dcs_version()));
    app.require_subcommand(1);

    Flags flags;
    int exit_code = 0;
    const std::vector<std::pair<std::string, std::string>> stages = {
        {"simulate", "Run the simulation suite and write per-simulation CSVs"},
        {"preprocess", "Join traces, split 70:30 and fit the standardizer"},
        {"tune", "Coordinate-wise hyperparameter search"},
        {"train", "Train a surrogate and write its checkpoint"},
        {"evaluate", "R2 and KDE report on the eval split and extrapolation runs"},
        {"bench", "Simulator and surrogate timings with speedup ratios"}};
    for (const auto& [name, help] : stages) {
        auto* sub = app.add_subcommand(name, help);
        add_manifest_flags(*sub, flags);
        sub->callback([&flags, &exit_code, name = name] {
            dcs_command c;
            if (dcs_command_from_name(name.c_str(), &c) != DCS_OK) {
                exit_code = DCS_ERR_INTERNAL;
                return;
            }
            exit_code = run_commands(flags, {c});
        });
    }

    auto* all = app.add_subcommand("run", "simulate, preprocess, train, evaluate and bench in sequence");
    bool with_tune = false;
    add_manifest_flags(*all, flags);
    all->add_flag("--tune", with_tune, "Tune first and train with the tuned config");
    all->callback([&] {
        if (with_tune) {
            flags.use_tuned = true;
            exit_code = run_commands(flags, {DCS_CMD_SIMULATE, DCS_CMD_PREPROCESS, DCS_CMD_TUNE, DCS_CMD_TRAIN,
                                             DCS_CMD_EVALUATE, DCS_CMD_BENCH});
        } else {
            exit_code = run_commands(
                flags, {DCS_CMD_SIMULATE, DCS_CMD_PREPROCESS, DCS_CMD_TRAIN, DCS_CMD_EVALUATE, DCS_CMD_BENCH});
        }
    });

    auto* manifest = app.add_subcommand("manifest", "Print the effective manifest");
    add_manifest_flags(*manifest, flags);
    manifest->callback([&] { exit_code = print_manifest(flags); });

    std::string platform_scenario = "heterogeneous";
    auto* platform = app.add_subcommand("platform", "Print a builtin platform as JSON");
    platform->add_option("--scenario", platform_scenario, "homogeneous or heterogeneous");
    platform->callback([&] { exit_code = print_platform(platform_scenario); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return DCS_ERR_ARGUMENT;
    }
    return exit_code;
}
