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

#include <filesystem>
#include <map>
#include <json.hpp>

#include "core/pipeline.hpp"
#include "core/surrogate.hpp"
#include "core/trace_io.hpp"
#include "support/temp_dir.hpp"

namespace dcs {
namespace {

namespace fs = std::filesystem;
using dcs::testing::TempDir;
using json = nlohmann::json;

ExperimentManifest tiny(const TempDir& dir) {
    ExperimentManifest m;
    m.simulations_per_batch = 2;
    m.job_counts = {20};
    m.extrapolation_simulations = 1;
    m.extrapolation_jobs = 60;
    m.train.max_epochs = 5;
    m.seed = 3;
    m.out = dir.file("runs");
    return m;
}

ErrorCategory category_of(const std::function<void()>& f, std::string* message = nullptr) {
    try {
        f();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.category();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCategory::internal;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text_file(e.path().string());
    return files;
}

TEST(Manifest, DefaultsUseDeskScale) {
    const ExperimentManifest m;
    EXPECT_EQ(m.simulations_per_batch, 20);
    EXPECT_EQ(m.job_counts, default_training_job_counts());
    EXPECT_EQ(m.train.model.architecture, nn::Architecture::bigru);
    EXPECT_NO_THROW(m.validate());
}

TEST(Manifest, OverlayKeepsUnsetFields) {
    ExperimentManifest base;
    base.seed = 9;
    base.train.model.hidden_size = 8;
    const auto m = parse_manifest(R"({"scenario": "homogeneous", "model": {"window_size": 10}})", base);
    EXPECT_EQ(m.scenario, Scenario::homogeneous);
    EXPECT_EQ(m.train.model.window_size, 10);
    EXPECT_EQ(m.train.model.hidden_size, 8);
    EXPECT_EQ(m.seed, 9u);
}

TEST(Manifest, LaterOverlayWins) {
    auto m = parse_manifest(R"({"seed": 1, "simulations_per_batch": 4})");
    m = parse_manifest(R"({"seed": 2})", m);
    EXPECT_EQ(m.seed, 2u);
    EXPECT_EQ(m.simulations_per_batch, 4);
}

TEST(Manifest, SerializationRoundTrips) {
    ExperimentManifest m;
    m.scenario = Scenario::homogeneous;
    m.job_counts = {3, 7};
    m.targets = {"compute_time"};
    m.train.model.architecture = nn::Architecture::transformer;
    m.train.model.num_heads = 4;
    m.train.learning_rate = 5e-4;
    m.search_space = SearchSpace::defaults(nn::Architecture::transformer);
    m.use_tuned_config = true;
    const auto back = parse_manifest(serialize_manifest(m));
    EXPECT_EQ(serialize_manifest(back), serialize_manifest(m));
    EXPECT_EQ(manifest_hash(back), manifest_hash(m));
}

TEST(Manifest, RejectsBadInput) {
    EXPECT_EQ(category_of([] { parse_manifest("{"); }), ErrorCategory::parse);
    std::string msg;
    EXPECT_EQ(category_of([] { parse_manifest(R"({"sims_per_batch": 3})"); }, &msg), ErrorCategory::validation);
    EXPECT_NE(msg.find("sims_per_batch"), std::string::npos);
    EXPECT_EQ(category_of([] { parse_manifest(R"({"model": {"hidden": 3}})"); }), ErrorCategory::validation);
    EXPECT_EQ(category_of([] { parse_manifest(R"({"seed": "x"})"); }), ErrorCategory::validation);
    EXPECT_EQ(category_of([] { parse_manifest(R"({"model": {"architecture": "cnn"}})"); }), ErrorCategory::argument);
}

TEST(Manifest, ValidateCatchesInconsistentValues) {
    ExperimentManifest m;
    m.targets = {"queue_length"};
    EXPECT_EQ(category_of([&] { m.validate(); }), ErrorCategory::validation);
    m = {};
    m.train.model.architecture = nn::Architecture::transformer;
    m.train.model.hidden_size = 10;
    m.train.model.num_heads = 4;
    EXPECT_EQ(category_of([&] { m.validate(); }), ErrorCategory::validation);
    m = {};
    m.train_fraction = 1.0;
    EXPECT_EQ(category_of([&] { m.validate(); }), ErrorCategory::validation);
}

TEST(Manifest, HashIgnoresOutputLocationAndThreads) {
    ExperimentManifest a, b;
    b.out = "elsewhere";
    b.jobs = 8;
    EXPECT_EQ(manifest_hash(a), manifest_hash(b));
    b.seed = 1;
    EXPECT_NE(manifest_hash(a), manifest_hash(b));
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Pipeline, HomogeneousSuiteEnumeration) {
    ExperimentManifest m;
    m.scenario = Scenario::homogeneous;
    m.simulations_per_batch = 5;
    const auto sims = enumerate_simulations(m);
    std::size_t extrapolation = 0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        EXPECT_EQ(sims[i].simulation_id, static_cast<std::int64_t>(i));
        extrapolation += sims[i].extrapolation;
        if (sims[i].extrapolation) EXPECT_EQ(sims[i].n_jobs, 10'000);
    }
    EXPECT_EQ(sims.size() - extrapolation, 10u * 5u);
    EXPECT_EQ(extrapolation, 10u);
}

TEST(Pipeline, SimulateWritesOneDirectoryPerSimulation) {
    TempDir dir;
    ExperimentManifest m = tiny(dir);
    m.scenario = Scenario::homogeneous;
    m.simulations_per_batch = 5;
    m.job_counts = {1, 10, 20, 50, 100, 250, 500, 1000, 1500, 2000};
    m.extrapolation_jobs = 200;
    m.extrapolation_simulations = 10;
    m.jobs = 2;
    cmd_simulate(m);
    const auto paths = run_paths(m);
    int dirs = 0;
    for (const auto& e : fs::directory_iterator(paths.root))
        if (e.is_directory() && e.path().filename().string().rfind("sim_", 0) == 0) {
            ++dirs;
            for (const char* f : {"workload.csv", "dataset.csv", "trace.csv"}) EXPECT_TRUE(fs::exists(e.path() / f));
        }
    EXPECT_EQ(dirs, 60);
    EXPECT_EQ(read_csv(paths.simulation_index()).rows.size(), 60u);
}

TEST(Pipeline, SimulateIsIdempotentAndIndependentOfThreads) {
    TempDir a, b;
    ExperimentManifest m = tiny(a);
    m.simulations_per_batch = 3;
    m.job_counts = {5, 30};
    cmd_simulate(m);
    const auto first = snapshot(run_paths(m).root);
    cmd_simulate(m);
    EXPECT_EQ(snapshot(run_paths(m).root), first);
    m.out = b.file("runs");
    m.jobs = 4;
    cmd_simulate(m);
    auto other = snapshot(run_paths(m).root);
    ASSERT_EQ(other.size(), first.size());
    for (const auto& [name, text] : first) {
        if (name == "simulate_run_info.json") continue;  // records `out` and `jobs`
        EXPECT_EQ(other.at(name), text) << name;
    }
}

TEST(Pipeline, UnwritableOutputIsAnIoError) {
    TempDir dir;
    ExperimentManifest m = tiny(dir);
    write_text_file(dir.file("blocker"), "x");
    m.out = dir.file("blocker");
    std::string msg;
    EXPECT_EQ(category_of([&] { cmd_simulate(m); }, &msg), ErrorCategory::io);
    EXPECT_NE(msg.find("--out"), std::string::npos);
}

TEST(Pipeline, MissingUpstreamNamesThePriorCommand) {
    TempDir dir;
    ExperimentManifest m = tiny(dir);
    std::string msg;
    EXPECT_EQ(category_of([&] { cmd_preprocess(m); }, &msg), ErrorCategory::missing_artifact);
    EXPECT_NE(msg.find("run simulate first"), std::string::npos);
    EXPECT_EQ(category_of([&] { cmd_train(m); }, &msg), ErrorCategory::missing_artifact);
    EXPECT_NE(msg.find("run preprocess first"), std::string::npos);
    EXPECT_EQ(category_of([&] { cmd_evaluate(m); }, &msg), ErrorCategory::missing_artifact);
    EXPECT_NE(msg.find("run train first"), std::string::npos);
    EXPECT_EQ(category_of([&] { cmd_bench(m); }, &msg), ErrorCategory::missing_artifact);
    EXPECT_NE(msg.find("run train first"), std::string::npos);

    cmd_simulate(m);
    cmd_preprocess(m);
    m.use_tuned_config = true;
    EXPECT_EQ(category_of([&] { cmd_train(m); }, &msg), ErrorCategory::missing_artifact);
    EXPECT_NE(msg.find("run tune first"), std::string::npos);
}

TEST(Pipeline, TinyManifestRunsEndToEnd) {
    TempDir dir;
    ExperimentManifest m = tiny(dir);
    SearchSpace space;
    space.hidden_size = {4, 8};
    space.window_size = {5};
    space.window_overlap = {0};
    space.num_layers = {1};
    space.batch_size = {4};
    space.num_heads = {2};
    m.search_space = space;
    m.tune_epochs = 2;
    m.bench_repeats = 1;
    m.use_tuned_config = true;
    for (auto* cmd : {&cmd_simulate, &cmd_preprocess, &cmd_tune, &cmd_train, &cmd_evaluate, &cmd_bench})
        EXPECT_FALSE((*cmd)(m).empty());

    const auto p = run_paths(m);
    for (const auto& f : {p.preprocess() + "/samples.csv", p.preprocess() + "/extrapolation_samples.csv",
                          p.preprocess() + "/split.json", p.preprocess() + "/scaler.json", p.tune() + "/audit.csv",
                          p.tune() + "/best_config.json", p.model() + "/checkpoint.json", p.model() + "/history.csv",
                          p.eval() + "/report.json", p.eval() + "/r2.csv", p.eval() + "/kde_compute_time.csv",
                          p.eval() + "/extrapolation/r2.csv", p.bench() + "/simulator.csv",
                          p.bench() + "/surrogate.csv", p.bench() + "/speedup.csv"})
        EXPECT_TRUE(fs::exists(f)) << f;

    const auto samples = read_samples_csv(p.preprocess() + "/samples.csv");
    EXPECT_EQ(samples.rows.size(), 40u);
    EXPECT_EQ(samples.target_names, all_target_names());
    EXPECT_EQ(read_csv(p.eval() + "/r2.csv").rows.size(), all_target_names().size());
    EXPECT_EQ(read_csv(p.bench() + "/speedup.csv").rows.size(), 2u);  // 20 jobs and the 60-job extrapolation size

    const auto history = read_csv(p.model() + "/history.csv");
    EXPECT_EQ(history.rows.size(), 5u);

    const std::string hash = hex64(manifest_hash(m));
    for (const auto& stage : {p.preprocess(), p.tune(), p.model(), p.eval(), p.bench()}) {
        const auto info = json::parse(read_text_file(stage + "/run_info.json"));
        EXPECT_EQ(info.at("manifest_hash").get<std::string>(), hash) << stage;
        EXPECT_EQ(info.at("seed").get<std::uint64_t>(), 3u);
        EXPECT_EQ(info.at("seeds").at("split").get<std::uint64_t>(), derive_seeds(3).split);
    }
    const auto report = json::parse(read_text_file(p.eval() + "/report.json"));
    EXPECT_EQ(report.dump().find(hash) != std::string::npos, true);

    const auto tuned = parse_model_config(read_text_file(p.tune() + "/best_config.json"));
    EXPECT_EQ(load_surrogate(p.model() + "/checkpoint.json").model->config(), tuned);
}

TEST(Pipeline, RerunningAStageReproducesItsOutputs) {
    TempDir dir;
    const ExperimentManifest m = tiny(dir);
    cmd_simulate(m);
    cmd_preprocess(m);
    cmd_train(m);
    const auto p = run_paths(m);
    const auto checkpoint = read_text_file(p.model() + "/checkpoint.json");
    const auto samples = read_text_file(p.preprocess() + "/samples.csv");
    cmd_preprocess(m);
    cmd_train(m);
    EXPECT_EQ(read_text_file(p.preprocess() + "/samples.csv"), samples);
    EXPECT_EQ(read_text_file(p.model() + "/checkpoint.json"), checkpoint);
}

TEST(Pipeline, TrainHonorsTransformerHeads) {
    TempDir dir;
    ExperimentManifest m = tiny(dir);
    m = parse_manifest(R"({"model": {"architecture": "transformer", "hidden_size": 8, "num_heads": 4}})", m);
    m.extrapolation_simulations = 0;
    cmd_simulate(m);
    cmd_preprocess(m);
    cmd_train(m);
    const auto s = load_surrogate(run_paths(m).model() + "/checkpoint.json");
    EXPECT_EQ(s.model->config().architecture, nn::Architecture::transformer);
    EXPECT_EQ(s.model->config().num_heads, 4);
    EXPECT_FALSE(fs::exists(run_paths(m).preprocess() + "/extrapolation_samples.csv"));
}

TEST(Pipeline, TargetsComeFromTheManifest) {
    TempDir dir;
    ExperimentManifest m = tiny(dir);
    m.targets = {"input_files_transfer_time", "compute_time"};
    cmd_simulate(m);
    cmd_preprocess(m);
    cmd_train(m);
    const auto s = load_surrogate(run_paths(m).model() + "/checkpoint.json");
    EXPECT_EQ(s.target_names(), m.targets);
    EXPECT_EQ(s.model->config().output_dim, 2);
}

}  // namespace
}  // namespace dcs
