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

#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "core/eval.hpp"
#include "core/rng.hpp"
#include "core/sim_engine.hpp"
#include "core/surrogate.hpp"

namespace dcs {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::set<std::string> kManifestKeys = {
    "scenario",      "simulations_per_batch", "job_counts", "extrapolation_simulations", "extrapolation_jobs",
    "seed",          "targets",               "train_fraction", "model",                 "training",
    "use_tuned_config", "search_space",       "tune_epochs", "platform_file",            "job_classes_file",
    "kde_grid_points",  "bench_repeats",      "out",        "jobs"};

const std::set<std::string> kModelKeys = {"architecture", "hidden_size", "num_layers", "window_size",
                                          "window_overlap", "batch_size", "num_heads"};
const std::set<std::string> kTrainingKeys = {"learning_rate", "beta1", "beta2", "epsilon", "max_epochs", "patience"};
const std::set<std::string> kSpaceKeys = {"hidden_size", "window_size", "window_overlap",
                                          "num_layers",  "batch_size",  "num_heads"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) fail(ErrorCategory::validation, "manifest: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail(ErrorCategory::validation, "manifest: unknown key '" + where + key + "'");
}

template <typename T>
void take(const json& obj, const char* key, T& field, const std::string& where = "") {
    if (!obj.contains(key)) return;
    try {
        field = obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCategory::validation, "manifest: '" + where + key + "' has the wrong type (" + obj.at(key).dump() + ")");
    }
}

json model_json(const nn::ModelConfig& c) {
    return {{"architecture", nn::to_string(c.architecture)},
            {"hidden_size", c.hidden_size},
            {"num_layers", c.num_layers},
            {"window_size", c.window_size},
            {"window_overlap", c.window_overlap},
            {"batch_size", c.batch_size},
            {"num_heads", c.num_heads}};
}

json space_json(const SearchSpace& s) {
    return {{"hidden_size", s.hidden_size}, {"window_size", s.window_size}, {"window_overlap", s.window_overlap},
            {"num_layers", s.num_layers},   {"batch_size", s.batch_size},   {"num_heads", s.num_heads}};
}

json manifest_json(const ExperimentManifest& m) {
    json j{{"scenario", to_string(m.scenario)},
           {"simulations_per_batch", m.simulations_per_batch},
           {"job_counts", m.job_counts},
           {"extrapolation_simulations", m.extrapolation_simulations},
           {"extrapolation_jobs", m.extrapolation_jobs},
           {"seed", m.seed},
           {"targets", m.targets},
           {"train_fraction", m.train_fraction},
           {"model", model_json(m.train.model)},
           {"training",
            {{"learning_rate", m.train.learning_rate},
             {"beta1", m.train.beta1},
             {"beta2", m.train.beta2},
             {"epsilon", m.train.epsilon},
             {"max_epochs", m.train.max_epochs},
             {"patience", m.train.patience}}},
           {"use_tuned_config", m.use_tuned_config},
           {"search_space", m.search_space ? space_json(*m.search_space) : json(nullptr)},
           {"tune_epochs", m.tune_epochs},
           {"platform_file", m.platform_file},
           {"job_classes_file", m.job_classes_file},
           {"kde_grid_points", m.kde_grid_points},
           {"bench_repeats", m.bench_repeats},
           {"out", m.out},
           {"jobs", m.jobs}};
    return j;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        fail(ErrorCategory::io, "cannot create output directory '" + dir + "': " +
                                    (ec ? ec.message() : std::string("not a directory")) +
                                    " (choose a writable location with --out)");
}

void require(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        fail(ErrorCategory::missing_artifact, "missing '" + path + "'; run " + producer + " first");
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_run_info(const ExperimentManifest& m, const std::string& path, const std::string& command,
                    json extra = json::object()) {
    const auto seeds = derive_seeds(m.seed);
    json info{{"command", command},
              {"manifest_hash", hex64(manifest_hash(m))},
              {"seed", m.seed},
              {"seeds",
               {{"workload", seeds.workload},
                {"split", seeds.split},
                {"init", seeds.init},
                {"shuffle", seeds.shuffle},
                {"tune", seeds.tune}}},
              {"manifest", manifest_json(m)}};
    for (auto& [k, v] : extra.items()) info[k] = v;
    write_text_file(path, info.dump(2) + "\n");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<SimulationEntry> read_simulation_index(const RunPaths& paths) {
    require(paths.simulation_index(), "simulate");
    const CsvTable t = read_csv(paths.simulation_index());
    const auto id = t.column("simulation_id"), n = t.column("n_jobs"), ex = t.column("extrapolation");
    std::vector<SimulationEntry> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string where = paths.simulation_index() + ":" + std::to_string(r + 2);
        out.push_back({parse_int(t.rows[r][id], where), parse_int(t.rows[r][n], where),
                       parse_int(t.rows[r][ex], where) != 0});
    }
    return out;
}

struct Prepared {
    SampleTable table;
    SplitSpec split;
    TableScaler scaler;
    std::vector<SampleRow> train_rows;
    std::vector<SampleRow> eval_rows;
};

Prepared load_prepared(const RunPaths& paths) {
    const std::string dir = paths.preprocess();
    for (const char* name : {"samples.csv", "split.json", "scaler.json"}) require(join_path(dir, name), "preprocess");
    Prepared p;
    p.table = read_samples_csv(join_path(dir, "samples.csv"));
    p.split = parse_split(read_text_file(join_path(dir, "split.json")));
    p.scaler = parse_scaler(read_text_file(join_path(dir, "scaler.json")));
    if (p.scaler.features.names != p.table.feature_names || p.scaler.targets.names != p.table.target_names)
        fail(ErrorCategory::validation, "preprocess outputs disagree on column names; rerun preprocess");
    for (const auto& row : p.table.rows) (p.split.is_train(row.simulation_id) ? p.train_rows : p.eval_rows).push_back(row);
    if (p.train_rows.empty()) fail(ErrorCategory::validation, "training split is empty");
    return p;
}

nn::ModelConfig base_model(const ExperimentManifest& m, const Prepared& p) {
    nn::ModelConfig c = m.train.model;
    c.input_dim = static_cast<int>(p.table.feature_names.size());
    c.output_dim = static_cast<int>(p.table.target_names.size());
    c.seed = derive_seeds(m.seed).init;
    return c;
}

TrainConfig train_config(const ExperimentManifest& m, const nn::ModelConfig& model) {
    TrainConfig t = m.train;
    t.model = model;
    t.seed = derive_seeds(m.seed).shuffle;
    return t;
}

Surrogate load_checkpoint(const RunPaths& paths) {
    const std::string path = join_path(paths.model(), "checkpoint.json");
    require(path, "train");
    return load_surrogate(path);
}

// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the error of the lowest failing index.
template <typename F>
void parallel_for(std::size_t n, int workers, F f) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::map<std::size_t, std::exception_ptr> errors;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    errors.emplace(i, std::current_exception());
                }
            }
        });
    for (auto& t : pool) t.join();
    if (!errors.empty()) std::rethrow_exception(errors.begin()->second);
}

double median_seconds(int repeats, const std::function<void()>& f) {
    std::vector<double> samples;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

}  // namespace

void ExperimentManifest::validate() const {
    auto check = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorCategory::validation, "manifest: " + what);
    };
    check(simulations_per_batch >= 1, "simulations_per_batch must be >= 1");
    check(!job_counts.empty(), "job_counts must be nonempty");
    for (auto n : job_counts) check(n >= 1, "job_counts entries must be >= 1");
    check(extrapolation_simulations >= 0, "extrapolation_simulations must be >= 0");
    check(extrapolation_simulations == 0 || extrapolation_jobs >= 1, "extrapolation_jobs must be >= 1");
    check(!targets.empty(), "targets must be nonempty");
    const auto known = all_target_names();
    for (const auto& t : targets)
        check(std::find(known.begin(), known.end(), t) != known.end(), "unknown target '" + t + "'");
    check(std::set<std::string>(targets.begin(), targets.end()).size() == targets.size(), "duplicate targets");
    check(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
    check(tune_epochs >= 0, "tune_epochs must be >= 0");
    check(kde_grid_points >= 2, "kde_grid_points must be >= 2");
    check(bench_repeats >= 1, "bench_repeats must be >= 1");
    check(!out.empty(), "out must be nonempty");
    check(jobs >= 1, "jobs must be >= 1");
    TrainConfig probe = train;
    probe.model.input_dim = probe.model.output_dim = 1;
    try {
        probe.validate();
        if (search_space) search_space->validate(train.model.architecture);
    } catch (const Error& e) {
        fail(ErrorCategory::validation, std::string("manifest: ") + e.what());
    }
}

ExperimentManifest parse_manifest(const std::string& text, ExperimentManifest m) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::parse, std::string("manifest: ") + e.what());
    }
    reject_unknown(doc, kManifestKeys, "");
    if (doc.contains("scenario")) {
        std::string s;
        take(doc, "scenario", s);
        m.scenario = scenario_from_string(s);
    }
    take(doc, "simulations_per_batch", m.simulations_per_batch);
    take(doc, "job_counts", m.job_counts);
    take(doc, "extrapolation_simulations", m.extrapolation_simulations);
    take(doc, "extrapolation_jobs", m.extrapolation_jobs);
    take(doc, "seed", m.seed);
    take(doc, "targets", m.targets);
    take(doc, "train_fraction", m.train_fraction);
    if (doc.contains("model")) {
        const json& j = doc.at("model");
        reject_unknown(j, kModelKeys, "model.");
        auto& c = m.train.model;
        if (j.contains("architecture")) {
            std::string a;
            take(j, "architecture", a, "model.");
            c.architecture = nn::architecture_from_string(a);
        }
        take(j, "hidden_size", c.hidden_size, "model.");
        take(j, "num_layers", c.num_layers, "model.");
        take(j, "window_size", c.window_size, "model.");
        take(j, "window_overlap", c.window_overlap, "model.");
        take(j, "batch_size", c.batch_size, "model.");
        take(j, "num_heads", c.num_heads, "model.");
    }
    if (doc.contains("training")) {
        const json& j = doc.at("training");
        reject_unknown(j, kTrainingKeys, "training.");
        take(j, "learning_rate", m.train.learning_rate, "training.");
        take(j, "beta1", m.train.beta1, "training.");
        take(j, "beta2", m.train.beta2, "training.");
        take(j, "epsilon", m.train.epsilon, "training.");
        take(j, "max_epochs", m.train.max_epochs, "training.");
        take(j, "patience", m.train.patience, "training.");
    }
    take(doc, "use_tuned_config", m.use_tuned_config);
    if (doc.contains("search_space")) {
        const json& j = doc.at("search_space");
        if (j.is_null()) {
            m.search_space.reset();
        } else {
            reject_unknown(j, kSpaceKeys, "search_space.");
            SearchSpace s = m.search_space.value_or(SearchSpace::defaults(m.train.model.architecture));
            take(j, "hidden_size", s.hidden_size, "search_space.");
            take(j, "window_size", s.window_size, "search_space.");
            take(j, "window_overlap", s.window_overlap, "search_space.");
            take(j, "num_layers", s.num_layers, "search_space.");
            take(j, "batch_size", s.batch_size, "search_space.");
            take(j, "num_heads", s.num_heads, "search_space.");
            m.search_space = s;
        }
    }
    take(doc, "tune_epochs", m.tune_epochs);
    take(doc, "platform_file", m.platform_file);
    take(doc, "job_classes_file", m.job_classes_file);
    take(doc, "kde_grid_points", m.kde_grid_points);
    take(doc, "bench_repeats", m.bench_repeats);
    take(doc, "out", m.out);
    take(doc, "jobs", m.jobs);
    return m;
}

ExperimentManifest load_manifest(const std::string& path, ExperimentManifest base) {
    if (!fs::exists(path)) fail(ErrorCategory::io, "manifest '" + path + "' does not exist");
    return parse_manifest(read_text_file(path), std::move(base));
}

std::string serialize_manifest(const ExperimentManifest& manifest) { return manifest_json(manifest).dump(2) + "\n"; }

std::uint64_t manifest_hash(const ExperimentManifest& manifest) {
    json j = manifest_json(manifest);
    j.erase("out");
    j.erase("jobs");
    return fnv1a64(j.dump());
}

std::string hex64(std::uint64_t value) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

DerivedSeeds derive_seeds(std::uint64_t seed) {
    return {seed, mix_seed(seed, 0x73706c6974ULL), mix_seed(seed, 0x696e6974ULL), mix_seed(seed, 0x73687566ULL),
            mix_seed(seed, 0x74756e65ULL)};
}

std::string RunPaths::simulation(std::int64_t id) const { return join_path(root, "sim_" + std::to_string(id)); }
std::string RunPaths::simulation_index() const { return join_path(root, "simulations.csv"); }
std::string RunPaths::preprocess() const { return join_path(root, "preprocess"); }
std::string RunPaths::tune() const { return join_path(root, "tune"); }
std::string RunPaths::model() const { return join_path(root, "model"); }
std::string RunPaths::eval() const { return join_path(root, "eval"); }
std::string RunPaths::bench() const { return join_path(root, "bench"); }

RunPaths run_paths(const ExperimentManifest& manifest) {
    return {join_path(manifest.out, to_string(manifest.scenario))};
}

std::vector<SimulationEntry> enumerate_simulations(const ExperimentManifest& m) {
    std::vector<SimulationEntry> out;
    std::int64_t id = 0;
    for (const auto& e : scenario_suite(m.scenario, m.simulations_per_batch, m.job_counts,
                                        m.extrapolation_simulations, m.extrapolation_jobs))
        for (std::int64_t s = 0; s < e.n_simulations; ++s) out.push_back({id++, e.n_jobs, e.extrapolation});
    return out;
}

PlatformSpec manifest_platform(const ExperimentManifest& m) {
    return m.platform_file.empty() ? builtin_platform(m.scenario) : load_platform_file(m.platform_file);
}

WorkloadConfig manifest_workload_config(const ExperimentManifest& m) {
    return m.job_classes_file.empty() ? WorkloadConfig::defaults() : load_workload_config_file(m.job_classes_file);
}

std::string cmd_simulate(const ExperimentManifest& m) {
    m.validate();
    const RunPaths paths = run_paths(m);
    const PlatformSpec platform = manifest_platform(m);
    const WorkloadConfig config = manifest_workload_config(m);
    const auto entries = enumerate_simulations(m);
    const std::uint64_t seed = derive_seeds(m.seed).workload;
    ensure_dir(paths.root);

    std::atomic<std::int64_t> jobs_total{0};
    parallel_for(entries.size(), m.jobs, [&](std::size_t i) {
        const auto& e = entries[i];
        const Workload w = generate_workload(m.scenario, e.n_jobs, e.simulation_id, seed, config);
        const auto trace = run_simulation(platform, w.jobs, w.dataset);
        const std::string dir = paths.simulation(e.simulation_id);
        ensure_dir(dir);
        write_text_file(join_path(dir, "workload.csv"), workload_csv(workload_rows(w)));
        write_text_file(join_path(dir, "dataset.csv"), dataset_csv(w.dataset));
        write_text_file(join_path(dir, "trace.csv"), trace_csv(trace));
        jobs_total += e.n_jobs;
    });

    std::string index = "simulation_id,n_jobs,extrapolation\n";
    std::size_t extrapolation = 0;
    for (const auto& e : entries) {
        index += std::to_string(e.simulation_id) + "," + std::to_string(e.n_jobs) + "," +
                 (e.extrapolation ? "1" : "0") + "\n";
        extrapolation += e.extrapolation;
    }
    write_text_file(paths.simulation_index(), index);
    write_run_info(m, join_path(paths.root, "simulate_run_info.json"), "simulate",
                   {{"simulations", entries.size()}, {"extrapolation_simulations", extrapolation}});
    return "simulate: " + std::to_string(entries.size()) + " simulations (" +
           std::to_string(entries.size() - extrapolation) + " training, " + std::to_string(extrapolation) +
           " extrapolation), " + std::to_string(jobs_total.load()) + " jobs -> " + paths.root;
}

std::string cmd_preprocess(const ExperimentManifest& m) {
    m.validate();
    const RunPaths paths = run_paths(m);
    const auto entries = read_simulation_index(paths);

    std::vector<SampleTable> tables(entries.size());
    parallel_for(entries.size(), m.jobs, [&](std::size_t i) {
        const std::string dir = paths.simulation(entries[i].simulation_id);
        require(join_path(dir, "workload.csv"), "simulate");
        require(join_path(dir, "trace.csv"), "simulate");
        tables[i] = select_targets(join_traces(m.scenario, read_workload_csv(join_path(dir, "workload.csv")),
                                               read_trace_csv(join_path(dir, "trace.csv"))),
                                   m.targets);
    });

    SampleTable training, extrapolation;
    training.feature_names = extrapolation.feature_names = feature_names(m.scenario);
    training.target_names = extrapolation.target_names = m.targets;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& dst = entries[i].extrapolation ? extrapolation : training;
        dst.rows.insert(dst.rows.end(), tables[i].rows.begin(), tables[i].rows.end());
    }
    if (training.rows.empty()) fail(ErrorCategory::validation, "no training simulations found in " + paths.root);

    const SplitSpec split = split_train_eval(group_by_length(training.rows), m.train_fraction, derive_seeds(m.seed).split);
    std::vector<SampleRow> train_rows;
    for (const auto& r : training.rows)
        if (split.is_train(r.simulation_id)) train_rows.push_back(r);
    const TableScaler scaler = fit_table_scaler(training, train_rows);

    const std::string dir = paths.preprocess();
    ensure_dir(dir);
    write_text_file(join_path(dir, "samples.csv"), samples_csv(training));
    const std::string extra_path = join_path(dir, "extrapolation_samples.csv");
    if (!extrapolation.rows.empty())
        write_text_file(extra_path, samples_csv(extrapolation));
    else
        fs::remove(extra_path);
    write_text_file(join_path(dir, "split.json"), serialize_split(split));
    write_text_file(join_path(dir, "scaler.json"), serialize_scaler(scaler));

    std::size_t train_sims = 0, eval_sims = 0;
    for (const auto& [len, ids] : split.train) train_sims += ids.size();
    for (const auto& [len, ids] : split.eval) eval_sims += ids.size();
    write_run_info(m, join_path(dir, "run_info.json"), "preprocess",
                   {{"rows", training.rows.size()},
                    {"train_rows", train_rows.size()},
                    {"train_simulations", train_sims},
                    {"eval_simulations", eval_sims},
                    {"extrapolation_rows", extrapolation.rows.size()}});
    return "preprocess: " + std::to_string(training.rows.size()) + " rows, " + std::to_string(train_sims) +
           " train / " + std::to_string(eval_sims) + " eval simulations, " +
           std::to_string(extrapolation.rows.size()) + " extrapolation rows -> " + dir;
}

std::string cmd_tune(const ExperimentManifest& m) {
    m.validate();
    const RunPaths paths = run_paths(m);
    const Prepared p = load_prepared(paths);
    const nn::ModelConfig base = base_model(m, p);
    const SearchSpace space = m.search_space.value_or(SearchSpace::defaults(base.architecture));
    const auto train_scaled = scale_rows(p.scaler, p.train_rows);
    const auto eval_scaled = scale_rows(p.scaler, p.eval_rows);

    const TuneResult result =
        tune_hyperparameters(space, base, derive_seeds(m.seed).tune, [&](const nn::ModelConfig& config) {
            TrainConfig tc = train_config(m, config);
            if (m.tune_epochs > 0) tc.max_epochs = m.tune_epochs;
            nn::SurrogateModel model(config);
            return train_model(model, tc, windows_for(train_scaled, config, true), windows_for(eval_scaled, config, false))
                .best_eval_loss;
        });

    const std::string dir = paths.tune();
    ensure_dir(dir);
    write_text_file(join_path(dir, "audit.csv"), audit_csv(result.audit));
    write_text_file(join_path(dir, "best_config.json"), serialize_model_config(result.best));
    write_run_info(m, join_path(dir, "run_info.json"), "tune",
                   {{"trials", result.audit.size()},
                    {"best_eval_loss", result.best_eval_loss},
                    {"search_space", space_json(space)}});
    const auto& b = result.best;
    return "tune: " + std::to_string(result.audit.size()) + " trials, best eval loss " + fmt(result.best_eval_loss) +
           " (hidden " + std::to_string(b.hidden_size) + ", window " + std::to_string(b.window_size) + ", overlap " +
           std::to_string(b.window_overlap) + ", layers " + std::to_string(b.num_layers) + ", batch " +
           std::to_string(b.batch_size) + ") -> " + dir;
}

std::string cmd_train(const ExperimentManifest& m) {
    m.validate();
    const RunPaths paths = run_paths(m);
    const Prepared p = load_prepared(paths);
    nn::ModelConfig config = base_model(m, p);
    if (m.use_tuned_config) {
        const std::string path = join_path(paths.tune(), "best_config.json");
        require(path, "tune");
        config = parse_model_config(read_text_file(path));
        if (config.input_dim != static_cast<int>(p.table.feature_names.size()) ||
            config.output_dim != static_cast<int>(p.table.target_names.size()))
            fail(ErrorCategory::validation, "tuned config does not match the preprocessed columns; rerun tune");
    }
    const TrainConfig tc = train_config(m, config);

    Surrogate surrogate;
    surrogate.scenario = m.scenario;
    surrogate.scaler = p.scaler;
    surrogate.model = std::make_unique<nn::SurrogateModel>(config);
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult result =
        train_model(*surrogate.model, tc, windows_for(scale_rows(p.scaler, p.train_rows), config, true),
                    windows_for(scale_rows(p.scaler, p.eval_rows), config, false));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string dir = paths.model();
    ensure_dir(dir);
    save_surrogate(surrogate, join_path(dir, "checkpoint.json"));
    std::string history = "epoch,train_loss,eval_loss,steps\n";
    for (const auto& e : result.history)
        history += std::to_string(e.epoch) + "," + fmt(e.train_loss) + "," + fmt(e.eval_loss) + "," +
                   std::to_string(e.steps) + "\n";
    write_text_file(join_path(dir, "history.csv"), history);
    write_run_info(m, join_path(dir, "run_info.json"), "train",
                   {{"architecture", nn::to_string(config.architecture)},
                    {"config", json::parse(serialize_model_config(config))},
                    {"epochs", result.history.size()},
                    {"best_epoch", result.best_epoch},
                    {"best_eval_loss", result.best_eval_loss},
                    {"train_seconds", seconds}});
    return "train: " + std::string(nn::to_string(config.architecture)) + ", " + std::to_string(result.history.size()) +
           " epochs, best epoch " + std::to_string(result.best_epoch) + " with eval loss " +
           fmt(result.best_eval_loss) + " -> " + dir;
}

std::string cmd_evaluate(const ExperimentManifest& m) {
    m.validate();
    const RunPaths paths = run_paths(m);
    Surrogate surrogate = load_checkpoint(paths);
    const Prepared p = load_prepared(paths);
    if (p.eval_rows.empty()) fail(ErrorCategory::validation, "evaluation split is empty; simulate more runs");
    const std::size_t grid = static_cast<std::size_t>(m.kde_grid_points);

    auto stamp = [&](EvalReport& r, const std::string& split) {
        r.provenance["manifest_hash"] = hex64(manifest_hash(m));
        r.provenance["seed"] = std::to_string(m.seed);
        r.provenance["split"] = split;
    };
    SampleTable eval_table = p.table;
    eval_table.rows = p.eval_rows;
    EvalReport report = evaluate_model(surrogate, eval_table, grid);
    stamp(report, "eval");
    const std::string dir = paths.eval();
    write_eval_report(report, dir);

    std::string summary = "evaluate: " + std::to_string(report.n_rows) + " eval rows";
    for (const auto& o : report.observables) summary += ", " + o.name + " R2 " + fixed(o.r2, 4);

    json extra{{"eval_rows", report.n_rows}};
    const std::string extra_path = join_path(paths.preprocess(), "extrapolation_samples.csv");
    if (fs::exists(extra_path)) {
        EvalReport ext = evaluate_model(surrogate, read_samples_csv(extra_path), grid);
        stamp(ext, "extrapolation");
        write_eval_report(ext, join_path(dir, "extrapolation"));
        summary += "; extrapolation " + std::to_string(ext.n_rows) + " rows";
        for (const auto& o : ext.observables) summary += ", " + o.name + " R2 " + fixed(o.r2, 4);
        extra["extrapolation_rows"] = ext.n_rows;
    }
    write_run_info(m, join_path(dir, "run_info.json"), "evaluate", extra);
    return summary + " -> " + dir;
}

std::string cmd_bench(const ExperimentManifest& m) {
    m.validate();
    const RunPaths paths = run_paths(m);
    Surrogate surrogate = load_checkpoint(paths);
    const PlatformSpec platform = manifest_platform(m);
    const WorkloadConfig config = manifest_workload_config(m);
    const std::uint64_t seed = derive_seeds(m.seed).workload;
    const auto suite = scenario_suite(m.scenario, 1, m.job_counts, m.extrapolation_simulations > 0 ? 1 : 0,
                                      m.extrapolation_jobs);

    const auto simulator = bench_simulation(platform, m.scenario, suite, seed, config, m.bench_repeats);
    std::vector<BenchRow> surrogate_rows;
    for (const auto& entry : suite) {
        const Workload w = generate_workload(m.scenario, entry.n_jobs, 0, seed, config);
        const SampleTable features = feature_table(m.scenario, workload_rows(w));
        const double s = median_seconds(m.bench_repeats, [&] { (void)predict(surrogate, features.rows); });
        surrogate_rows.push_back({to_string(m.scenario), entry.n_jobs, s});
    }
    const auto speedup = speedup_report(simulator, surrogate_rows);

    const std::string dir = paths.bench();
    ensure_dir(dir);
    write_text_file(join_path(dir, "simulator.csv"), bench_csv(simulator));
    write_text_file(join_path(dir, "surrogate.csv"), bench_csv(surrogate_rows));
    write_text_file(join_path(dir, "speedup.csv"), speedup_csv(speedup));
    write_run_info(m, join_path(dir, "run_info.json"), "bench", {{"repeats", m.bench_repeats}});

    std::string summary = "bench:";
    for (const auto& r : speedup)
        summary += " " + std::to_string(r.n_jobs) + " jobs " + fixed(r.ratio, 1) + "x;";
    return summary + " -> " + dir;
}

}  // namespace dcs
