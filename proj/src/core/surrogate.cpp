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

#include "core/surrogate.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

#include "core/trace_io.hpp"

namespace dcs {

namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "dcsurrogate-checkpoint";
constexpr int kVersion = 1;

json config_to_json(const nn::ModelConfig& c) {
    return {{"architecture", nn::to_string(c.architecture)},
            {"hidden_size", c.hidden_size},
            {"num_layers", c.num_layers},
            {"window_size", c.window_size},
            {"window_overlap", c.window_overlap},
            {"batch_size", c.batch_size},
            {"num_heads", c.num_heads},
            {"input_dim", c.input_dim},
            {"output_dim", c.output_dim},
            {"seed", c.seed}};
}

nn::ModelConfig config_from_json(const json& j) {
    nn::ModelConfig c;
    c.architecture = nn::architecture_from_string(j.at("architecture").get<std::string>());
    c.hidden_size = j.at("hidden_size").get<int>();
    c.num_layers = j.at("num_layers").get<int>();
    c.window_size = j.at("window_size").get<int>();
    c.window_overlap = j.at("window_overlap").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.input_dim = j.at("input_dim").get<int>();
    c.output_dim = j.at("output_dim").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string serialize_model_config(const nn::ModelConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

nn::ModelConfig parse_model_config(const std::string& text) {
    try {
        auto config = config_from_json(json::parse(text));
        config.validate();
        return config;
    } catch (const json::exception& e) {
        fail(ErrorCategory::parse, std::string("model config: ") + e.what());
    }
}

std::string serialize_surrogate(const Surrogate& surrogate) {
    if (!surrogate.model) fail(ErrorCategory::argument, "surrogate has no model");
    json params = json::array();
    for (const auto& p : surrogate.model->params().all())
        params.push_back({{"name", p.name},
                          {"rows", p.value.rows()},
                          {"cols", p.value.cols()},
                          {"data", std::vector<double>(p.value.data(), p.value.data() + p.value.size())}});
    json doc{{"format", kFormat},
             {"version", kVersion},
             {"scenario", to_string(surrogate.scenario)},
             {"config", config_to_json(surrogate.model->config())},
             {"scaler", json::parse(serialize_scaler(surrogate.scaler))},
             {"params", params}};
    return doc.dump() + "\n";
}

Surrogate parse_surrogate(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::parse, std::string("checkpoint: ") + e.what());
    }
    Surrogate s;
    try {
        if (doc.value("format", "") != kFormat) fail(ErrorCategory::parse, "checkpoint: not a dcsurrogate checkpoint");
        if (doc.value("version", 0) != kVersion)
            fail(ErrorCategory::parse, "checkpoint: unsupported version " + doc.value("version", json()).dump());
        s.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
        s.scaler = parse_scaler(doc.at("scaler").dump());
        s.model = std::make_unique<nn::SurrogateModel>(config_from_json(doc.at("config")));
        auto& all = s.model->params().all();
        const auto& params = doc.at("params");
        if (params.size() != all.size())
            fail(ErrorCategory::validation, "checkpoint: expected " + std::to_string(all.size()) + " parameters, found " +
                                                std::to_string(params.size()));
        for (std::size_t i = 0; i < all.size(); ++i) {
            const auto& p = params[i];
            const auto data = p.at("data").get<std::vector<double>>();
            if (p.at("name").get<std::string>() != all[i].name || p.at("rows").get<Eigen::Index>() != all[i].value.rows() ||
                p.at("cols").get<Eigen::Index>() != all[i].value.cols() ||
                data.size() != static_cast<std::size_t>(all[i].value.size()))
                fail(ErrorCategory::validation, "checkpoint: parameter " + std::to_string(i) + " ('" +
                                                    p.at("name").get<std::string>() + "') does not match the model");
            std::copy(data.begin(), data.end(), all[i].value.data());
        }
    } catch (const json::exception& e) {
        fail(ErrorCategory::parse, std::string("checkpoint: ") + e.what());
    }
    const auto& cfg = s.model->config();
    if (static_cast<int>(s.scaler.features.size()) != cfg.input_dim ||
        static_cast<int>(s.scaler.targets.size()) != cfg.output_dim)
        fail(ErrorCategory::validation, "checkpoint: scaler arity does not match the model");
    return s;
}

void save_surrogate(const Surrogate& surrogate, const std::string& path) {
    write_text_file(path, serialize_surrogate(surrogate));
}

Surrogate load_surrogate(const std::string& path) { return parse_surrogate(read_text_file(path)); }

SampleTable select_targets(const SampleTable& table, const std::vector<std::string>& names) {
    if (names.empty()) fail(ErrorCategory::argument, "at least one target is required");
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
        auto it = std::find(table.target_names.begin(), table.target_names.end(), n);
        if (it == table.target_names.end()) fail(ErrorCategory::argument, "unknown target '" + n + "'");
        idx.push_back(static_cast<std::size_t>(it - table.target_names.begin()));
    }
    SampleTable out;
    out.feature_names = table.feature_names;
    out.target_names = names;
    out.rows.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        SampleRow row{r.simulation_id, r.job_index, r.features, {}};
        for (auto i : idx) row.targets.push_back(r.targets[i]);
        out.rows.push_back(std::move(row));
    }
    return out;
}

void check_schema(const Surrogate& surrogate, const SampleTable& table) {
    if (table.feature_names != surrogate.feature_names())
        fail(ErrorCategory::validation, "schema mismatch: data features do not match the checkpoint's features");
    for (const auto& t : surrogate.target_names())
        if (std::find(table.target_names.begin(), table.target_names.end(), t) == table.target_names.end())
            fail(ErrorCategory::validation, "schema mismatch: data has no target column '" + t + "'");
}

std::vector<RowPrediction> predict(Surrogate& surrogate, const std::vector<SampleRow>& rows) {
    if (!surrogate.model) fail(ErrorCategory::argument, "surrogate has no model");
    const auto& cfg = surrogate.model->config();
    std::vector<SampleRow> scaled;
    scaled.reserve(rows.size());
    for (const auto& r : rows) {
        SampleRow s{r.simulation_id, r.job_index, r.features, std::vector<double>(surrogate.scaler.targets.size(), 0.0)};
        surrogate.scaler.features.transform_inplace(s.features);
        scaled.push_back(std::move(s));
    }
    std::stable_sort(scaled.begin(), scaled.end(), [](const SampleRow& a, const SampleRow& b) {
        return std::tie(a.simulation_id, a.job_index) < std::tie(b.simulation_id, b.job_index);
    });
    const WindowBatch batch = make_windows(scaled, static_cast<std::size_t>(cfg.window_size), 0);
    auto out = unwindow(nn::model_forward(*surrogate.model, batch), surrogate.scaler.targets.size(), batch.provenance);
    for (auto& p : out) surrogate.scaler.targets.inverse_inplace(p.values);
    return out;
}

}  // namespace dcs
