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

#include "core/nn/model.hpp"

namespace dcs::nn {

const char* to_string(Architecture arch) {
    switch (arch) {
        case Architecture::bigru: return "bigru";
        case Architecture::bilstm: return "bilstm";
        case Architecture::transformer: return "transformer";
    }
    return "unknown";
}

Architecture architecture_from_string(const std::string& name) {
    if (name == "bigru") return Architecture::bigru;
    if (name == "bilstm") return Architecture::bilstm;
    if (name == "transformer") return Architecture::transformer;
    fail(ErrorCategory::argument, "unknown architecture '" + name + "' (expected bigru, bilstm or transformer)");
}

void ModelConfig::validate() const {
    auto check = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorCategory::argument, "model config: " + what);
    };
    check(hidden_size > 0, "hidden_size must be positive");
    check(num_layers > 0, "num_layers must be positive");
    check(window_size > 0, "window_size must be positive");
    check(window_overlap >= 0 && window_overlap < window_size, "window_overlap must lie in [0, window_size)");
    check(batch_size > 0, "batch_size must be positive");
    check(input_dim > 0 && output_dim > 0, "input_dim and output_dim must be positive");
    if (architecture == Architecture::transformer) {
        check(num_heads > 0, "num_heads must be positive");
        check(hidden_size % num_heads == 0, "hidden_size must be divisible by num_heads");
    }
}

SurrogateModel::SurrogateModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    Xoshiro256 rng(mix_seed(config.seed, 0x6d6f64656cULL));
    const Eigen::Index H = config.hidden_size;
    layers_.push_back(std::make_unique<Linear>(params_, "input", config.input_dim, H, rng));
    if (config.architecture == Architecture::transformer) {
        layers_.push_back(std::make_unique<PositionalEncoding>(H));
        for (int l = 0; l < config.num_layers; ++l)
            layers_.push_back(
                std::make_unique<TransformerBlock>(params_, "block" + std::to_string(l), H, config.num_heads, rng));
        layers_.push_back(std::make_unique<Linear>(params_, "output", H, config.output_dim, rng));
    } else {
        const CellType cell = config.architecture == Architecture::bigru ? CellType::gru : CellType::lstm;
        for (int l = 0; l < config.num_layers; ++l)
            layers_.push_back(std::make_unique<Bidirectional>(params_, "rnn" + std::to_string(l), cell,
                                                              l == 0 ? H : 2 * H, H, rng));
        layers_.push_back(std::make_unique<Linear>(params_, "output", 2 * H, config.output_dim, rng));
    }
}

Mat SurrogateModel::forward(const Mat& x, const SeqShape& shape) {
    check_shape(x.cols() == config_.input_dim, "model input width != input_dim");
    Mat h = x;
    for (auto& layer : layers_) h = layer->forward(h, shape);
    return h;
}

Mat SurrogateModel::infer(const Mat& x, const SeqShape& shape) {
    check_shape(x.cols() == config_.input_dim, "model input width != input_dim");
    Mat h = x;
    for (auto& layer : layers_) h = layer->infer(h, shape);
    return h;
}

Mat SurrogateModel::backward(const Mat& dy) {
    Mat g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Mat> SurrogateModel::snapshot() const {
    std::vector<Mat> out;
    for (const auto& p : params_.all()) out.push_back(p.value);
    return out;
}

void SurrogateModel::restore(const std::vector<Mat>& values) {
    auto& all = params_.all();
    if (values.size() != all.size()) fail(ErrorCategory::argument, "snapshot does not match parameter count");
    for (std::size_t i = 0; i < values.size(); ++i) {
        check_shape(values[i].rows() == all[i].value.rows() && values[i].cols() == all[i].value.cols(),
                    "snapshot parameter " + all[i].name);
        all[i].value = values[i];
    }
}

Mat to_time_major(const std::vector<double>& data, std::size_t windows, std::size_t steps, std::size_t channels) {
    check_shape(data.size() == windows * steps * channels, "window array size");
    Mat m(static_cast<Eigen::Index>(windows * steps), static_cast<Eigen::Index>(channels));
    for (std::size_t w = 0; w < windows; ++w)
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t c = 0; c < channels; ++c)
                m(static_cast<Eigen::Index>(t * windows + w), static_cast<Eigen::Index>(c)) =
                    data[(w * steps + t) * channels + c];
    return m;
}

std::vector<double> from_time_major(const Mat& m, std::size_t windows, std::size_t steps) {
    const auto channels = static_cast<std::size_t>(m.cols());
    std::vector<double> out(windows * steps * channels);
    for (std::size_t w = 0; w < windows; ++w)
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t c = 0; c < channels; ++c)
                out[(w * steps + t) * channels + c] =
                    m(static_cast<Eigen::Index>(t * windows + w), static_cast<Eigen::Index>(c));
    return out;
}

std::vector<double> model_forward(SurrogateModel& model, const WindowBatch& batch) {
    const auto& cfg = model.config();
    if (static_cast<int>(batch.n_features) != cfg.input_dim)
        fail(ErrorCategory::argument, "batch has " + std::to_string(batch.n_features) + " features, model expects " +
                                          std::to_string(cfg.input_dim));
    const std::size_t B = batch.n_windows();
    const std::size_t T = batch.window_size;
    if (B == 0) return {};
    SeqShape shape{T, B, &batch.mask};
    const Mat y = model.infer(to_time_major(batch.features, B, T, batch.n_features), shape);
    return from_time_major(y, B, T);
}

}  // namespace dcs::nn
