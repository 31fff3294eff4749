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
#include <memory>
#include <string>
#include <vector>

#include "core/nn/layers.hpp"
#include "core/preprocess.hpp"

namespace dcs::nn {

enum class Architecture { bigru, bilstm, transformer };

const char* to_string(Architecture arch);
Architecture architecture_from_string(const std::string& name);

struct ModelConfig {
    Architecture architecture = Architecture::bigru;
    int hidden_size = 32;
    int num_layers = 1;
    int window_size = 20;
    int window_overlap = 0;
    int batch_size = 32;
    int num_heads = 2;  // transformer only
    int input_dim = 0;
    int output_dim = 0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

/// BiGRU/BiLSTM: linear input -> stacked bidirectional layers -> linear output.
/// Transformer: linear embedding + sinusoidal positions -> pre-norm encoder
/// blocks -> linear output. One output row per input row.
class SurrogateModel {
public:
    explicit SurrogateModel(const ModelConfig& config);

    SurrogateModel(const SurrogateModel&) = delete;
    SurrogateModel& operator=(const SurrogateModel&) = delete;

    const ModelConfig& config() const { return config_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }

    // x is time-major [T*B x input_dim]; returns [T*B x output_dim].
    Mat forward(const Mat& x, const SeqShape& shape);
    // Accumulates parameter gradients; returns d(loss)/dx.
    Mat backward(const Mat& dy);
    // Same output as forward(); backward() may not follow.
    Mat infer(const Mat& x, const SeqShape& shape);

    std::vector<Mat> snapshot() const;
    void restore(const std::vector<Mat>& values);

private:
    ModelConfig config_;
    ParameterSet params_;
    std::vector<std::unique_ptr<Module>> layers_;
};

// [window][position][channel] <-> time-major [T*B x channels]
Mat to_time_major(const std::vector<double>& data, std::size_t windows, std::size_t steps, std::size_t channels);
std::vector<double> from_time_major(const Mat& m, std::size_t windows, std::size_t steps);

// Predictions laid out [window][position][output].
std::vector<double> model_forward(SurrogateModel& model, const WindowBatch& batch);

}  // namespace dcs::nn
