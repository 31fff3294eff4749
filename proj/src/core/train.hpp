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
#include <functional>
#include <string>
#include <vector>

#include "core/nn/model.hpp"
#include "core/preprocess.hpp"

namespace dcs {

struct TrainConfig {
    nn::ModelConfig model;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_epochs = 200;
    int patience = 20;
    std::uint64_t seed = 0;  // window shuffling

    void validate() const;
};

/// Mean squared error over real positions and all outputs. Values are
/// [window][position][output]; mask is [window][position].
double mse_loss(const std::vector<double>& pred, const std::vector<double>& target,
                const std::vector<std::uint8_t>& mask, std::size_t n_outputs);

class Adam {
public:
    Adam(nn::ParameterSet& params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);
    void step();
    std::uint64_t steps() const { return t_; }

private:
    nn::ParameterSet& params_;
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<nn::Mat> m_, v_;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double eval_loss = 0.0;
    std::size_t steps = 0;
    std::size_t last_batch_windows = 0;  // < batch_size when the final batch is ragged
};

struct TrainResult {
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_eval_loss = 0.0;
};

/// Trains in place and leaves the best-eval-loss parameters in the model.
/// Eval loss falls back to train loss when the eval batch is empty.
TrainResult train_model(nn::SurrogateModel& model, const TrainConfig& config, const WindowBatch& train,
                        const WindowBatch& eval, const std::function<void(const EpochRecord&)>& on_epoch = {});

double batch_loss(nn::SurrogateModel& model, const WindowBatch& batch, std::size_t batch_size);

struct SearchSpace {
    std::vector<int> hidden_size;
    std::vector<int> window_size;
    std::vector<int> window_overlap;
    std::vector<int> num_layers;
    std::vector<int> batch_size;
    std::vector<int> num_heads;  // transformer only

    static SearchSpace defaults(nn::Architecture arch);
    void validate(nn::Architecture arch) const;
};

/// Coordinates swept in stage 2, in order.
std::vector<std::string> tuning_order(nn::Architecture arch);

struct TrialRecord {
    int trial_id = 0;
    int stage = 0;      // 1 random, 2 coordinate sweep
    int survivor = -1;  // stage-2 lineage, by stage-1 rank
    nn::ModelConfig config;
    double eval_loss = 0.0;  // +inf for failed trials
    double seconds = 0.0;
    std::string status = "ok";

    bool operator==(const TrialRecord&) const = default;
};

using TrialFunction = std::function<double(const nn::ModelConfig&)>;

struct TuneResult {
    nn::ModelConfig best;
    double best_eval_loss = 0.0;
    std::vector<TrialRecord> audit;
};

inline constexpr int kRandomTrials = 10;
inline constexpr int kSurvivors = 3;

TuneResult tune_hyperparameters(const SearchSpace& space, const nn::ModelConfig& base, std::uint64_t seed,
                                const TrialFunction& trial);

std::string audit_csv(const std::vector<TrialRecord>& audit);
std::vector<TrialRecord> parse_audit_csv(const std::string& text, const nn::ModelConfig& base);

/// Reruns the schedule with losses read back from an audit log instead of
/// training. Fails if the log does not follow the schedule.
TuneResult replay_audit(const std::vector<TrialRecord>& audit, const SearchSpace& space,
                        const nn::ModelConfig& base, std::uint64_t seed);

/// Training windows use the configured overlap; eval windows use none so
/// each row is scored once.
WindowBatch windows_for(const std::vector<SampleRow>& rows, const nn::ModelConfig& config, bool training);

}  // namespace dcs
