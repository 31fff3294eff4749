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

#include <memory>
#include <string>
#include <vector>

#include "core/nn/model.hpp"
#include "core/preprocess.hpp"

namespace dcs {

/// A trained model bundled with the scaler fitted on its training rows.
struct Surrogate {
    Scenario scenario = Scenario::homogeneous;
    TableScaler scaler;
    std::unique_ptr<nn::SurrogateModel> model;

    const std::vector<std::string>& feature_names() const { return scaler.features.names; }
    const std::vector<std::string>& target_names() const { return scaler.targets.names; }
};

std::string serialize_model_config(const nn::ModelConfig& config);
nn::ModelConfig parse_model_config(const std::string& text);

std::string serialize_surrogate(const Surrogate& surrogate);
Surrogate parse_surrogate(const std::string& text);
void save_surrogate(const Surrogate& surrogate, const std::string& path);
Surrogate load_surrogate(const std::string& path);

/// Keeps only the named targets, in the given order.
SampleTable select_targets(const SampleTable& table, const std::vector<std::string>& names);

/// Original-scale predictions for original-scale rows, one per row, sorted
/// by (simulation_id, job_index). Targets in `rows` are ignored.
std::vector<RowPrediction> predict(Surrogate& surrogate, const std::vector<SampleRow>& rows);

/// Fails with a validation error when the rows do not match the surrogate's schema.
void check_schema(const Surrogate& surrogate, const SampleTable& table);

}  // namespace dcs
