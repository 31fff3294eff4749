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
#include <map>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/trace_io.hpp"

namespace dcs {

/// Per-column z-scoring. Stores the fitted (population) standard deviation;
/// columns with zero spread are divided by 1 instead.
struct Standardizer {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> std;

    std::size_t size() const { return mean.size(); }
    double divisor(std::size_t i) const { return std[i] == 0.0 ? 1.0 : std[i]; }

    void transform_inplace(std::vector<double>& row) const;
    void inverse_inplace(std::vector<double>& row) const;
    std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& rows) const;
    std::vector<std::vector<double>> inverse_transform(const std::vector<std::vector<double>>& rows) const;

    bool operator==(const Standardizer&) const = default;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows, std::vector<std::string> names = {});

// Feature and target scalers fitted on the training split of a SampleTable.
struct TableScaler {
    Standardizer features;
    Standardizer targets;

    bool operator==(const TableScaler&) const = default;
};

TableScaler fit_table_scaler(const SampleTable& table, const std::vector<SampleRow>& training_rows);
std::vector<SampleRow> scale_rows(const TableScaler& scaler, const std::vector<SampleRow>& rows);

std::string serialize_scaler(const TableScaler& scaler);
TableScaler parse_scaler(const std::string& text);

struct Provenance {
    std::int64_t simulation_id = -1;
    std::int64_t job_index = -1;  // -1 marks a padded position

    bool padding() const { return job_index < 0; }
    bool operator==(const Provenance&) const = default;
};

/// Fixed-length windows over simulations, zero-padded at the tail.
/// Dense arrays are laid out [window][position][channel].
struct WindowBatch {
    std::size_t window_size = 0;
    std::size_t n_features = 0;
    std::size_t n_targets = 0;
    std::vector<double> features;
    std::vector<double> targets;
    std::vector<std::uint8_t> mask;  // 1 = real row
    std::vector<Provenance> provenance;

    std::size_t n_windows() const { return window_size ? mask.size() / window_size : 0; }
    std::size_t real_rows() const;

    double feature(std::size_t w, std::size_t t, std::size_t f) const {
        return features[(w * window_size + t) * n_features + f];
    }
    double target(std::size_t w, std::size_t t, std::size_t o) const {
        return targets[(w * window_size + t) * n_targets + o];
    }
    bool real(std::size_t w, std::size_t t) const { return mask[w * window_size + t] != 0; }

    WindowBatch subset(const std::vector<std::size_t>& windows) const;
};

/// Windows never span simulations. Within a simulation, windows start at
/// 0, W-V, 2(W-V), ... until the last row is covered. Rows must be sorted
/// by (simulation_id, job_index).
WindowBatch make_windows(const std::vector<SampleRow>& rows, std::size_t window_size, std::size_t overlap);

struct RowPrediction {
    std::int64_t simulation_id = 0;
    std::int64_t job_index = 0;
    std::vector<double> values;

    bool operator==(const RowPrediction&) const = default;
};

/// Collapses per-position predictions ([window][position][output]) back to
/// one value vector per real row, sorted by (simulation_id, job_index).
/// When overlapping windows both cover a row, the earliest window wins.
std::vector<RowPrediction> unwindow(const std::vector<double>& predictions, std::size_t n_outputs,
                                    const std::vector<Provenance>& provenance);

struct SplitSpec {
    double train_fraction = 0.7;
    std::map<std::int64_t, std::vector<std::int64_t>> train;  // keyed by simulation length
    std::map<std::int64_t, std::vector<std::int64_t>> eval;

    bool is_train(std::int64_t simulation_id) const;
    bool operator==(const SplitSpec&) const = default;
};

// groups: simulation length -> simulation ids. Each group sends
// floor(fraction * n + 0.5) simulations to training, chosen by a seeded shuffle.
SplitSpec split_train_eval(const std::map<std::int64_t, std::vector<std::int64_t>>& groups, double fraction,
                           std::uint64_t seed);

// Groups simulations in a table by their row count.
std::map<std::int64_t, std::vector<std::int64_t>> group_by_length(const std::vector<SampleRow>& rows);

std::string serialize_split(const SplitSpec& split);
SplitSpec parse_split(const std::string& text);

}  // namespace dcs
