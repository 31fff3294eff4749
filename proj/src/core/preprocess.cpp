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

#include "core/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "core/rng.hpp"

namespace dcs {

using nlohmann::json;

namespace {

void check_arity(const Standardizer& s, std::size_t n) {
    if (n != s.size())
        fail(ErrorCategory::argument, "row has " + std::to_string(n) + " values, standardizer expects " +
                                          std::to_string(s.size()));
}

json standardizer_to_json(const Standardizer& s) { return {{"names", s.names}, {"mean", s.mean}, {"std", s.std}}; }

Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.names = j.at("names").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
    if (s.mean.size() != s.std.size() || s.names.size() != s.mean.size())
        fail(ErrorCategory::validation, "standardizer arrays differ in length");
    return s;
}

}  // namespace

void Standardizer::transform_inplace(std::vector<double>& row) const {
    check_arity(*this, row.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = (row[i] - mean[i]) / divisor(i);
}

void Standardizer::inverse_inplace(std::vector<double>& row) const {
    check_arity(*this, row.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = row[i] * divisor(i) + mean[i];
}

std::vector<std::vector<double>> Standardizer::transform(const std::vector<std::vector<double>>& rows) const {
    auto out = rows;
    for (auto& r : out) transform_inplace(r);
    return out;
}

std::vector<std::vector<double>> Standardizer::inverse_transform(const std::vector<std::vector<double>>& rows) const {
    auto out = rows;
    for (auto& r : out) inverse_inplace(r);
    return out;
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows, std::vector<std::string> names) {
    if (rows.empty()) fail(ErrorCategory::argument, "cannot fit a standardizer on zero rows");
    const std::size_t d = rows.front().size();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std.assign(d, 0.0);
    for (const auto& r : rows) {
        if (r.size() != d) fail(ErrorCategory::argument, "rows differ in arity");
        for (std::size_t i = 0; i < d; ++i) s.mean[i] += r[i];
    }
    const double n = static_cast<double>(rows.size());
    for (auto& m : s.mean) m /= n;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < d; ++i) s.std[i] += (r[i] - s.mean[i]) * (r[i] - s.mean[i]);
    for (auto& v : s.std) v = std::sqrt(v / n);
    if (names.empty())
        for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
    if (names.size() != d) fail(ErrorCategory::argument, "standardizer names do not match arity");
    s.names = std::move(names);
    return s;
}

TableScaler fit_table_scaler(const SampleTable& table, const std::vector<SampleRow>& training_rows) {
    std::vector<std::vector<double>> f, t;
    f.reserve(training_rows.size());
    t.reserve(training_rows.size());
    for (const auto& r : training_rows) {
        f.push_back(r.features);
        t.push_back(r.targets);
    }
    return {fit_standardizer(f, table.feature_names), fit_standardizer(t, table.target_names)};
}

std::vector<SampleRow> scale_rows(const TableScaler& scaler, const std::vector<SampleRow>& rows) {
    auto out = rows;
    for (auto& r : out) {
        scaler.features.transform_inplace(r.features);
        scaler.targets.transform_inplace(r.targets);
    }
    return out;
}

std::string serialize_scaler(const TableScaler& scaler) {
    json doc{{"format", "dcsurrogate-standardizer"},
             {"version", 1},
             {"features", standardizer_to_json(scaler.features)},
             {"targets", standardizer_to_json(scaler.targets)}};
    return doc.dump(2) + "\n";
}

TableScaler parse_scaler(const std::string& text) {
    try {
        const json doc = json::parse(text);
        return {standardizer_from_json(doc.at("features")), standardizer_from_json(doc.at("targets"))};
    } catch (const json::exception& e) {
        fail(ErrorCategory::parse, std::string("standardizer: ") + e.what());
    }
}

std::size_t WindowBatch::real_rows() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

WindowBatch WindowBatch::subset(const std::vector<std::size_t>& windows) const {
    WindowBatch out;
    out.window_size = window_size;
    out.n_features = n_features;
    out.n_targets = n_targets;
    const std::size_t W = window_size;
    for (auto w : windows) {
        if (w >= n_windows()) fail(ErrorCategory::argument, "window index out of range");
        out.features.insert(out.features.end(), features.begin() + w * W * n_features,
                            features.begin() + (w + 1) * W * n_features);
        out.targets.insert(out.targets.end(), targets.begin() + w * W * n_targets,
                           targets.begin() + (w + 1) * W * n_targets);
        out.mask.insert(out.mask.end(), mask.begin() + w * W, mask.begin() + (w + 1) * W);
        out.provenance.insert(out.provenance.end(), provenance.begin() + w * W, provenance.begin() + (w + 1) * W);
    }
    return out;
}

WindowBatch make_windows(const std::vector<SampleRow>& rows, std::size_t window_size, std::size_t overlap) {
    if (window_size == 0) fail(ErrorCategory::argument, "window size must be positive");
    if (overlap >= window_size)
        fail(ErrorCategory::argument, "window overlap " + std::to_string(overlap) + " must be smaller than window size " +
                                          std::to_string(window_size));
    WindowBatch batch;
    batch.window_size = window_size;
    if (rows.empty()) return batch;
    batch.n_features = rows.front().features.size();
    batch.n_targets = rows.front().targets.size();
    const std::size_t stride = window_size - overlap;

    std::set<std::int64_t> seen;
    std::size_t begin = 0;
    while (begin < rows.size()) {
        if (!seen.insert(rows[begin].simulation_id).second)
            fail(ErrorCategory::argument, "rows of simulation " + std::to_string(rows[begin].simulation_id) +
                                              " are not contiguous; sort by (simulation_id, job_index)");
        std::size_t end = begin;
        while (end < rows.size() && rows[end].simulation_id == rows[begin].simulation_id) {
            if (end > begin && rows[end].job_index <= rows[end - 1].job_index)
                fail(ErrorCategory::argument, "rows must be sorted by (simulation_id, job_index)");
            ++end;
        }
        const std::size_t n = end - begin;
        for (std::size_t start = 0;; start += stride) {
            for (std::size_t p = 0; p < window_size; ++p) {
                const std::size_t i = start + p;
                if (i < n) {
                    const SampleRow& r = rows[begin + i];
                    if (r.features.size() != batch.n_features || r.targets.size() != batch.n_targets)
                        fail(ErrorCategory::argument, "rows differ in feature/target arity");
                    batch.features.insert(batch.features.end(), r.features.begin(), r.features.end());
                    batch.targets.insert(batch.targets.end(), r.targets.begin(), r.targets.end());
                    batch.mask.push_back(1);
                    batch.provenance.push_back({r.simulation_id, r.job_index});
                } else {
                    batch.features.insert(batch.features.end(), batch.n_features, 0.0);
                    batch.targets.insert(batch.targets.end(), batch.n_targets, 0.0);
                    batch.mask.push_back(0);
                    batch.provenance.push_back({rows[begin].simulation_id, -1});
                }
            }
            if (start + window_size >= n) break;
        }
        begin = end;
    }
    return batch;
}

std::vector<RowPrediction> unwindow(const std::vector<double>& predictions, std::size_t n_outputs,
                                    const std::vector<Provenance>& provenance) {
    if (predictions.size() != provenance.size() * n_outputs)
        fail(ErrorCategory::argument, "prediction array does not match provenance length");
    std::vector<RowPrediction> out;
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (std::size_t i = 0; i < provenance.size(); ++i) {
        const Provenance& p = provenance[i];
        if (p.padding()) continue;
        if (!seen.insert({p.simulation_id, p.job_index}).second) continue;
        out.push_back({p.simulation_id, p.job_index,
                       std::vector<double>(predictions.begin() + i * n_outputs,
                                           predictions.begin() + (i + 1) * n_outputs)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RowPrediction& a, const RowPrediction& b) {
        return a.simulation_id != b.simulation_id ? a.simulation_id < b.simulation_id : a.job_index < b.job_index;
    });
    return out;
}

bool SplitSpec::is_train(std::int64_t simulation_id) const {
    for (const auto& [len, ids] : train)
        if (std::find(ids.begin(), ids.end(), simulation_id) != ids.end()) return true;
    return false;
}

SplitSpec split_train_eval(const std::map<std::int64_t, std::vector<std::int64_t>>& groups, double fraction,
                           std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) fail(ErrorCategory::argument, "train fraction must lie in (0, 1)");
    SplitSpec split;
    split.train_fraction = fraction;
    for (const auto& [length, ids] : groups) {
        if (ids.empty()) fail(ErrorCategory::argument, "empty simulation group for length " + std::to_string(length));
        std::vector<std::int64_t> order = ids;
        std::sort(order.begin(), order.end());
        Xoshiro256 rng(mix_seed(seed, static_cast<std::uint64_t>(length), 2));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(order.size()) + 0.5));
        auto& tr = split.train[length];
        auto& ev = split.eval[length];
        tr.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        ev.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
        std::sort(tr.begin(), tr.end());
        std::sort(ev.begin(), ev.end());
    }
    return split;
}

std::map<std::int64_t, std::vector<std::int64_t>> group_by_length(const std::vector<SampleRow>& rows) {
    std::map<std::int64_t, std::int64_t> lengths;
    for (const auto& r : rows) ++lengths[r.simulation_id];
    std::map<std::int64_t, std::vector<std::int64_t>> groups;
    for (const auto& [sim, n] : lengths) groups[n].push_back(sim);
    return groups;
}

std::string serialize_split(const SplitSpec& split) {
    json train = json::object(), eval = json::object();
    for (const auto& [len, ids] : split.train) train[std::to_string(len)] = ids;
    for (const auto& [len, ids] : split.eval) eval[std::to_string(len)] = ids;
    return json{{"train_fraction", split.train_fraction}, {"train", train}, {"eval", eval}}.dump(2) + "\n";
}

SplitSpec parse_split(const std::string& text) {
    try {
        const json doc = json::parse(text);
        SplitSpec split;
        split.train_fraction = doc.at("train_fraction").get<double>();
        for (auto& [k, v] : doc.at("train").items()) split.train[std::stoll(k)] = v.get<std::vector<std::int64_t>>();
        for (auto& [k, v] : doc.at("eval").items()) split.eval[std::stoll(k)] = v.get<std::vector<std::int64_t>>();
        return split;
    } catch (const json::exception& e) {
        fail(ErrorCategory::parse, std::string("split file: ") + e.what());
    }
}

}  // namespace dcs
