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

#include <cmath>
#include <map>
#include <algorithm>
#include <functional>
#include <set>

#include "core/rng.hpp"
#include "core/train.hpp"

namespace dcs {
namespace {

using nn::Architecture;
using nn::ModelConfig;

TEST(MseLoss, Examples) {
    EXPECT_EQ(mse_loss({1.0, 2.0}, {1.0, 2.0}, {1, 1}, 1), 0.0);
    EXPECT_EQ(mse_loss({0.0, 2.0}, {0.0, 0.0}, {1, 1}, 1), 2.0);
    EXPECT_EQ(mse_loss({0.0, 0.0, 2.0, 0.0}, {0.0, 0.0, 0.0, 0.0}, {1, 1}, 2), 1.0);
}

TEST(MseLoss, MaskedPositionsAreIgnored) {
    const std::vector<std::uint8_t> mask = {1, 0, 1, 0};
    const double a = mse_loss({1, 5, 2, 9}, {0, 0, 0, 0}, mask, 1);
    const double b = mse_loss({1, -1e9, 2, 1e300}, {0, 3, 0, -7}, mask, 1);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, 2.5);
}

TEST(MseLoss, Errors) {
    EXPECT_THROW(mse_loss({1.0}, {1.0}, {0}, 1), Error);
    EXPECT_THROW(mse_loss({1.0, 2.0}, {1.0}, {1}, 1), Error);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradientSign) {
    nn::ParameterSet params;
    auto& p = params.add("p", 1, 3);
    p.value << 1.0, -2.0, 0.5;
    p.grad << 0.3, -4.0, 1e-3;
    Adam adam(params, 0.01);
    adam.step();
    EXPECT_NEAR(p.value(0, 0), 1.0 - 0.01 * 0.3 / (0.3 + 1e-8), 1e-15);
    EXPECT_NEAR(p.value(0, 1), -2.0 + 0.01 * 4.0 / (4.0 + 1e-8), 1e-15);
    EXPECT_NEAR(p.value(0, 2), 0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-15);
}

TEST(Adam, MinimizesQuadratic) {
    nn::ParameterSet params;
    auto& p = params.add("p", 1, 2);
    p.value << 3.0, -4.0;
    Adam adam(params, 0.05);
    for (int i = 0; i < 2000; ++i) {
        p.grad = 2.0 * (p.value.array() - 1.0).matrix();
        adam.step();
    }
    EXPECT_NEAR(p.value(0, 0), 1.0, 1e-3);
    EXPECT_NEAR(p.value(0, 1), 1.0, 1e-3);
}

// Simulations of varying length with standardized normal features.
std::vector<SampleRow> synthetic_rows(std::int64_t n_sims, std::uint64_t seed,
                                      const std::function<double(double, double)>& target) {
    Xoshiro256 rng(seed);
    std::vector<SampleRow> rows;
    for (std::int64_t s = 0; s < n_sims; ++s) {
        const std::int64_t n = 10 + static_cast<std::int64_t>(rng.below(15));
        for (std::int64_t j = 0; j < n; ++j) {
            const double x1 = rng.normal(), x2 = rng.normal();
            rows.push_back({s, j, {x1, x2}, {target(x1, x2)}});
        }
    }
    return rows;
}

ModelConfig tiny(Architecture arch) {
    ModelConfig c;
    c.architecture = arch;
    c.hidden_size = 8;
    c.num_layers = 1;
    c.window_size = 8;
    c.window_overlap = 0;
    c.batch_size = 8;
    c.num_heads = 2;
    c.input_dim = 2;
    c.output_dim = 1;
    c.seed = 5;
    return c;
}

class TrainArchitectures : public ::testing::TestWithParam<Architecture> {};

TEST_P(TrainArchitectures, LinearTargetIsLearned) {
    // y = 2 x1 standardized by its own std (2), i.e. y = x1.
    auto f = [](double x1, double) { return x1; };
    const auto train_rows = synthetic_rows(30, 1, f), eval_rows = synthetic_rows(10, 2, f);
    TrainConfig cfg;
    cfg.model = tiny(GetParam());
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 200;
    cfg.seed = 3;
    nn::SurrogateModel model(cfg.model);
    const auto eval = windows_for(eval_rows, cfg.model, false);
    const TrainResult r = train_model(model, cfg, windows_for(train_rows, cfg.model, true), eval);
    EXPECT_LT(r.best_eval_loss, 1e-3);
    EXPECT_LE(r.history.size(), 200u);
    EXPECT_NEAR(batch_loss(model, eval, 64), r.best_eval_loss, 1e-12);
}

TEST_P(TrainArchitectures, ConstantTargetConvergesQuickly) {
    // Constant features standardize to zero, as in the homogeneous scenario.
    auto f = [](double, double) { return 0.75; };
    auto zero_features = [](std::vector<SampleRow> rows) {
        for (auto& r : rows) r.features.assign(r.features.size(), 0.0);
        return rows;
    };
    TrainConfig cfg;
    cfg.model = tiny(GetParam());
    cfg.model.batch_size = 4;
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 50;
    nn::SurrogateModel model(cfg.model);
    const TrainResult r = train_model(model, cfg, windows_for(zero_features(synthetic_rows(100, 3, f)), cfg.model, true),
                                      windows_for(zero_features(synthetic_rows(5, 4, f)), cfg.model, false));
    EXPECT_LT(r.best_eval_loss, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(All, TrainArchitectures,
                         ::testing::Values(Architecture::bigru, Architecture::bilstm, Architecture::transformer),
                         [](const auto& info) { return std::string(nn::to_string(info.param)); });

TEST(TrainModel, DeterministicHistoryAndBestCheckpoint) {
    auto f = [](double x1, double x2) { return std::sin(x1) * x2; };
    const auto train_rows = synthetic_rows(12, 5, f), eval_rows = synthetic_rows(4, 6, f);
    TrainConfig cfg;
    cfg.model = tiny(Architecture::bigru);
    cfg.model.batch_size = 5;
    cfg.max_epochs = 15;
    cfg.patience = 4;
    auto run = [&] {
        nn::SurrogateModel model(cfg.model);
        return train_model(model, cfg, windows_for(train_rows, cfg.model, true),
                           windows_for(eval_rows, cfg.model, false));
    };
    const TrainResult a = run(), b = run();
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
        EXPECT_EQ(a.history[i].eval_loss, b.history[i].eval_loss);
    }
    for (const auto& e : a.history) EXPECT_LE(a.best_eval_loss, e.eval_loss);
}

TEST(TrainModel, RaggedFinalBatchIsCounted) {
    auto f = [](double x1, double) { return x1; };
    const auto rows = synthetic_rows(6, 7, f);
    TrainConfig cfg;
    cfg.model = tiny(Architecture::bigru);
    cfg.model.batch_size = 4;
    cfg.max_epochs = 1;
    const WindowBatch train = windows_for(rows, cfg.model, true);
    nn::SurrogateModel model(cfg.model);
    const TrainResult r = train_model(model, cfg, train, {});
    const std::size_t n = train.n_windows();
    EXPECT_EQ(r.history[0].steps, (n + 3) / 4);
    EXPECT_EQ(r.history[0].last_batch_windows, n % 4 == 0 ? 4 : n % 4);
}

TEST(TrainModel, DivergenceNamesEpoch) {
    auto f = [](double x1, double) { return x1; };
    TrainConfig cfg;
    cfg.model = tiny(Architecture::bigru);
    cfg.learning_rate = 1e300;
    nn::SurrogateModel model(cfg.model);
    try {
        train_model(model, cfg, windows_for(synthetic_rows(4, 8, f), cfg.model, true), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::numeric);
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
    }
}

TEST(TrainModel, EmptyTrainingDataIsRejected) {
    TrainConfig cfg;
    cfg.model = tiny(Architecture::bigru);
    nn::SurrogateModel model(cfg.model);
    EXPECT_THROW(train_model(model, cfg, {}, {}), Error);
}

// --- tuner against a stubbed trainer ---------------------------------------

SearchSpace stub_space() {
    SearchSpace s;
    s.hidden_size = {4, 8, 16};
    s.window_size = {5, 10};
    s.window_overlap = {0, 1, 2};
    s.num_layers = {1, 2};
    s.batch_size = {2, 4, 8};
    s.num_heads = {1};
    return s;
}

// Known loss with a unique optimum at (16, 10, 1, 2, 4).
double stub_loss(const ModelConfig& c) {
    return std::pow(std::log2(c.hidden_size) - 4.0, 2) + 0.3 * std::abs(c.window_size - 10) +
           0.7 * std::pow(c.window_overlap - 1, 2) + 1.1 * (c.num_layers == 2 ? 0 : 1) +
           0.05 * std::abs(c.batch_size - 4) + 1e-3 * c.hidden_size * c.batch_size;
}

std::vector<int> key(const ModelConfig& c) {
    return {c.hidden_size, c.window_size, c.window_overlap, c.num_layers, c.batch_size};
}

// Independent enumeration of the schedule, given the stage-1 draws.
std::vector<std::vector<int>> expected_schedule(const std::vector<ModelConfig>& stage1, const SearchSpace& s) {
    std::vector<std::vector<int>> calls;
    std::set<std::vector<int>> seen;
    std::vector<std::pair<double, std::vector<int>>> ranked;
    for (const auto& c : stage1) {
        calls.push_back(key(c));
        seen.insert(key(c));
        ranked.push_back({stub_loss(c), key(c)});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first < b.first; });
    const std::vector<const std::vector<int>*> lists = {&s.hidden_size, &s.window_size, &s.window_overlap,
                                                        &s.num_layers, &s.batch_size};
    auto loss_of = [](const std::vector<int>& k) {
        ModelConfig c;
        c.hidden_size = k[0], c.window_size = k[1], c.window_overlap = k[2], c.num_layers = k[3], c.batch_size = k[4];
        return stub_loss(c);
    };
    for (std::size_t r = 0; r < 3; ++r) {
        auto best = ranked[r].second;
        for (std::size_t coord = 0; coord < 5; ++coord) {
            const auto base = best;
            for (int v : *lists[coord]) {
                if (v == base[coord]) continue;
                auto cand = base;
                cand[coord] = v;
                if (seen.insert(cand).second) calls.push_back(cand);
                if (loss_of(cand) < loss_of(best)) best = cand;
            }
        }
    }
    return calls;
}

ModelConfig stub_base() {
    ModelConfig base;
    base.architecture = Architecture::bigru;
    base.input_dim = 4;
    base.output_dim = 2;
    return base;
}

TEST(Tuner, FollowsScheduleAndFindsOptimum) {
    const SearchSpace space = stub_space();
    std::vector<ModelConfig> calls;
    const TuneResult r = tune_hyperparameters(space, stub_base(), 42, [&](const ModelConfig& c) {
        calls.push_back(c);
        return stub_loss(c);
    });
    ASSERT_GE(calls.size(), 10u);
    const std::vector<ModelConfig> stage1(calls.begin(), calls.begin() + 10);
    std::set<std::vector<int>> distinct;
    for (const auto& c : stage1) distinct.insert(key(c));
    EXPECT_EQ(distinct.size(), 10u);

    const auto expected = expected_schedule(stage1, space);
    ASSERT_EQ(calls.size(), expected.size());
    for (std::size_t i = 0; i < calls.size(); ++i) EXPECT_EQ(key(calls[i]), expected[i]) << "trial " << i;
    EXPECT_EQ(r.audit.size(), calls.size());

    EXPECT_EQ(key(r.best), (std::vector<int>{16, 10, 1, 2, 4}));
    EXPECT_EQ(r.best_eval_loss, stub_loss(r.best));
    for (std::size_t i = 0; i < 10; ++i) EXPECT_LE(r.best_eval_loss, r.audit[i].eval_loss);
    EXPECT_EQ(r.best.input_dim, 4);
}

TEST(Tuner, SingleCandidateSpaceSkipsStageTwo) {
    SearchSpace s;
    s.hidden_size = {8};
    s.window_size = {10};
    s.window_overlap = {0};
    s.num_layers = {1};
    s.batch_size = {4};
    s.num_heads = {1};
    int n = 0;
    const TuneResult r = tune_hyperparameters(s, stub_base(), 1, [&](const ModelConfig& c) {
        ++n;
        return stub_loss(c);
    });
    EXPECT_EQ(n, 1);
    EXPECT_EQ(key(r.best), (std::vector<int>{8, 10, 0, 1, 4}));
}

TEST(Tuner, AuditLogReplaysWinner) {
    const SearchSpace space = stub_space();
    const TuneResult r = tune_hyperparameters(space, stub_base(), 9, stub_loss);
    const auto parsed = parse_audit_csv(audit_csv(r.audit), stub_base());
    ASSERT_EQ(parsed.size(), r.audit.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) EXPECT_EQ(parsed[i], r.audit[i]);
    const TuneResult replayed = replay_audit(parsed, space, stub_base(), 9);
    EXPECT_EQ(replayed.best, r.best);
    EXPECT_EQ(replayed.best_eval_loss, r.best_eval_loss);

    auto tampered = parsed;
    std::swap(tampered[0], tampered[1]);
    EXPECT_THROW(replay_audit(tampered, space, stub_base(), 9), Error);
}

TEST(Tuner, FailedTrialsAreSkippedWithReason) {
    const TuneResult r = tune_hyperparameters(stub_space(), stub_base(), 4, [](const ModelConfig& c) {
        if (c.num_layers == 1) fail(ErrorCategory::numeric, "diverged");
        return stub_loss(c);
    });
    EXPECT_EQ(r.best.num_layers, 2);
    bool saw_failure = false;
    for (const auto& t : r.audit)
        if (t.config.num_layers == 1) {
            saw_failure = true;
            EXPECT_TRUE(std::isinf(t.eval_loss));
            EXPECT_NE(t.status.find("diverged"), std::string::npos);
        }
    EXPECT_TRUE(saw_failure);
}

TEST(Tuner, SearchSpaceValidation) {
    SearchSpace s = stub_space();
    s.window_overlap = {0, 5};
    EXPECT_THROW(s.validate(Architecture::bigru), Error);
    s = stub_space();
    s.batch_size = {};
    EXPECT_THROW(s.validate(Architecture::bigru), Error);
    s = stub_space();
    s.num_heads = {3};
    EXPECT_THROW(s.validate(Architecture::transformer), Error);
    EXPECT_NO_THROW(SearchSpace::defaults(Architecture::transformer).validate(Architecture::transformer));
}

}  // namespace
}  // namespace dcs
