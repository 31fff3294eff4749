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

#include "core/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "core/rng.hpp"
#include "core/trace_io.hpp"

namespace dcs {

namespace {

using nn::Mat;
using nn::ModelConfig;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t count_real(const std::vector<std::uint8_t>& mask) {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

struct Minibatch {
    Mat x;
    Mat y;
    std::vector<std::uint8_t> mask;
    std::size_t windows = 0;
};

// Gathers windows [first, last) of `order` into time-major matrices.
Minibatch gather(const WindowBatch& data, const std::vector<std::size_t>& order, std::size_t first,
                 std::size_t last) {
    const std::size_t B = last - first, T = data.window_size;
    const std::size_t F = data.n_features, O = data.n_targets;
    Minibatch mb;
    mb.windows = B;
    mb.x.resize(static_cast<Eigen::Index>(T * B), static_cast<Eigen::Index>(F));
    mb.y.resize(static_cast<Eigen::Index>(T * B), static_cast<Eigen::Index>(O));
    mb.mask.resize(B * T);
    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t w = order[first + b];
        for (std::size_t t = 0; t < T; ++t) {
            const auto row = static_cast<Eigen::Index>(t * B + b);
            const std::size_t src = w * T + t;
            for (std::size_t f = 0; f < F; ++f) mb.x(row, static_cast<Eigen::Index>(f)) = data.features[src * F + f];
            for (std::size_t o = 0; o < O; ++o) mb.y(row, static_cast<Eigen::Index>(o)) = data.targets[src * O + o];
            mb.mask[b * T + t] = data.mask[src];
        }
    }
    return mb;
}

// Sum of squared masked errors; fills d(sum)/d(pred) when grad is given.
double masked_sse(const Mat& pred, const Minibatch& mb, Mat* grad) {
    const std::size_t B = mb.windows, T = mb.mask.size() / std::max<std::size_t>(B, 1);
    if (grad) grad->setZero(pred.rows(), pred.cols());
    double sse = 0.0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t b = 0; b < B; ++b) {
            if (!mb.mask[b * T + t]) continue;
            const auto row = static_cast<Eigen::Index>(t * B + b);
            const auto diff = (pred.row(row) - mb.y.row(row)).eval();
            sse += diff.squaredNorm();
            if (grad) grad->row(row) = 2.0 * diff;
        }
    return sse;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

void check_batch(const nn::SurrogateModel& model, const WindowBatch& batch, const char* which) {
    const auto& cfg = model.config();
    if (batch.n_windows() == 0) return;
    if (static_cast<int>(batch.n_features) != cfg.input_dim || static_cast<int>(batch.n_targets) != cfg.output_dim)
        fail(ErrorCategory::argument, std::string(which) + " batch has " + std::to_string(batch.n_features) +
                                          " features / " + std::to_string(batch.n_targets) + " targets, model expects " +
                                          std::to_string(cfg.input_dim) + " / " + std::to_string(cfg.output_dim));
}

}  // namespace

void TrainConfig::validate() const {
    model.validate();
    if (!(learning_rate > 0.0 && std::isfinite(learning_rate)))
        fail(ErrorCategory::argument, "learning_rate must be positive");
    if (max_epochs < 1) fail(ErrorCategory::argument, "max_epochs must be >= 1");
    if (patience < 1) fail(ErrorCategory::argument, "patience must be >= 1");
}

double mse_loss(const std::vector<double>& pred, const std::vector<double>& target,
                const std::vector<std::uint8_t>& mask, std::size_t n_outputs) {
    if (pred.size() != target.size() || pred.size() != mask.size() * n_outputs)
        fail(ErrorCategory::argument, "mse_loss: prediction, target and mask shapes disagree");
    const std::size_t real = count_real(mask);
    if (real == 0) fail(ErrorCategory::argument, "mse_loss: mask selects no positions");
    double sse = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        for (std::size_t o = 0; o < n_outputs; ++o) {
            const double d = pred[i * n_outputs + o] - target[i * n_outputs + o];
            sse += d * d;
        }
    }
    return sse / static_cast<double>(real * n_outputs);
}

Adam::Adam(nn::ParameterSet& params, double learning_rate, double beta1, double beta2, double epsilon)
    : params_(params), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    for (const auto& p : params_.all()) {
        m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
    }
}

void Adam::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto& all = params_.all();
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto& p = all[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseAbs2();
        p.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
}

double batch_loss(nn::SurrogateModel& model, const WindowBatch& batch, std::size_t batch_size) {
    const std::size_t n = batch.n_windows();
    const std::size_t real = batch.real_rows();
    if (real == 0) fail(ErrorCategory::argument, "loss over a batch without real rows");
    const auto order = iota_indices(n);
    const std::size_t step = std::max<std::size_t>(batch_size, 1);
    double sse = 0.0;
    for (std::size_t first = 0; first < n; first += step) {
        const Minibatch mb = gather(batch, order, first, std::min(n, first + step));
        const nn::SeqShape shape{batch.window_size, mb.windows, &mb.mask};
        sse += masked_sse(model.infer(mb.x, shape), mb, nullptr);
    }
    return sse / static_cast<double>(real * batch.n_targets);
}

TrainResult train_model(nn::SurrogateModel& model, const TrainConfig& config, const WindowBatch& train,
                        const WindowBatch& eval, const std::function<void(const EpochRecord&)>& on_epoch) {
    config.validate();
    if (train.n_windows() == 0 || train.real_rows() == 0) fail(ErrorCategory::argument, "training data is empty");
    check_batch(model, train, "train");
    check_batch(model, eval, "eval");
    const bool has_eval = eval.real_rows() > 0;

    Adam adam(model.params(), config.learning_rate, config.beta1, config.beta2, config.epsilon);
    Xoshiro256 rng(mix_seed(config.seed, 0x747261696eULL));
    const std::size_t n = train.n_windows();
    const auto batch_size = static_cast<std::size_t>(config.model.batch_size);
    std::vector<std::size_t> order = iota_indices(n);

    TrainResult result;
    result.best_eval_loss = kInf;
    std::vector<Mat> best = model.snapshot();
    int stale = 0;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        EpochRecord rec;
        rec.epoch = epoch;
        double sse = 0.0;
        std::size_t scored = 0;
        for (std::size_t first = 0; first < n; first += batch_size) {
            const std::size_t last = std::min(n, first + batch_size);
            const Minibatch mb = gather(train, order, first, last);
            const std::size_t real = count_real(mb.mask);
            if (real == 0) continue;
            const nn::SeqShape shape{train.window_size, mb.windows, &mb.mask};
            const Mat pred = model.forward(mb.x, shape);
            Mat grad;
            const double batch_sse = masked_sse(pred, mb, &grad);
            if (!std::isfinite(batch_sse))
                fail(ErrorCategory::numeric, "training diverged in epoch " + std::to_string(epoch) +
                                                 " (non-finite loss)");
            grad /= static_cast<double>(real * train.n_targets);
            model.params().zero_grad();
            model.backward(grad);
            adam.step();
            sse += batch_sse;
            scored += real;
            ++rec.steps;
            rec.last_batch_windows = mb.windows;
        }
        rec.train_loss = sse / static_cast<double>(scored * train.n_targets);
        rec.eval_loss = has_eval ? batch_loss(model, eval, std::max<std::size_t>(batch_size, 64)) : rec.train_loss;
        if (!std::isfinite(rec.eval_loss) || !model.params().all_finite())
            fail(ErrorCategory::numeric, "training diverged in epoch " + std::to_string(epoch) + " (non-finite loss)");
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (rec.eval_loss < result.best_eval_loss) {
            result.best_eval_loss = rec.eval_loss;
            result.best_epoch = epoch;
            best = model.snapshot();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    model.restore(best);
    return result;
}

WindowBatch windows_for(const std::vector<SampleRow>& rows, const nn::ModelConfig& config, bool training) {
    return make_windows(rows, static_cast<std::size_t>(config.window_size),
                        training ? static_cast<std::size_t>(config.window_overlap) : 0);
}

// --- hyperparameter search -------------------------------------------------

namespace {

int& coordinate(ModelConfig& c, const std::string& name) {
    if (name == "hidden_size") return c.hidden_size;
    if (name == "window_size") return c.window_size;
    if (name == "window_overlap") return c.window_overlap;
    if (name == "num_layers") return c.num_layers;
    if (name == "batch_size") return c.batch_size;
    if (name == "num_heads") return c.num_heads;
    fail(ErrorCategory::internal, "unknown hyperparameter '" + name + "'");
}

const std::vector<int>& candidates(const SearchSpace& s, const std::string& name) {
    if (name == "hidden_size") return s.hidden_size;
    if (name == "window_size") return s.window_size;
    if (name == "window_overlap") return s.window_overlap;
    if (name == "num_layers") return s.num_layers;
    if (name == "batch_size") return s.batch_size;
    return s.num_heads;
}

using ConfigKey = std::vector<int>;

ConfigKey key_of(ModelConfig c, nn::Architecture arch) {
    ConfigKey k;
    for (const auto& name : tuning_order(arch)) k.push_back(coordinate(c, name));
    return k;
}

}  // namespace

std::vector<std::string> tuning_order(nn::Architecture arch) {
    std::vector<std::string> order = {"hidden_size", "window_size", "window_overlap", "num_layers", "batch_size"};
    if (arch == nn::Architecture::transformer) order.push_back("num_heads");
    return order;
}

SearchSpace SearchSpace::defaults(nn::Architecture arch) {
    SearchSpace s;
    s.hidden_size = {8, 16, 32};
    s.window_size = {10, 20, 40};
    s.window_overlap = {0, 2, 5};
    s.num_layers = {1, 2};
    s.batch_size = {16, 32, 64};
    s.num_heads = arch == nn::Architecture::transformer ? std::vector<int>{1, 2, 4} : std::vector<int>{2};
    return s;
}

void SearchSpace::validate(nn::Architecture arch) const {
    auto check = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorCategory::validation, "search space: " + what);
    };
    for (const auto& name : tuning_order(arch)) {
        const auto& v = candidates(*this, name);
        check(!v.empty(), name + " has no candidates");
        check(std::set<int>(v.begin(), v.end()).size() == v.size(), name + " has duplicate candidates");
        for (int x : v) check(name == "window_overlap" ? x >= 0 : x > 0, name + " candidates out of range");
    }
    check(*std::max_element(window_overlap.begin(), window_overlap.end()) <
              *std::min_element(window_size.begin(), window_size.end()),
          "every overlap must be smaller than every window size");
    if (arch == nn::Architecture::transformer)
        for (int h : hidden_size)
            for (int k : num_heads) check(h % k == 0, "hidden size " + std::to_string(h) + " not divisible by " +
                                                          std::to_string(k) + " heads");
}

TuneResult tune_hyperparameters(const SearchSpace& space, const nn::ModelConfig& base, std::uint64_t seed,
                                const TrialFunction& trial) {
    const nn::Architecture arch = base.architecture;
    space.validate(arch);
    const auto order = tuning_order(arch);

    TuneResult result;
    std::map<ConfigKey, double> memo;
    auto run = [&](const ModelConfig& cfg, int stage, int survivor) {
        const ConfigKey key = key_of(cfg, arch);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        TrialRecord rec;
        rec.trial_id = static_cast<int>(result.audit.size());
        rec.stage = stage;
        rec.survivor = survivor;
        rec.config = cfg;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            rec.eval_loss = trial(cfg);
            if (!std::isfinite(rec.eval_loss)) {
                rec.status = "failed: non-finite eval loss";
                rec.eval_loss = kInf;
            }
        } catch (const Error& e) {
            rec.status = std::string("failed: ") + e.what();
            rec.eval_loss = kInf;
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        memo[key] = rec.eval_loss;
        result.audit.push_back(rec);
        return rec.eval_loss;
    };

    // Stage 1: distinct random configurations.
    std::size_t space_size = 1;
    for (const auto& name : order) space_size *= candidates(space, name).size();
    const std::size_t n_random = std::min<std::size_t>(kRandomTrials, space_size);
    Xoshiro256 rng(mix_seed(seed, 0x74756e65ULL));
    std::set<ConfigKey> drawn;
    std::vector<std::pair<double, ModelConfig>> stage1;
    while (stage1.size() < n_random) {
        ModelConfig cfg = base;
        for (const auto& name : order) {
            const auto& v = candidates(space, name);
            coordinate(cfg, name) = v[rng.below(v.size())];
        }
        if (!drawn.insert(key_of(cfg, arch)).second) continue;
        stage1.emplace_back(run(cfg, 1, -1), cfg);
    }
    std::stable_sort(stage1.begin(), stage1.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Stage 2: coordinate sweeps from each survivor.
    const std::size_t n_survivors = std::min<std::size_t>(kSurvivors, stage1.size());
    std::vector<std::pair<double, ModelConfig>> refined;
    for (std::size_t s = 0; s < n_survivors; ++s) {
        auto [best_loss, best] = stage1[s];
        for (const auto& name : order) {
            ModelConfig current = best;
            for (int value : candidates(space, name)) {
                if (value == coordinate(current, name)) continue;
                ModelConfig cfg = current;
                coordinate(cfg, name) = value;
                const double loss = run(cfg, 2, static_cast<int>(s));
                if (loss < best_loss) {
                    best_loss = loss;
                    best = cfg;
                }
            }
        }
        refined.emplace_back(best_loss, best);
    }

    // Stage 3: best refined configuration; ties keep the higher-ranked survivor.
    std::size_t winner = 0;
    for (std::size_t s = 1; s < refined.size(); ++s)
        if (refined[s].first < refined[winner].first) winner = s;
    result.best = refined[winner].second;
    result.best_eval_loss = refined[winner].first;
    if (!std::isfinite(result.best_eval_loss)) fail(ErrorCategory::numeric, "every tuning trial failed");
    return result;
}

namespace {

const std::vector<std::string> kAuditHeader = {"trial_id", "stage",       "survivor",       "architecture",
                                               "hidden_size", "window_size", "window_overlap", "num_layers",
                                               "batch_size",  "num_heads",   "eval_loss",      "seconds",
                                               "status"};

std::string format_loss(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string audit_csv(const std::vector<TrialRecord>& audit) {
    std::ostringstream out;
    for (std::size_t i = 0; i < kAuditHeader.size(); ++i) out << (i ? "," : "") << kAuditHeader[i];
    out << '\n';
    for (const auto& r : audit) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << r.trial_id << ',' << r.stage << ',' << r.survivor << ',' << nn::to_string(r.config.architecture) << ','
            << r.config.hidden_size << ',' << r.config.window_size << ',' << r.config.window_overlap << ','
            << r.config.num_layers << ',' << r.config.batch_size << ',' << r.config.num_heads << ','
            << format_loss(r.eval_loss) << ',' << format_loss(r.seconds) << ',' << status << '\n';
    }
    return out.str();
}

std::vector<TrialRecord> parse_audit_csv(const std::string& text, const nn::ModelConfig& base) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != kAuditHeader)
        fail(ErrorCategory::parse, "audit log: unexpected header");
    std::vector<TrialRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        const std::string where = "audit log line " + std::to_string(line_no);
        if (f.size() != kAuditHeader.size()) fail(ErrorCategory::parse, where + ": wrong field count");
        TrialRecord r;
        auto as_int = [&](std::size_t i) { return static_cast<int>(parse_int(f[i], where)); };
        r.trial_id = as_int(0);
        r.stage = as_int(1);
        r.survivor = as_int(2);
        r.config = base;
        r.config.architecture = nn::architecture_from_string(f[3]);
        r.config.hidden_size = as_int(4);
        r.config.window_size = as_int(5);
        r.config.window_overlap = as_int(6);
        r.config.num_layers = as_int(7);
        r.config.batch_size = as_int(8);
        r.config.num_heads = as_int(9);
        r.eval_loss = f[10] == "inf" ? kInf : parse_double(f[10], where);
        r.seconds = parse_double(f[11], where);
        r.status = f[12];
        out.push_back(r);
    }
    return out;
}

TuneResult replay_audit(const std::vector<TrialRecord>& audit, const SearchSpace& space,
                        const nn::ModelConfig& base, std::uint64_t seed) {
    std::size_t next = 0;
    std::string mismatch;
    auto lookup = [&](const ModelConfig& cfg) {
        if (next >= audit.size()) {
            if (mismatch.empty()) mismatch = "audit replay: log ends before the schedule does";
            return kInf;
        }
        const TrialRecord& r = audit[next++];
        if (mismatch.empty() && key_of(r.config, base.architecture) != key_of(cfg, base.architecture))
            mismatch = "audit replay: trial " + std::to_string(r.trial_id) + " does not match the schedule";
        return r.eval_loss;
    };
    TuneResult result = tune_hyperparameters(space, base, seed, lookup);
    if (!mismatch.empty()) fail(ErrorCategory::validation, mismatch);
    if (next != audit.size()) fail(ErrorCategory::validation, "audit replay: log has extra trials");
    for (std::size_t i = 0; i < audit.size(); ++i) {
        result.audit[i].seconds = audit[i].seconds;
        result.audit[i].status = audit[i].status;
    }
    return result;
}

}  // namespace dcs
