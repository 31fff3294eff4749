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
#include <utility>
#include <vector>

#include "core/nn/tensor.hpp"
#include "core/rng.hpp"

namespace dcs::nn {

/// A differentiable block. forward() caches what backward() needs; backward()
/// accumulates parameter gradients and returns the gradient w.r.t. the input.
class Module {
public:
    virtual ~Module() = default;
    virtual Mat forward(const Mat& x, const SeqShape& shape) = 0;
    virtual Mat backward(const Mat& dy) = 0;
    // Forward pass that keeps nothing for backward().
    virtual Mat infer(const Mat& x, const SeqShape& shape) { return forward(x, shape); }
};

// Uniform in [-bound, bound].
void init_uniform(Mat& m, double bound, Xoshiro256& rng);

// y = xW + b
Mat linear_forward(const Mat& x, const Mat& w, const Mat& b);

class Linear : public Module {
public:
    Linear(ParameterSet& params, const std::string& name, Eigen::Index in, Eigen::Index out, Xoshiro256& rng);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;

    Param& weight() { return w_; }
    Param& bias() { return b_; }

private:
    Param& w_;
    Param& b_;
    Mat x_;
};

// Gate blocks are stored column-wise: GRU [update z | reset r | candidate],
// LSTM [input i | forget f | cell g | output o].
struct RecurrentWeights {
    const Mat& wx;  // [in x G*H]
    const Mat& u;   // [H x G*H]
    const Mat& b;   // [1 x G*H]
};

// h = (1 - z) * h_prev + z * tanh(x Wc + (r * h_prev) Uc + bc)
Mat gru_cell(const Mat& x, const Mat& h_prev, const RecurrentWeights& w);

// Returns (h, c) with c = f * c_prev + i * g and h = o * tanh(c).
std::pair<Mat, Mat> lstm_cell(const Mat& x, const Mat& h_prev, const Mat& c_prev, const RecurrentWeights& w);

enum class Direction { forward, backward };

/// One direction of a GRU over a time-major sequence, zero initial state.
class GruLayer : public Module {
public:
    GruLayer(ParameterSet& params, const std::string& name, Eigen::Index in, Eigen::Index hidden, Direction dir,
             Xoshiro256& rng);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;
    Mat infer(const Mat& x, const SeqShape& shape) override;

private:
    Param& wx_;
    Param& u_;
    Param& b_;
    Eigen::Index hidden_;
    Direction dir_;
    SeqShape shape_;
    Mat x_, h_prev_, z_, r_, cand_;
};

class LstmLayer : public Module {
public:
    LstmLayer(ParameterSet& params, const std::string& name, Eigen::Index in, Eigen::Index hidden, Direction dir,
              Xoshiro256& rng);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;
    Mat infer(const Mat& x, const SeqShape& shape) override;

private:
    Param& wx_;
    Param& u_;
    Param& b_;
    Eigen::Index hidden_;
    Direction dir_;
    SeqShape shape_;
    Mat x_, h_prev_, c_prev_, gates_, tanh_c_;
};

enum class CellType { gru, lstm };

/// Forward and backward direction layers over the same input; outputs are
/// concatenated per position as [forward | backward].
class Bidirectional : public Module {
public:
    Bidirectional(ParameterSet& params, const std::string& name, CellType cell, Eigen::Index in, Eigen::Index hidden,
                  Xoshiro256& rng);
    Bidirectional(std::unique_ptr<Module> fwd, std::unique_ptr<Module> bwd, Eigen::Index hidden);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;
    Mat infer(const Mat& x, const SeqShape& shape) override;

private:
    std::unique_ptr<Module> fwd_;
    std::unique_ptr<Module> bwd_;
    Eigen::Index hidden_;
};

Mat bidirectional_forward(const Mat& x, const SeqShape& shape, Module& fwd, Module& bwd);

class LayerNorm : public Module {
public:
    LayerNorm(ParameterSet& params, const std::string& name, Eigen::Index dim, double eps = 1e-5);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;

private:
    Param& gamma_;
    Param& beta_;
    double eps_;
    Mat xhat_;
    Eigen::VectorXd inv_std_;
};

/// Self-attention within each window; no causal mask. Keys at padded
/// positions (per SeqShape::mask) get exactly zero weight.
class MultiHeadAttention : public Module {
public:
    MultiHeadAttention(ParameterSet& params, const std::string& name, Eigen::Index dim, int heads, Xoshiro256& rng);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;

    // Attention weights [T x T] of window b, head h from the last forward.
    const Mat& weights(std::size_t b, int h) const { return probs_[b * static_cast<std::size_t>(heads_) + h]; }

    Param& wq() { return wq_; }
    Param& wk() { return wk_; }
    Param& wv() { return wv_; }
    Param& wo() { return wo_; }
    Param& bq() { return bq_; }
    Param& bk() { return bk_; }
    Param& bv() { return bv_; }
    Param& bo() { return bo_; }

private:
    Param &wq_, &bq_, &wk_, &bk_, &wv_, &bv_, &wo_, &bo_;
    Eigen::Index dim_;
    int heads_;
    SeqShape shape_;
    Mat x_, q_, k_, v_, concat_;
    std::vector<Mat> probs_;
};

struct AttentionWeights {
    const Mat& wq;
    const Mat& bq;
    const Mat& wk;
    const Mat& bk;
    const Mat& wv;
    const Mat& bv;
    const Mat& wo;
    const Mat& bo;
};

Mat multi_head_attention(const Mat& x, const SeqShape& shape, const AttentionWeights& w, int heads);

// Linear(d, 4d) -> GELU -> Linear(4d, d)
class FeedForward : public Module {
public:
    FeedForward(ParameterSet& params, const std::string& name, Eigen::Index dim, Eigen::Index inner, Xoshiro256& rng);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;

private:
    Linear in_;
    Linear out_;
    Mat pre_;
};

// Adds the sinusoidal encoding of each row's position within its window.
class PositionalEncoding : public Module {
public:
    explicit PositionalEncoding(Eigen::Index dim) : dim_(dim) {}
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override { return dy; }

    static double value(std::size_t position, Eigen::Index channel, Eigen::Index dim);

private:
    Eigen::Index dim_;
};

// Pre-norm encoder block: x + MHA(LN(x)), then y + FFN(LN(y)).
class TransformerBlock : public Module {
public:
    TransformerBlock(ParameterSet& params, const std::string& name, Eigen::Index dim, int heads, Xoshiro256& rng);
    Mat forward(const Mat& x, const SeqShape& shape) override;
    Mat backward(const Mat& dy) override;

private:
    LayerNorm ln1_;
    MultiHeadAttention attn_;
    LayerNorm ln2_;
    FeedForward ffn_;
};

}  // namespace dcs::nn
