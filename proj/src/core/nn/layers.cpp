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

#include "core/nn/layers.hpp"

#include <cmath>
#include <limits>

namespace dcs::nn {

namespace {

using StridedMap = Eigen::Map<Mat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const Mat, 0, Eigen::OuterStride<>>;

template <typename Expr>
Mat sigmoid_of(const Expr& a) {
    return (1.0 + (-a.array()).exp()).inverse().matrix();
}

template <typename Expr>
Mat tanh_of(const Expr& a) {
    return (2.0 / (1.0 + (-2.0 * a.array()).exp()) - 1.0).matrix();
}

// Rows of window b inside a time-major [T*B x d] matrix.
ConstStridedMap window_rows(const Mat& m, std::size_t b, const SeqShape& s) {
    const auto d = m.cols();
    return ConstStridedMap(m.data() + static_cast<Eigen::Index>(b) * d, static_cast<Eigen::Index>(s.steps), d,
                           Eigen::OuterStride<>(static_cast<Eigen::Index>(s.windows) * d));
}

StridedMap window_rows(Mat& m, std::size_t b, const SeqShape& s) {
    const auto d = m.cols();
    return StridedMap(m.data() + static_cast<Eigen::Index>(b) * d, static_cast<Eigen::Index>(s.steps), d,
                      Eigen::OuterStride<>(static_cast<Eigen::Index>(s.windows) * d));
}

std::size_t step_at(std::size_t s, std::size_t steps, Direction dir) {
    return dir == Direction::forward ? s : steps - 1 - s;
}

void check_sequence(const Mat& x, const SeqShape& shape, Eigen::Index in, const char* layer) {
    if (shape.steps == 0) fail(ErrorCategory::argument, std::string(layer) + ": empty sequence");
    check_shape(static_cast<std::size_t>(x.rows()) == shape.rows(), std::string(layer) + " rows != T*B");
    check_shape(x.cols() == in, std::string(layer) + " input width");
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace

Param& ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    if (find(name)) fail(ErrorCategory::internal, "duplicate parameter name '" + name + "'");
    params_.push_back(Param{std::move(name), Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
    return params_.back();
}

Param* ParameterSet::find(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

const Param* ParameterSet::find(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

void ParameterSet::zero_grad() {
    for (auto& p : params_) p.grad.setZero();
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
}

bool ParameterSet::all_finite() const {
    for (const auto& p : params_)
        if (!p.value.allFinite()) return false;
    return true;
}

void init_uniform(Mat& m, double bound, Xoshiro256& rng) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

// ---------------------------------------------------------------- Linear

Mat linear_forward(const Mat& x, const Mat& w, const Mat& b) {
    check_shape(x.cols() == w.rows(), "linear: x cols != W rows");
    check_shape(b.rows() == 1 && b.cols() == w.cols(), "linear: bias width != W cols");
    Mat y = x * w;
    y.rowwise() += b.row(0);
    return y;
}

Linear::Linear(ParameterSet& params, const std::string& name, Eigen::Index in, Eigen::Index out, Xoshiro256& rng)
    : w_(params.add(name + ".weight", in, out)), b_(params.add(name + ".bias", 1, out)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    init_uniform(w_.value, bound, rng);
    init_uniform(b_.value, bound, rng);
}

Mat Linear::forward(const Mat& x, const SeqShape&) {
    x_ = x;
    return linear_forward(x, w_.value, b_.value);
}

Mat Linear::backward(const Mat& dy) {
    w_.grad.noalias() += x_.transpose() * dy;
    b_.grad += dy.colwise().sum();
    return dy * w_.value.transpose();
}

// ---------------------------------------------------------------- cells

Mat gru_cell(const Mat& x, const Mat& h_prev, const RecurrentWeights& w) {
    const Eigen::Index H = h_prev.cols();
    check_shape(w.wx.rows() == x.cols() && w.wx.cols() == 3 * H, "gru: Wx must be [in x 3H]");
    check_shape(w.u.rows() == H && w.u.cols() == 3 * H, "gru: U must be [H x 3H]");
    check_shape(w.b.cols() == 3 * H && w.b.rows() == 1, "gru: bias must be [1 x 3H]");
    check_shape(x.rows() == h_prev.rows(), "gru: batch of x and h differ");
    Mat xw = x * w.wx;
    xw.rowwise() += w.b.row(0);
    const Mat hu = h_prev * w.u.leftCols(2 * H);
    const Mat z = sigmoid_of(xw.leftCols(H) + hu.leftCols(H));
    const Mat r = sigmoid_of(xw.middleCols(H, H) + hu.rightCols(H));
    const Mat rh = r.cwiseProduct(h_prev);
    const Mat cand = tanh_of(xw.rightCols(H) + rh * w.u.rightCols(H));
    return (Mat::Ones(z.rows(), H) - z).cwiseProduct(h_prev) + z.cwiseProduct(cand);
}

std::pair<Mat, Mat> lstm_cell(const Mat& x, const Mat& h_prev, const Mat& c_prev, const RecurrentWeights& w) {
    const Eigen::Index H = h_prev.cols();
    check_shape(w.wx.rows() == x.cols() && w.wx.cols() == 4 * H, "lstm: Wx must be [in x 4H]");
    check_shape(w.u.rows() == H && w.u.cols() == 4 * H, "lstm: U must be [H x 4H]");
    check_shape(w.b.cols() == 4 * H && w.b.rows() == 1, "lstm: bias must be [1 x 4H]");
    check_shape(c_prev.rows() == h_prev.rows() && c_prev.cols() == H, "lstm: c_prev shape");
    Mat a = x * w.wx + h_prev * w.u;
    a.rowwise() += w.b.row(0);
    const Mat i = sigmoid_of(a.leftCols(H));
    const Mat f = sigmoid_of(a.middleCols(H, H));
    const Mat g = tanh_of(a.middleCols(2 * H, H));
    const Mat o = sigmoid_of(a.rightCols(H));
    Mat c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    Mat h = o.cwiseProduct(tanh_of(c));
    return {std::move(h), std::move(c)};
}

// ---------------------------------------------------------------- GRU layer

GruLayer::GruLayer(ParameterSet& params, const std::string& name, Eigen::Index in, Eigen::Index hidden,
                   Direction dir, Xoshiro256& rng)
    : wx_(params.add(name + ".wx", in, 3 * hidden)),
      u_(params.add(name + ".u", hidden, 3 * hidden)),
      b_(params.add(name + ".bias", 1, 3 * hidden)),
      hidden_(hidden),
      dir_(dir) {
    init_uniform(wx_.value, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    init_uniform(u_.value, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    init_uniform(b_.value, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
}

Mat GruLayer::forward(const Mat& x, const SeqShape& shape) {
    check_sequence(x, shape, wx_.value.rows(), "gru layer");
    shape_ = shape;
    x_ = x;
    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(shape.windows);
    const auto N = static_cast<Eigen::Index>(shape.rows());

    Mat xw = x * wx_.value;
    xw.rowwise() += b_.value.row(0);
    h_prev_.resize(N, H);
    z_.resize(N, H);
    r_.resize(N, H);
    cand_.resize(N, H);
    Mat out(N, H);
    Mat h = Mat::Zero(B, H);
    const auto u_zr = u_.value.leftCols(2 * H);
    const auto u_c = u_.value.rightCols(H);
    for (std::size_t s = 0; s < shape.steps; ++s) {
        const auto row = static_cast<Eigen::Index>(step_at(s, shape.steps, dir_)) * B;
        const auto xw_t = xw.middleRows(row, B);
        const Mat hu = h * u_zr;
        const Mat z = sigmoid_of(xw_t.leftCols(H) + hu.leftCols(H));
        const Mat r = sigmoid_of(xw_t.middleCols(H, H) + hu.rightCols(H));
        const Mat cand = tanh_of(xw_t.rightCols(H) + r.cwiseProduct(h) * u_c);
        h_prev_.middleRows(row, B) = h;
        z_.middleRows(row, B) = z;
        r_.middleRows(row, B) = r;
        cand_.middleRows(row, B) = cand;
        h = h + z.cwiseProduct(cand - h);
        out.middleRows(row, B) = h;
    }
    return out;
}

Mat GruLayer::infer(const Mat& x, const SeqShape& shape) {
    check_sequence(x, shape, wx_.value.rows(), "gru layer");
    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(shape.windows);
    Mat xw = x * wx_.value;
    xw.rowwise() += b_.value.row(0);
    Mat out(static_cast<Eigen::Index>(shape.rows()), H);
    Mat h = Mat::Zero(B, H);
    Mat hu(B, 2 * H);
    const auto u_zr = u_.value.leftCols(2 * H);
    const auto u_c = u_.value.rightCols(H);
    for (std::size_t s = 0; s < shape.steps; ++s) {
        const auto row = static_cast<Eigen::Index>(step_at(s, shape.steps, dir_)) * B;
        const auto xw_t = xw.middleRows(row, B);
        hu.noalias() = h * u_zr;
        const Mat zr = sigmoid_of(xw_t.leftCols(2 * H) + hu);
        const Mat cand = tanh_of(xw_t.rightCols(H) + zr.rightCols(H).cwiseProduct(h) * u_c);
        h += zr.leftCols(H).cwiseProduct(cand - h);
        out.middleRows(row, B) = h;
    }
    return out;
}

Mat GruLayer::backward(const Mat& dy) {
    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(shape_.windows);
    const auto N = static_cast<Eigen::Index>(shape_.rows());
    Mat dxw(N, 3 * H);
    Mat dh_carry = Mat::Zero(B, H);
    const auto u_zr = u_.value.leftCols(2 * H);
    const auto u_c = u_.value.rightCols(H);
    Mat dgate_zr(B, 2 * H);
    for (std::size_t s = shape_.steps; s-- > 0;) {
        const auto row = static_cast<Eigen::Index>(step_at(s, shape_.steps, dir_)) * B;
        const auto hp = h_prev_.middleRows(row, B);
        const auto z = z_.middleRows(row, B).array();
        const auto r = r_.middleRows(row, B).array();
        const auto cand = cand_.middleRows(row, B).array();

        const Mat dh = dy.middleRows(row, B) + dh_carry;
        const Mat dz = dh.array() * (cand - hp.array());
        const Mat da = (dh.array() * z * (1.0 - cand * cand)).matrix();
        Mat dhp = (dh.array() * (1.0 - z)).matrix();

        const Mat rh = (r * hp.array()).matrix();
        u_.grad.rightCols(H).noalias() += rh.transpose() * da;
        const Mat drh = da * u_c.transpose();
        dhp.array() += drh.array() * r;
        const Mat dr = drh.array() * hp.array();

        dgate_zr.leftCols(H) = (dz.array() * z * (1.0 - z)).matrix();
        dgate_zr.rightCols(H) = (dr.array() * r * (1.0 - r)).matrix();
        u_.grad.leftCols(2 * H).noalias() += hp.transpose() * dgate_zr;
        dhp.noalias() += dgate_zr * u_zr.transpose();

        dxw.middleRows(row, B).leftCols(2 * H) = dgate_zr;
        dxw.middleRows(row, B).rightCols(H) = da;
        dh_carry = dhp;
    }
    wx_.grad.noalias() += x_.transpose() * dxw;
    b_.grad += dxw.colwise().sum();
    return dxw * wx_.value.transpose();
}

// ---------------------------------------------------------------- LSTM layer

LstmLayer::LstmLayer(ParameterSet& params, const std::string& name, Eigen::Index in, Eigen::Index hidden,
                     Direction dir, Xoshiro256& rng)
    : wx_(params.add(name + ".wx", in, 4 * hidden)),
      u_(params.add(name + ".u", hidden, 4 * hidden)),
      b_(params.add(name + ".bias", 1, 4 * hidden)),
      hidden_(hidden),
      dir_(dir) {
    init_uniform(wx_.value, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    init_uniform(u_.value, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    init_uniform(b_.value, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
}

Mat LstmLayer::forward(const Mat& x, const SeqShape& shape) {
    check_sequence(x, shape, wx_.value.rows(), "lstm layer");
    shape_ = shape;
    x_ = x;
    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(shape.windows);
    const auto N = static_cast<Eigen::Index>(shape.rows());

    Mat xw = x * wx_.value;
    xw.rowwise() += b_.value.row(0);
    h_prev_.resize(N, H);
    c_prev_.resize(N, H);
    gates_.resize(N, 4 * H);
    tanh_c_.resize(N, H);
    Mat out(N, H);
    Mat h = Mat::Zero(B, H);
    Mat c = Mat::Zero(B, H);
    for (std::size_t s = 0; s < shape.steps; ++s) {
        const auto row = static_cast<Eigen::Index>(step_at(s, shape.steps, dir_)) * B;
        Mat a = xw.middleRows(row, B);
        a.noalias() += h * u_.value;
        Mat g(B, 4 * H);
        g.leftCols(2 * H) = sigmoid_of(a.leftCols(2 * H));
        g.middleCols(2 * H, H) = tanh_of(a.middleCols(2 * H, H));
        g.rightCols(H) = sigmoid_of(a.rightCols(H));
        h_prev_.middleRows(row, B) = h;
        c_prev_.middleRows(row, B) = c;
        gates_.middleRows(row, B) = g;
        c = g.middleCols(H, H).cwiseProduct(c) + g.leftCols(H).cwiseProduct(g.middleCols(2 * H, H));
        const Mat tc = tanh_of(c);
        tanh_c_.middleRows(row, B) = tc;
        h = g.rightCols(H).cwiseProduct(tc);
        out.middleRows(row, B) = h;
    }
    return out;
}

Mat LstmLayer::infer(const Mat& x, const SeqShape& shape) {
    check_sequence(x, shape, wx_.value.rows(), "lstm layer");
    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(shape.windows);
    Mat xw = x * wx_.value;
    xw.rowwise() += b_.value.row(0);
    Mat out(static_cast<Eigen::Index>(shape.rows()), H);
    Mat h = Mat::Zero(B, H);
    Mat c = Mat::Zero(B, H);
    Mat a(B, 4 * H);
    for (std::size_t s = 0; s < shape.steps; ++s) {
        const auto row = static_cast<Eigen::Index>(step_at(s, shape.steps, dir_)) * B;
        a = xw.middleRows(row, B);
        a.noalias() += h * u_.value;
        const Mat fi = sigmoid_of(a.leftCols(2 * H));
        c = fi.rightCols(H).cwiseProduct(c) + fi.leftCols(H).cwiseProduct(tanh_of(a.middleCols(2 * H, H)));
        h = sigmoid_of(a.rightCols(H)).cwiseProduct(tanh_of(c));
        out.middleRows(row, B) = h;
    }
    return out;
}

Mat LstmLayer::backward(const Mat& dy) {
    const Eigen::Index H = hidden_;
    const auto B = static_cast<Eigen::Index>(shape_.windows);
    const auto N = static_cast<Eigen::Index>(shape_.rows());
    Mat dxw(N, 4 * H);
    Mat dh_carry = Mat::Zero(B, H);
    Mat dc_carry = Mat::Zero(B, H);
    Mat da(B, 4 * H);
    for (std::size_t s = shape_.steps; s-- > 0;) {
        const auto row = static_cast<Eigen::Index>(step_at(s, shape_.steps, dir_)) * B;
        const auto g = gates_.middleRows(row, B);
        const auto i = g.leftCols(H).array();
        const auto f = g.middleCols(H, H).array();
        const auto cg = g.middleCols(2 * H, H).array();
        const auto o = g.rightCols(H).array();
        const auto tc = tanh_c_.middleRows(row, B).array();
        const auto cp = c_prev_.middleRows(row, B).array();

        const Mat dh = dy.middleRows(row, B) + dh_carry;
        const Mat dc = (dc_carry.array() + dh.array() * o * (1.0 - tc * tc)).matrix();
        da.leftCols(H) = (dc.array() * cg * i * (1.0 - i)).matrix();
        da.middleCols(H, H) = (dc.array() * cp * f * (1.0 - f)).matrix();
        da.middleCols(2 * H, H) = (dc.array() * i * (1.0 - cg * cg)).matrix();
        da.rightCols(H) = (dh.array() * tc * o * (1.0 - o)).matrix();

        u_.grad.noalias() += h_prev_.middleRows(row, B).transpose() * da;
        dh_carry.noalias() = da * u_.value.transpose();
        dc_carry = (dc.array() * f).matrix();
        dxw.middleRows(row, B) = da;
    }
    wx_.grad.noalias() += x_.transpose() * dxw;
    b_.grad += dxw.colwise().sum();
    return dxw * wx_.value.transpose();
}

// ---------------------------------------------------------------- bidirectional

Bidirectional::Bidirectional(ParameterSet& params, const std::string& name, CellType cell, Eigen::Index in,
                             Eigen::Index hidden, Xoshiro256& rng)
    : hidden_(hidden) {
    if (cell == CellType::gru) {
        fwd_ = std::make_unique<GruLayer>(params, name + ".fwd", in, hidden, Direction::forward, rng);
        bwd_ = std::make_unique<GruLayer>(params, name + ".bwd", in, hidden, Direction::backward, rng);
    } else {
        fwd_ = std::make_unique<LstmLayer>(params, name + ".fwd", in, hidden, Direction::forward, rng);
        bwd_ = std::make_unique<LstmLayer>(params, name + ".bwd", in, hidden, Direction::backward, rng);
    }
}

Bidirectional::Bidirectional(std::unique_ptr<Module> fwd, std::unique_ptr<Module> bwd, Eigen::Index hidden)
    : fwd_(std::move(fwd)), bwd_(std::move(bwd)), hidden_(hidden) {}

Mat bidirectional_forward(const Mat& x, const SeqShape& shape, Module& fwd, Module& bwd) {
    if (shape.steps == 0) fail(ErrorCategory::argument, "bidirectional: empty sequence");
    const Mat a = fwd.forward(x, shape);
    const Mat b = bwd.forward(x, shape);
    Mat out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

Mat Bidirectional::forward(const Mat& x, const SeqShape& shape) { return bidirectional_forward(x, shape, *fwd_, *bwd_); }

Mat Bidirectional::infer(const Mat& x, const SeqShape& shape) {
    if (shape.steps == 0) fail(ErrorCategory::argument, "bidirectional: empty sequence");
    Mat out(x.rows(), 2 * hidden_);
    out.leftCols(hidden_) = fwd_->infer(x, shape);
    out.rightCols(hidden_) = bwd_->infer(x, shape);
    return out;
}

Mat Bidirectional::backward(const Mat& dy) {
    check_shape(dy.cols() == 2 * hidden_, "bidirectional: gradient width");
    Mat dx = fwd_->backward(dy.leftCols(hidden_));
    dx += bwd_->backward(dy.rightCols(hidden_));
    return dx;
}

// ---------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(ParameterSet& params, const std::string& name, Eigen::Index dim, double eps)
    : gamma_(params.add(name + ".gamma", 1, dim)), beta_(params.add(name + ".beta", 1, dim)), eps_(eps) {
    gamma_.value.setOnes();
}

Mat LayerNorm::forward(const Mat& x, const SeqShape&) {
    check_shape(x.cols() == gamma_.value.cols(), "layernorm width");
    const auto d = static_cast<double>(x.cols());
    xhat_.resize(x.rows(), x.cols());
    inv_std_.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mu = x.row(i).sum() / d;
        const double var = (x.row(i).array() - mu).square().sum() / d;
        inv_std_(i) = 1.0 / std::sqrt(var + eps_);
        xhat_.row(i) = (x.row(i).array() - mu) * inv_std_(i);
    }
    Mat y = xhat_.array().rowwise() * gamma_.value.row(0).array();
    y.rowwise() += beta_.value.row(0);
    return y;
}

Mat LayerNorm::backward(const Mat& dy) {
    gamma_.grad += (dy.array() * xhat_.array()).colwise().sum().matrix();
    beta_.grad += dy.colwise().sum();
    const Mat dxhat = dy.array().rowwise() * gamma_.value.row(0).array();
    const auto d = static_cast<double>(dy.cols());
    Mat dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double m1 = dxhat.row(i).sum() / d;
        const double m2 = dxhat.row(i).dot(xhat_.row(i)) / d;
        dx.row(i) = inv_std_(i) * (dxhat.row(i).array() - m1 - xhat_.row(i).array() * m2);
    }
    return dx;
}

// ---------------------------------------------------------------- attention

MultiHeadAttention::MultiHeadAttention(ParameterSet& params, const std::string& name, Eigen::Index dim, int heads,
                                       Xoshiro256& rng)
    : wq_(params.add(name + ".wq", dim, dim)),
      bq_(params.add(name + ".bq", 1, dim)),
      wk_(params.add(name + ".wk", dim, dim)),
      bk_(params.add(name + ".bk", 1, dim)),
      wv_(params.add(name + ".wv", dim, dim)),
      bv_(params.add(name + ".bv", 1, dim)),
      wo_(params.add(name + ".wo", dim, dim)),
      bo_(params.add(name + ".bo", 1, dim)),
      dim_(dim),
      heads_(heads) {
    if (heads <= 0 || dim % heads != 0)
        fail(ErrorCategory::argument, "attention: dimension " + std::to_string(dim) + " not divisible by " +
                                          std::to_string(heads) + " heads");
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Param* p : {&wq_, &bq_, &wk_, &bk_, &wv_, &bv_, &wo_, &bo_}) init_uniform(p->value, bound, rng);
}

namespace {

// Attention core shared by the module and the free function. Fills concat
// ([T*B x d]) and, when probs is given, the per-(window, head) weights.
void attend(const Mat& q, const Mat& k, const Mat& v, const SeqShape& shape, int heads, Mat& concat,
            std::vector<Mat>* probs) {
    const Eigen::Index d = q.cols();
    const Eigen::Index dh = d / heads;
    const auto T = static_cast<Eigen::Index>(shape.steps);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    concat.resize(q.rows(), d);
    if (probs) probs->assign(shape.windows * static_cast<std::size_t>(heads), Mat());
    Mat scores(T, T);
    for (std::size_t b = 0; b < shape.windows; ++b) {
        const auto qb = window_rows(q, b, shape);
        const auto kb = window_rows(k, b, shape);
        const auto vb = window_rows(v, b, shape);
        auto ob = window_rows(concat, b, shape);
        for (int h = 0; h < heads; ++h) {
            scores.noalias() = qb.middleCols(h * dh, dh) * kb.middleCols(h * dh, dh).transpose() * scale;
            for (Eigen::Index i = 0; i < T; ++i) {
                double mx = -std::numeric_limits<double>::infinity();
                for (Eigen::Index j = 0; j < T; ++j)
                    if (shape.real(b, static_cast<std::size_t>(j))) mx = std::max(mx, scores(i, j));
                double sum = 0.0;
                for (Eigen::Index j = 0; j < T; ++j) {
                    const double e = shape.real(b, static_cast<std::size_t>(j)) ? std::exp(scores(i, j) - mx) : 0.0;
                    scores(i, j) = e;
                    sum += e;
                }
                scores.row(i) /= sum;
            }
            ob.middleCols(h * dh, dh).noalias() = scores * vb.middleCols(h * dh, dh);
            if (probs) (*probs)[b * static_cast<std::size_t>(heads) + static_cast<std::size_t>(h)] = scores;
        }
    }
}

}  // namespace

Mat multi_head_attention(const Mat& x, const SeqShape& shape, const AttentionWeights& w, int heads) {
    const Eigen::Index d = x.cols();
    if (heads <= 0 || d % heads != 0)
        fail(ErrorCategory::argument, "attention: dimension " + std::to_string(d) + " not divisible by " +
                                          std::to_string(heads) + " heads");
    check_shape(static_cast<std::size_t>(x.rows()) == shape.rows(), "attention rows != T*B");
    Mat concat;
    attend(linear_forward(x, w.wq, w.bq), linear_forward(x, w.wk, w.bk), linear_forward(x, w.wv, w.bv), shape,
           heads, concat, nullptr);
    return linear_forward(concat, w.wo, w.bo);
}

Mat MultiHeadAttention::forward(const Mat& x, const SeqShape& shape) {
    check_shape(x.cols() == dim_, "attention width");
    check_shape(static_cast<std::size_t>(x.rows()) == shape.rows(), "attention rows != T*B");
    shape_ = shape;
    x_ = x;
    q_ = linear_forward(x, wq_.value, bq_.value);
    k_ = linear_forward(x, wk_.value, bk_.value);
    v_ = linear_forward(x, wv_.value, bv_.value);
    attend(q_, k_, v_, shape, heads_, concat_, &probs_);
    return linear_forward(concat_, wo_.value, bo_.value);
}

Mat MultiHeadAttention::backward(const Mat& dy) {
    wo_.grad.noalias() += concat_.transpose() * dy;
    bo_.grad += dy.colwise().sum();
    const Mat dconcat = dy * wo_.value.transpose();

    const Eigen::Index dh = dim_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Mat dq = Mat::Zero(q_.rows(), dim_), dk = Mat::Zero(k_.rows(), dim_), dv = Mat::Zero(v_.rows(), dim_);
    for (std::size_t b = 0; b < shape_.windows; ++b) {
        const auto qb = window_rows(q_, b, shape_);
        const auto kb = window_rows(k_, b, shape_);
        const auto vb = window_rows(v_, b, shape_);
        const auto dob = window_rows(dconcat, b, shape_);
        auto dqb = window_rows(dq, b, shape_);
        auto dkb = window_rows(dk, b, shape_);
        auto dvb = window_rows(dv, b, shape_);
        for (int h = 0; h < heads_; ++h) {
            const Mat& p = probs_[b * static_cast<std::size_t>(heads_) + static_cast<std::size_t>(h)];
            const auto doh = dob.middleCols(h * dh, dh);
            const Mat dp = doh * vb.middleCols(h * dh, dh).transpose();
            dvb.middleCols(h * dh, dh).noalias() += p.transpose() * doh;
            const Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
            const Mat ds = (p.array() * (dp.array().colwise() - row_dot.array())).matrix() * scale;
            dqb.middleCols(h * dh, dh).noalias() += ds * kb.middleCols(h * dh, dh);
            dkb.middleCols(h * dh, dh).noalias() += ds.transpose() * qb.middleCols(h * dh, dh);
        }
    }
    wq_.grad.noalias() += x_.transpose() * dq;
    wk_.grad.noalias() += x_.transpose() * dk;
    wv_.grad.noalias() += x_.transpose() * dv;
    bq_.grad += dq.colwise().sum();
    bk_.grad += dk.colwise().sum();
    bv_.grad += dv.colwise().sum();
    Mat dx = dq * wq_.value.transpose();
    dx.noalias() += dk * wk_.value.transpose();
    dx.noalias() += dv * wv_.value.transpose();
    return dx;
}

// ---------------------------------------------------------------- feed-forward

FeedForward::FeedForward(ParameterSet& params, const std::string& name, Eigen::Index dim, Eigen::Index inner,
                         Xoshiro256& rng)
    : in_(params, name + ".in", dim, inner, rng), out_(params, name + ".out", inner, dim, rng) {}

Mat FeedForward::forward(const Mat& x, const SeqShape& shape) {
    pre_ = in_.forward(x, shape);
    return out_.forward(pre_.unaryExpr([](double v) { return gelu(v); }), shape);
}

Mat FeedForward::backward(const Mat& dy) {
    const Mat dact = out_.backward(dy);
    return in_.backward(dact.cwiseProduct(pre_.unaryExpr([](double v) { return gelu_grad(v); })));
}

// ---------------------------------------------------------------- positional encoding

double PositionalEncoding::value(std::size_t position, Eigen::Index channel, Eigen::Index dim) {
    const double pair = static_cast<double>(channel / 2 * 2);
    const double angle = static_cast<double>(position) / std::pow(10000.0, pair / static_cast<double>(dim));
    return channel % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

Mat PositionalEncoding::forward(const Mat& x, const SeqShape& shape) {
    check_shape(x.cols() == dim_, "positional encoding width");
    Mat y = x;
    const auto B = static_cast<Eigen::Index>(shape.windows);
    for (std::size_t t = 0; t < shape.steps; ++t) {
        RowVec pe(dim_);
        for (Eigen::Index c = 0; c < dim_; ++c) pe(c) = value(t, c, dim_);
        y.middleRows(static_cast<Eigen::Index>(t) * B, B).rowwise() += pe;
    }
    return y;
}

// ---------------------------------------------------------------- encoder block

TransformerBlock::TransformerBlock(ParameterSet& params, const std::string& name, Eigen::Index dim, int heads,
                                   Xoshiro256& rng)
    : ln1_(params, name + ".ln1", dim),
      attn_(params, name + ".attn", dim, heads, rng),
      ln2_(params, name + ".ln2", dim),
      ffn_(params, name + ".ffn", dim, 4 * dim, rng) {}

Mat TransformerBlock::forward(const Mat& x, const SeqShape& shape) {
    const Mat y = x + attn_.forward(ln1_.forward(x, shape), shape);
    return y + ffn_.forward(ln2_.forward(y, shape), shape);
}

Mat TransformerBlock::backward(const Mat& dz) {
    const Mat dy = dz + ln2_.backward(ffn_.backward(dz));
    return dy + ln1_.backward(attn_.backward(dy));
}

}  // namespace dcs::nn
