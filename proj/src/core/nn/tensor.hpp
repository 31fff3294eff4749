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
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/common.hpp"

namespace dcs::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// A sequence activation is a [T*B x d] matrix in time-major order: row
// t*B + b holds position t of window b.
struct SeqShape {
    std::size_t steps = 0;    // T
    std::size_t windows = 0;  // B
    // Optional [B x T] window-major mask (1 = real row); used by attention.
    const std::vector<std::uint8_t>* mask = nullptr;

    std::size_t rows() const { return steps * windows; }
    bool real(std::size_t b, std::size_t t) const { return mask == nullptr || (*mask)[b * steps + t] != 0; }
};

struct Param {
    std::string name;
    Mat value;
    Mat grad;
};

/// Named parameters with same-shape gradient buffers. Addresses are stable
/// for the lifetime of the set.
class ParameterSet {
public:
    Param& add(std::string name, Eigen::Index rows, Eigen::Index cols);

    std::deque<Param>& all() { return params_; }
    const std::deque<Param>& all() const { return params_; }
    Param* find(const std::string& name);
    const Param* find(const std::string& name) const;

    void zero_grad();
    std::size_t scalar_count() const;
    bool all_finite() const;

private:
    std::deque<Param> params_;
};

inline void check_shape(bool ok, const std::string& what) {
    if (!ok) fail(ErrorCategory::argument, "shape mismatch: " + what);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace dcs::nn
