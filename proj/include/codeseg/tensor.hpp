/* Copyright 2026 The codeseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace codeseg {

// Dense row-major matrix of doubles. Vectors are stored as n x 1.
struct Tensor2 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::size_t size() const { return data.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  std::span<double> flat() { return data; }
  std::span<const double> flat() const { return data; }

  void zero();
  bool all_finite() const;
  bool same_shape(const Tensor2& other) const {
    return rows == other.rows && cols == other.cols;
  }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;
};

// A named parameter tensor as seen by optimizers, serializers and the
// gradient checker.
struct TensorRef {
  std::string name;
  Tensor2* tensor;
};

struct ConstTensorRef {
  std::string name;
  const Tensor2* tensor;
};

}  // namespace codeseg
