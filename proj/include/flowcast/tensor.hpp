// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace flowcast {

// Dense row-major double tensor; rank 1 or 2 is all the model needs.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  static Tensor zeros(std::vector<int> shape);
  std::size_t numel() const;
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }
};

}  // namespace flowcast
