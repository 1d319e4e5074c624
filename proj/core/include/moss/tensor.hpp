#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace moss {

std::string shape_to_string(const std::vector<int>& shape);

// Dense row-major tensor. Only rank 1 and rank 2 are used by the network.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;
  bool requires_grad = false;

  Tensor() = default;
  // Zero-filled when `values` is empty; otherwise product(shape) must equal values.size().
  explicit Tensor(std::vector<int> shape, std::vector<T> values = {}, bool requires_grad = false);

  std::size_t size() const { return data.size(); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  // Throws NumericError naming `what` on the first NaN/Inf entry.
  void check_finite(std::string_view what) const;
};

std::size_t shape_product(const std::vector<int>& shape);

extern template struct Tensor<float>;
extern template struct Tensor<double>;

}  // namespace moss
