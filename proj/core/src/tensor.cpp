#include "moss/tensor.hpp"

#include <cmath>

#include "moss/errors.hpp"

namespace moss {

std::string shape_to_string(const std::vector<int>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("non-positive dimension in shape " + shape_to_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> s, std::vector<T> values, bool rg)
    : shape(std::move(s)), data(std::move(values)), requires_grad(rg) {
  const std::size_t n = shape_product(shape);
  if (data.empty()) {
    data.assign(n, T(0));
  } else if (data.size() != n) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_to_string(shape));
  }
}

template <typename T>
void Tensor<T>::check_finite(std::string_view what) const {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw NumericError("non-finite value in " + std::string(what) + " at flat index " +
                         std::to_string(i));
    }
  }
}

template struct Tensor<float>;
template struct Tensor<double>;

}  // namespace moss
