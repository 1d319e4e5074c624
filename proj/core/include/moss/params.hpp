#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "moss/tensor.hpp"

namespace moss {

enum class Init { uniform, zeros };

inline constexpr double kInitRange = 0.08;

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::vector<T> grad;
  Init init = Init::uniform;
  double init_range = kInitRange;  // half-width of the uniform draw
};

// Named trainable weights. Names are dotted paths ("encoder.gru_fwd.W_z");
// iteration is lexicographic by name, which fixes initialization order,
// checkpoint order and optimizer order.
template <typename T>
class ParameterStore {
 public:
  using Map = std::map<std::string, Parameter<T>, std::less<>>;

  explicit ParameterStore(std::uint64_t seed = 1) : seed_(seed) {}

  Parameter<T>& add(std::string name, std::vector<int> shape, Init init = Init::uniform, double init_range = kInitRange);

  Parameter<T>& get(std::string_view name);
  const Parameter<T>& get(std::string_view name) const;
  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }

  // uniform(-r, r) with each parameter's own r, zeros for biases, drawn in name order.
  void initialize();
  void zero_grad();

  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;
  std::uint64_t seed() const { return seed_; }

  typename Map::iterator begin() { return params_.begin(); }
  typename Map::iterator end() { return params_.end(); }
  typename Map::const_iterator begin() const { return params_.begin(); }
  typename Map::const_iterator end() const { return params_.end(); }

  // Same names and shapes, values converted to another precision.
  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out(seed_);
    for (const auto& [name, p] : params_) {
      auto& q = out.add(name, p.value.shape, p.init, p.init_range);
      for (std::size_t i = 0; i < p.value.data.size(); ++i) q.value.data[i] = static_cast<U>(p.value.data[i]);
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  Map params_;
};


extern template class ParameterStore<float>;
extern template class ParameterStore<double>;

}  // namespace moss
