#include "moss/params.hpp"

#include <random>

#include "moss/errors.hpp"
#include "moss/random.hpp"

namespace moss {

template <typename T>
Parameter<T>& ParameterStore<T>::add(std::string name, std::vector<int> shape, Init init, double init_range) {
  if (params_.find(name) != params_.end()) throw ContractError("duplicate parameter name: " + name);
  Parameter<T> p;
  p.name = name;
  p.value = Tensor<T>(std::move(shape));
  p.value.requires_grad = true;
  p.grad.assign(p.value.size(), T(0));
  p.init = init;
  p.init_range = init_range;
  return params_.emplace(std::move(name), std::move(p)).first->second;
}

template <typename T>
Parameter<T>& ParameterStore<T>::get(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter: " + std::string(name));
  return it->second;
}

template <typename T>
const Parameter<T>& ParameterStore<T>::get(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter: " + std::string(name));
  return it->second;
}

template <typename T>
void ParameterStore<T>::initialize() {
  std::mt19937_64 rng(seed_);
  for (auto& [name, p] : params_) {
    for (auto& x : p.value.data) {
      x = p.init == Init::zeros ? T(0) : static_cast<T>(uniform(rng, -p.init_range, p.init_range));
    }
  }
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& [name, p] : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
}

template <typename T>
std::vector<std::string> ParameterStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

template <typename T>
std::size_t ParameterStore<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

template class ParameterStore<float>;
template class ParameterStore<double>;

}  // namespace moss
