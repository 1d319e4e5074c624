#include "moss/optim.hpp"

#include <cmath>

#include "moss/errors.hpp"

namespace moss {
namespace {

template <typename T>
void check_grads(const ParameterStore<T>& store) {
  for (const auto& [name, p] : store) {
    for (T g : p.grad) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in parameter " + name);
    }
  }
}

}  // namespace

template <typename T>
void Adam<T>::step(ParameterStore<T>& store, double lr) {
  check_grads(store);
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (auto& [name, p] : store) {
    auto& [m, v] = moments_[name];
    if (m.empty()) {
      m.assign(p.grad.size(), 0.0);
      v.assign(p.grad.size(), 0.0);
    }
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      const double g = static_cast<double>(p.grad[i]);
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value.data[i] = static_cast<T>(static_cast<double>(p.value.data[i]) - lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      p.grad[i] = T(0);
    }
  }
}

template <typename T>
void sgd_step(ParameterStore<T>& store, double lr) {
  check_grads(store);
  for (auto& [name, p] : store) {
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      p.value.data[i] = static_cast<T>(static_cast<double>(p.value.data[i]) - lr * static_cast<double>(p.grad[i]));
      p.grad[i] = T(0);
    }
  }
}

template <typename T>
double clip_grad_norm(ParameterStore<T>& store, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : store)
    for (T g : p.grad) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto& [name, p] : store)
      for (T& g : p.grad) g *= factor;
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template void sgd_step(ParameterStore<float>&, double);
template void sgd_step(ParameterStore<double>&, double);
template double clip_grad_norm(ParameterStore<float>&, double);
template double clip_grad_norm(ParameterStore<double>&, double);

}  // namespace moss
