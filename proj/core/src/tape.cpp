#include "moss/tape.hpp"

#include <algorithm>
#include <string>

#include "moss/errors.hpp"

namespace moss {

template <typename T>
Var<T> Tape<T>::constant(std::vector<T> values, int rows, int cols) {
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionError("constant of " + std::to_string(values.size()) + " values does not fit [" +
                         std::to_string(rows) + ", " + std::to_string(cols) + "]");
  }
  return push(rows, cols, std::move(values), false, nullptr);
}

template <typename T>
Var<T> Tape<T>::variable(std::vector<T> values, int rows, int cols) {
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionError("variable of " + std::to_string(values.size()) + " values does not fit [" +
                         std::to_string(rows) + ", " + std::to_string(cols) + "]");
  }
  return push(rows, cols, std::move(values), grad_enabled_, nullptr);
}

template <typename T>
Var<T> Tape<T>::param(const Parameter<T>& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var<T>{this, it->second};
  Node n;
  n.rows = p.value.rows();
  n.cols = p.value.cols();
  n.external = p.value.data.data();
  n.requires_grad = grad_enabled_;
  n.param = &p;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var<T>{this, id};
}

template <typename T>
Var<T> Tape<T>::push(int rows, int cols, std::vector<T> value, bool requires_grad, BackwardFn fn) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
T* Tape<T>::grad_buffer(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad.assign(n.size(), T(0));
  return n.grad.data();
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to a different tape");
  if (backward_done_) throw ContractError("backward called twice on one tape without clear()");
  if (loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got " + std::to_string(loss.size()) + " elements");
  }
  backward_done_ = true;
  T* g = grad_buffer(loss.id);
  if (!g) return;
  g[0] += T(1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
}

template <typename T>
void Tape<T>::accumulate_param_grads(ParameterStore<T>& store) const {
  for (const auto& [p, id] : param_nodes_) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty()) continue;
    auto& target = store.get(p->name).grad;
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += n.grad[i];
  }
}

template <typename T>
std::vector<T> Tape<T>::grad(Var<T> v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.grad.empty()) return std::vector<T>(n.size(), T(0));
  return n.grad;
}

template <typename T>
void Tape<T>::clear() {
  nodes_.clear();
  param_nodes_.clear();
  backward_done_ = false;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace moss
