#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "moss/params.hpp"

namespace moss {

template <typename T>
class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  std::span<const T> value() const;
  int rows() const;
  int cols() const;
  std::size_t size() const;
  T item() const;
  bool requires_grad() const;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so the node
// vector is already topologically sorted; backward walks it once in reverse.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  struct Node {
    int rows = 0;
    int cols = 1;
    std::vector<T> value;
    const T* external = nullptr;  // parameter leaves alias the store
    std::vector<T> grad;          // allocated on first touch
    bool requires_grad = false;
    BackwardFn backward;
    const Parameter<T>* param = nullptr;

    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    const T* data() const { return external ? external : value.data(); }
  };

  Tape() { nodes_.reserve(4096); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  void set_grad_enabled(bool on) { grad_enabled_ = on; }

  Var<T> constant(std::vector<T> values, int rows, int cols = 1);
  // Leaf that requires a gradient; used for inputs under test.
  Var<T> variable(std::vector<T> values, int rows, int cols = 1);
  // Leaf aliasing a parameter. Repeated calls return the same node.
  Var<T> param(const Parameter<T>& p);

  Var<T> push(int rows, int cols, std::vector<T> value, bool requires_grad, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws ContractError for a
  // non-scalar loss or a second call without clear().
  void backward(Var<T> loss);

  // Adds parameter-leaf gradients into the matching entries of `store`.
  void accumulate_param_grads(ParameterStore<T>& store) const;

  // Gradient accumulated at a node (zeros when the node was never reached).
  std::vector<T> grad(Var<T> v) const;

  // Gradient buffer of node `id`, allocated on demand; nullptr when the node
  // does not require a gradient.
  T* grad_buffer(int id);

  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, int> param_nodes_;
  bool grad_enabled_ = true;
  bool backward_done_ = false;
};

template <typename T>
std::span<const T> Var<T>::value() const {
  const auto& n = tape->node(id);
  return {n.data(), n.size()};
}

template <typename T>
int Var<T>::rows() const {
  return tape->node(id).rows;
}

template <typename T>
int Var<T>::cols() const {
  return tape->node(id).cols;
}

template <typename T>
std::size_t Var<T>::size() const {
  return tape->node(id).size();
}

template <typename T>
T Var<T>::item() const {
  return value()[0];
}

template <typename T>
bool Var<T>::requires_grad() const {
  return tape->node(id).requires_grad;
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace moss
