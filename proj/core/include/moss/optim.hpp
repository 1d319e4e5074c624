#pragma once

#include <map>
#include <string>
#include <vector>

#include "moss/params.hpp"

namespace moss {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments are keyed by parameter name.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Updates every parameter in place and clears gradients. Throws
  // TrainingError naming the first parameter with a non-finite gradient.
  void step(ParameterStore<T>& store, double lr);
  int steps() const { return t_; }

 private:
  AdamConfig cfg_;
  int t_ = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments_;
};

template <typename T>
void sgd_step(ParameterStore<T>& store, double lr);

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(ParameterStore<T>& store, double max_norm);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace moss
