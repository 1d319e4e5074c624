#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "moss/corpus.hpp"
#include "moss/kb.hpp"
#include "moss/net.hpp"
#include "moss/random.hpp"
#include "moss/trainer.hpp"
#include "moss/vocab.hpp"

namespace moss::testing {

// Vocabulary of 12: the reserved tokens plus "a", "b", "c".
inline Vocab micro_vocab() {
  auto t = Vocab().tokens();
  t.insert(t.end(), {"a", "b", "c"});
  return Vocab::from_tokens(t);
}

inline KnowledgeBase micro_kb() {
  KnowledgeBase kb;
  kb.informable = {"x"};
  kb.entities = {{{"name", "e1"}, {"x", "b"}}, {{"name", "e2"}, {"x", "c"}}};
  return kb;
}

inline DialogTurn micro_turn(const char* user, const char* m, const char* s, const char* a, const char* r) {
  DialogTurn t;
  t.user = tokenize(user);
  t.m = tokenize(m);
  t.s = tokenize(s);
  t.a = tokenize(a);
  t.resp = tokenize(r);
  return t;
}

// One fully annotated turn; "b" is an informable value so k_t is non-trivial.
inline Dialog micro_dialog() {
  Dialog d;
  d.dialog_id = "micro";
  d.turns.push_back(micro_turn("a b c", "a b", "b <sep_req> c", "c a", "a b c"));
  return d;
}

inline FrameworkConfig micro_config(const std::string& instance = "all", std::uint64_t seed = 1) {
  FrameworkConfig c = FrameworkConfig::instance(instance);
  c.d_emb = 4;
  c.d_hid = 4;
  c.vocab_size = 12;
  c.dropout = 0.0;
  c.seed = seed;
  c.max_len = {6, 6, 6, 6};
  return c;
}

// Replaces every parameter value with uniform(-scale, scale) draws so that
// gradients are far from the near-linear regime of the default init.
template <typename T>
void randomize(ParameterStore<T>& store, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  for (auto& [name, p] : store)
    for (auto& v : p.value.data) v = static_cast<T>(uniform(rng, -scale, scale));
}

struct GradCheck {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst = 0;
  std::string worst_name;
};

// Central differences of `loss` against analytic gradients already stored
// in `store`. Relative error uses a 1e-6 floor in the denominator.
template <typename T>
GradCheck finite_difference(ParameterStore<T>& store, const std::function<double()>& loss, double eps, double tol) {
  GradCheck r;
  for (auto& [name, p] : store) {
    for (std::size_t i = 0; i < p.value.data.size(); ++i) {
      const T keep = p.value.data[i];
      p.value.data[i] = keep + static_cast<T>(eps);
      const double up = loss();
      p.value.data[i] = keep - static_cast<T>(eps);
      const double down = loss();
      p.value.data[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = static_cast<double>(p.grad[i]);
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      ++r.checked;
      if (rel > tol) ++r.failed;
      if (rel > r.worst) {
        r.worst = rel;
        r.worst_name = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

// Full-network gradient check of the teacher-forced dialog loss.
inline GradCheck network_grad_check(const FrameworkConfig& cfg, const Dialog& dialog, std::uint64_t seed, double tol = 1e-3) {
  MossNet<double> net(cfg, micro_vocab(), micro_kb());
  randomize(net.params(), seed);
  auto loss = [&] {
    Tape<double> tape;
    RunContext ctx;
    return dialog_loss(net, tape, dialog, ctx).total.item();
  };
  {
    Tape<double> tape;
    RunContext ctx;
    auto dl = dialog_loss(net, tape, dialog, ctx);
    net.params().zero_grad();
    tape.backward(dl.total);
    tape.accumulate_param_grads(net.params());
  }
  return finite_difference(net.params(), loss, 1e-4, tol);
}

}  // namespace moss::testing
