#include "moss/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "moss/errors.hpp"
#include "moss/random.hpp"

namespace moss::ops {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
Eigen::Map<const RowMat<T>> cmat(const Tape<T>& tape, int id) {
  const auto& n = tape.node(id);
  return {n.data(), n.rows, n.cols};
}

template <typename T>
Eigen::Map<const Vec<T>> cvec(const Tape<T>& tape, int id) {
  const auto& n = tape.node(id);
  return {n.data(), static_cast<Eigen::Index>(n.size())};
}

template <typename T>
Eigen::Map<RowMat<T>> gmat(Tape<T>& tape, int id, T* g) {
  const auto& n = tape.node(id);
  return {g, n.rows, n.cols};
}

template <typename T>
Eigen::Map<Vec<T>> gvec(Tape<T>& tape, int id, T* g) {
  return {g, static_cast<Eigen::Index>(tape.node(id).size())};
}

std::string dims(int r, int c) { return "[" + std::to_string(r) + ", " + std::to_string(c) + "]"; }

template <typename T>
std::string dims(Var<T> v) {
  return dims(v.rows(), v.cols());
}

template <typename T>
Tape<T>& same_tape(Var<T> a, Var<T> b, const char* op) {
  if (!a.valid() || !b.valid()) throw ContractError(std::string(op) + ": invalid operand");
  if (a.tape != b.tape) throw ContractError(std::string(op) + ": operands on different tapes");
  return *a.tape;
}

template <typename T>
void require_same_shape(Var<T> a, Var<T> b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + dims(a) + " vs " + dims(b));
  }
}

template <typename T>
void require_vector(Var<T> a, const char* op) {
  if (a.cols() != 1) throw DimensionError(std::string(op) + ": expected a vector, got " + dims(a));
}

template <typename T>
bool any_grad(std::initializer_list<Var<T>> vs) {
  for (const auto& v : vs)
    if (v.valid() && v.requires_grad()) return true;
  return false;
}

template <typename T>
std::vector<T> copy_values(Var<T> a) {
  auto s = a.value();
  return {s.begin(), s.end()};
}

// Shared implementation of elementwise binary ops.
enum class Binary { add, sub, mul };

template <typename T>
Var<T> binary(Var<T> a, Var<T> b, Binary kind, const char* name) {
  Tape<T>& tape = same_tape(a, b, name);
  require_same_shape(a, b, name);
  const std::size_t n = a.size();
  std::vector<T> out(n);
  auto av = a.value();
  auto bv = b.value();
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case Binary::add: out[i] = av[i] + bv[i]; break;
      case Binary::sub: out[i] = av[i] - bv[i]; break;
      case Binary::mul: out[i] = av[i] * bv[i]; break;
    }
  }
  const int ia = a.id, ib = b.id;
  return tape.push(a.rows(), a.cols(), std::move(out), any_grad({a, b}), [ia, ib, n, kind](Tape<T>& t, int self) {
    const T* g = t.node(self).grad.data();
    if (T* ga = t.grad_buffer(ia)) {
      if (kind == Binary::mul) {
        const T* bv = t.node(ib).data();
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
      }
    }
    if (T* gb = t.grad_buffer(ib)) {
      if (kind == Binary::mul) {
        const T* av = t.node(ia).data();
        for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
      } else if (kind == Binary::sub) {
        for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
      }
    }
  });
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  return binary(a, b, Binary::add, "add");
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return binary(a, b, Binary::sub, "sub");
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return binary(a, b, Binary::mul, "mul");
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  auto out = copy_values(a);
  for (auto& x : out) x *= factor;
  const int ia = a.id;
  const std::size_t n = out.size();
  return a.tape->push(a.rows(), a.cols(), std::move(out), a.requires_grad(), [ia, n, factor](Tape<T>& t, int self) {
    const T* g = t.node(self).grad.data();
    if (T* ga = t.grad_buffer(ia))
      for (std::size_t i = 0; i < n; ++i) ga[i] += factor * g[i];
  });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  auto out = copy_values(a);
  for (auto& x : out) x = T(1) / (T(1) + std::exp(-x));
  const int ia = a.id;
  const std::size_t n = out.size();
  return a.tape->push(a.rows(), a.cols(), std::move(out), a.requires_grad(), [ia, n](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    const T* g = node.grad.data();
    const T* y = node.data();
    if (T* ga = t.grad_buffer(ia))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var<T> tanh(Var<T> a) {
  auto out = copy_values(a);
  for (auto& x : out) x = std::tanh(x);
  const int ia = a.id;
  const std::size_t n = out.size();
  return a.tape->push(a.rows(), a.cols(), std::move(out), a.requires_grad(), [ia, n](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    const T* g = node.grad.data();
    const T* y = node.data();
    if (T* ga = t.grad_buffer(ia))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * (T(1) - y[i] * y[i]);
  });
}

template <typename T>
Var<T> matvec(Var<T> w, Var<T> x) {
  Tape<T>& tape = same_tape(w, x, "matvec");
  require_vector(x, "matvec");
  if (w.cols() != x.rows()) throw DimensionError("matvec: matrix " + dims(w) + " times vector " + dims(x));
  Vec<T> y = cmat(tape, w.id) * cvec(tape, x.id);
  std::vector<T> out(y.data(), y.data() + y.size());
  const int iw = w.id, ix = x.id;
  return tape.push(w.rows(), 1, std::move(out), any_grad({w, x}), [iw, ix](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    Eigen::Map<const Vec<T>> gv(node.grad.data(), node.rows);
    if (T* gw = t.grad_buffer(iw)) gmat(t, iw, gw).noalias() += gv * cvec(t, ix).transpose();
    if (T* gx = t.grad_buffer(ix)) gvec(t, ix, gx).noalias() += cmat(t, iw).transpose() * gv;
  });
}

template <typename T>
Var<T> linear(Var<T> w, Var<T> x, Var<T> b) {
  Tape<T>& tape = same_tape(w, x, "linear");
  same_tape(w, b, "linear");
  require_vector(x, "linear");
  require_vector(b, "linear");
  if (w.cols() != x.rows()) throw DimensionError("linear: matrix " + dims(w) + " times vector " + dims(x));
  if (b.rows() != w.rows()) throw DimensionError("linear: bias " + dims(b) + " for matrix " + dims(w));
  Vec<T> y = cmat(tape, w.id) * cvec(tape, x.id) + cvec(tape, b.id);
  std::vector<T> out(y.data(), y.data() + y.size());
  const int iw = w.id, ix = x.id, ib = b.id;
  return tape.push(w.rows(), 1, std::move(out), any_grad({w, x, b}), [iw, ix, ib](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    Eigen::Map<const Vec<T>> gv(node.grad.data(), node.rows);
    if (T* gw = t.grad_buffer(iw)) gmat(t, iw, gw).noalias() += gv * cvec(t, ix).transpose();
    if (T* gx = t.grad_buffer(ix)) gvec(t, ix, gx).noalias() += cmat(t, iw).transpose() * gv;
    if (T* gb = t.grad_buffer(ib)) gvec(t, ib, gb) += gv;
  });
}

template <typename T>
Var<T> linear2(Var<T> w, Var<T> x, Var<T> u, Var<T> h, Var<T> b) {
  Tape<T>& tape = same_tape(w, x, "linear2");
  same_tape(u, h, "linear2");
  same_tape(w, b, "linear2");
  require_vector(x, "linear2");
  require_vector(h, "linear2");
  if (w.cols() != x.rows()) throw DimensionError("linear2: matrix " + dims(w) + " times input " + dims(x));
  if (u.cols() != h.rows()) throw DimensionError("linear2: matrix " + dims(u) + " times hidden " + dims(h));
  if (u.rows() != w.rows() || b.rows() != w.rows() || b.cols() != 1) {
    throw DimensionError("linear2: output mismatch " + dims(w) + ", " + dims(u) + ", bias " + dims(b));
  }
  Vec<T> y = cmat(tape, w.id) * cvec(tape, x.id) + cmat(tape, u.id) * cvec(tape, h.id) + cvec(tape, b.id);
  std::vector<T> out(y.data(), y.data() + y.size());
  const int iw = w.id, ix = x.id, iu = u.id, ih = h.id, ib = b.id;
  return tape.push(w.rows(), 1, std::move(out), any_grad({w, x, u, h, b}),
                   [iw, ix, iu, ih, ib](Tape<T>& t, int self) {
                     const auto& node = t.node(self);
                     Eigen::Map<const Vec<T>> gv(node.grad.data(), node.rows);
                     if (T* gw = t.grad_buffer(iw)) gmat(t, iw, gw).noalias() += gv * cvec(t, ix).transpose();
                     if (T* gx = t.grad_buffer(ix)) gvec(t, ix, gx).noalias() += cmat(t, iw).transpose() * gv;
                     if (T* gu = t.grad_buffer(iu)) gmat(t, iu, gu).noalias() += gv * cvec(t, ih).transpose();
                     if (T* gh = t.grad_buffer(ih)) gvec(t, ih, gh).noalias() += cmat(t, iu).transpose() * gv;
                     if (T* gb = t.grad_buffer(ib)) gvec(t, ib, gb) += gv;
                   });
}

template <typename T>
Var<T> matvec_t(Var<T> m, Var<T> w) {
  Tape<T>& tape = same_tape(m, w, "matvec_t");
  require_vector(w, "matvec_t");
  if (m.rows() != w.rows()) throw DimensionError("matvec_t: matrix " + dims(m) + " with weights " + dims(w));
  Vec<T> y = cmat(tape, m.id).transpose() * cvec(tape, w.id);
  std::vector<T> out(y.data(), y.data() + y.size());
  const int im = m.id, iw = w.id;
  return tape.push(m.cols(), 1, std::move(out), any_grad({m, w}), [im, iw](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    Eigen::Map<const Vec<T>> gv(node.grad.data(), node.rows);
    if (T* gm = t.grad_buffer(im)) gmat(t, im, gm).noalias() += cvec(t, iw) * gv.transpose();
    if (T* gw = t.grad_buffer(iw)) gvec(t, iw, gw).noalias() += cmat(t, im) * gv;
  });
}

template <typename T>
Var<T> matmul_nt(Var<T> a, Var<T> w) {
  Tape<T>& tape = same_tape(a, w, "matmul_nt");
  if (a.cols() != w.cols()) throw DimensionError("matmul_nt: " + dims(a) + " times transpose of " + dims(w));
  RowMat<T> y = cmat(tape, a.id) * cmat(tape, w.id).transpose();
  std::vector<T> out(y.data(), y.data() + y.size());
  const int ia = a.id, iw = w.id;
  return tape.push(a.rows(), w.rows(), std::move(out), any_grad({a, w}), [ia, iw](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    Eigen::Map<const RowMat<T>> g(node.grad.data(), node.rows, node.cols);
    if (T* ga = t.grad_buffer(ia)) gmat(t, ia, ga).noalias() += g * cmat(t, iw);
    if (T* gw = t.grad_buffer(iw)) gmat(t, iw, gw).noalias() += g.transpose() * cmat(t, ia);
  });
}

template <typename T>
Var<T> concat(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ContractError("concat: no operands");
  Tape<T>& tape = *parts[0].tape;
  std::vector<T> out;
  std::vector<int> ids;
  std::vector<std::size_t> offsets;
  bool rg = false;
  for (const auto& p : parts) {
    if (p.tape != &tape) throw ContractError("concat: operands on different tapes");
    require_vector(p, "concat");
    offsets.push_back(out.size());
    ids.push_back(p.id);
    auto v = p.value();
    out.insert(out.end(), v.begin(), v.end());
    rg = rg || p.requires_grad();
  }
  const int n = static_cast<int>(out.size());
  return tape.push(n, 1, std::move(out), rg, [ids = std::move(ids), offsets = std::move(offsets)](Tape<T>& t, int self) {
    const T* g = t.node(self).grad.data();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (T* gp = t.grad_buffer(ids[k])) {
        const std::size_t len = t.node(ids[k]).size();
        for (std::size_t i = 0; i < len; ++i) gp[i] += g[offsets[k] + i];
      }
    }
  });
}

template <typename T>
Var<T> concat(std::initializer_list<Var<T>> parts) {
  return concat<T>(std::span<const Var<T>>(parts.begin(), parts.size()));
}

template <typename T>
Var<T> stack_rows(std::span<const Var<T>> rows) {
  if (rows.empty()) throw ContractError("stack_rows: no rows");
  Tape<T>& tape = *rows[0].tape;
  const int d = rows[0].rows();
  std::vector<T> out;
  out.reserve(rows.size() * static_cast<std::size_t>(d));
  std::vector<int> ids;
  bool rg = false;
  for (const auto& r : rows) {
    if (r.tape != &tape) throw ContractError("stack_rows: operands on different tapes");
    require_vector(r, "stack_rows");
    if (r.rows() != d) throw DimensionError("stack_rows: row " + dims(r) + " differs from " + dims(d, 1));
    auto v = r.value();
    out.insert(out.end(), v.begin(), v.end());
    ids.push_back(r.id);
    rg = rg || r.requires_grad();
  }
  const int n = static_cast<int>(rows.size());
  return tape.push(n, d, std::move(out), rg, [ids = std::move(ids), d](Tape<T>& t, int self) {
    const T* g = t.node(self).grad.data();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (T* gr = t.grad_buffer(ids[k]))
        for (int i = 0; i < d; ++i) gr[i] += g[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
    }
  });
}

template <typename T>
Var<T> row(Var<T> e, int i) {
  if (i < 0 || i >= e.rows()) {
    throw IndexError("row " + std::to_string(i) + " out of range for " + dims(e));
  }
  const int d = e.cols();
  auto v = e.value();
  std::vector<T> out(v.begin() + static_cast<std::ptrdiff_t>(i) * d, v.begin() + static_cast<std::ptrdiff_t>(i + 1) * d);
  const int ie = e.id;
  return e.tape->push(d, 1, std::move(out), e.requires_grad(), [ie, i, d](Tape<T>& t, int self) {
    const T* g = t.node(self).grad.data();
    if (T* ge = t.grad_buffer(ie))
      for (int k = 0; k < d; ++k) ge[static_cast<std::size_t>(i) * d + k] += g[k];
  });
}

template <typename T>
Var<T> additive_scores(Var<T> q, Var<T> keys, Var<T> v) {
  Tape<T>& tape = same_tape(q, keys, "additive_scores");
  same_tape(q, v, "additive_scores");
  require_vector(q, "additive_scores");
  require_vector(v, "additive_scores");
  const int n = keys.rows();
  const int r = keys.cols();
  if (q.rows() != r || v.rows() != r) {
    throw DimensionError("additive_scores: query " + dims(q) + ", keys " + dims(keys) + ", v " + dims(v));
  }
  auto act = std::make_shared<RowMat<T>>((cmat(tape, keys.id).rowwise() + cvec(tape, q.id).transpose()).array().tanh());
  Vec<T> s = (*act) * cvec(tape, v.id);
  std::vector<T> out(s.data(), s.data() + s.size());
  const int iq = q.id, ik = keys.id, iv = v.id;
  return tape.push(n, 1, std::move(out), any_grad({q, keys, v}), [iq, ik, iv, act, n](Tape<T>& t, int self) {
    Eigen::Map<const Vec<T>> g(t.node(self).grad.data(), n);
    auto vv = cvec(t, iv);
    // d pre_ij = g_i v_j (1 - act_ij^2)
    RowMat<T> dpre = (g * vv.transpose()).array() * (T(1) - act->array().square());
    if (T* gq = t.grad_buffer(iq)) gvec(t, iq, gq) += dpre.colwise().sum().transpose();
    if (T* gk = t.grad_buffer(ik)) gmat(t, ik, gk) += dpre;
    if (T* gv = t.grad_buffer(iv)) gvec(t, iv, gv).noalias() += act->transpose() * g;
  });
}

template <typename T>
Var<T> softmax(Var<T> a) {
  require_vector(a, "softmax");
  auto out = copy_values(a);
  const T m = *std::max_element(out.begin(), out.end());
  T z = 0;
  for (auto& x : out) {
    x = std::exp(x - m);
    z += x;
  }
  for (auto& x : out) x /= z;
  const int ia = a.id;
  const std::size_t n = out.size();
  return a.tape->push(a.rows(), 1, std::move(out), a.requires_grad(), [ia, n](Tape<T>& t, int self) {
    const auto& node = t.node(self);
    const T* g = node.grad.data();
    const T* p = node.data();
    T dotp = 0;
    for (std::size_t i = 0; i < n; ++i) dotp += g[i] * p[i];
    if (T* ga = t.grad_buffer(ia))
      for (std::size_t i = 0; i < n; ++i) ga[i] += p[i] * (g[i] - dotp);
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  T s = 0;
  for (T x : a.value()) s += x;
  const int ia = a.id;
  const std::size_t n = a.size();
  return a.tape->push(1, 1, std::vector<T>{s}, a.requires_grad(), [ia, n](Tape<T>& t, int self) {
    const T g = t.node(self).grad[0];
    if (T* ga = t.grad_buffer(ia))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g;
  });
}

template <typename T>
Var<T> add_scalars(std::span<const Var<T>> xs) {
  if (xs.empty()) throw ContractError("add_scalars: no operands");
  Tape<T>& tape = *xs[0].tape;
  T s = 0;
  std::vector<int> ids;
  bool rg = false;
  for (const auto& x : xs) {
    if (x.tape != &tape) throw ContractError("add_scalars: operands on different tapes");
    if (x.size() != 1) throw DimensionError("add_scalars: operand " + dims(x) + " is not a scalar");
    s += x.item();
    ids.push_back(x.id);
    rg = rg || x.requires_grad();
  }
  return tape.push(1, 1, std::vector<T>{s}, rg, [ids = std::move(ids)](Tape<T>& t, int self) {
    const T g = t.node(self).grad[0];
    for (int id : ids)
      if (T* gx = t.grad_buffer(id)) gx[0] += g;
  });
}

template <typename T>
Var<T> dropout(Var<T> a, double rate, bool training, std::mt19937_64& rng) {
  if (!training || rate <= 0.0) return a;
  if (rate >= 1.0) throw ContractError("dropout rate must be < 1, got " + std::to_string(rate));
  const std::size_t n = a.size();
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  auto mask = std::make_shared<std::vector<T>>(n);
  auto out = copy_values(a);
  for (std::size_t i = 0; i < n; ++i) {
    (*mask)[i] = bernoulli(rng, rate) ? T(0) : keep_scale;
    out[i] *= (*mask)[i];
  }
  const int ia = a.id;
  return a.tape->push(a.rows(), a.cols(), std::move(out), a.requires_grad(), [ia, n, mask](Tape<T>& t, int self) {
    const T* g = t.node(self).grad.data();
    if (T* ga = t.grad_buffer(ia))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * (*mask)[i];
  });
}

template <typename T>
Var<T> mixture_nll(Var<T> gen_logits, Var<T> copy_scores, int gen_target, std::span<const int> copy_targets) {
  require_vector(gen_logits, "mixture_nll");
  const int v = gen_logits.rows();
  const int n = copy_scores.valid() ? copy_scores.rows() : 0;
  if (copy_scores.valid()) {
    same_tape(gen_logits, copy_scores, "mixture_nll");
    require_vector(copy_scores, "mixture_nll");
  }
  if (gen_target >= v) {
    throw IndexError("target " + std::to_string(gen_target) + " out of range for " + std::to_string(v) + " logits");
  }
  for (int c : copy_targets) {
    if (c < 0 || c >= n) throw IndexError("copy target " + std::to_string(c) + " out of range for " + std::to_string(n) + " positions");
  }
  if (gen_target < 0 && copy_targets.empty()) throw ContractError("mixture_nll: target has no probability mass");

  auto lg = gen_logits.value();
  std::span<const T> cs;
  if (n > 0) cs = copy_scores.value();
  T m = *std::max_element(lg.begin(), lg.end());
  for (int i = 0; i < n; ++i) m = std::max(m, cs[static_cast<std::size_t>(i)]);
  T z = 0;
  for (T x : lg) z += std::exp(x - m);
  for (int i = 0; i < n; ++i) z += std::exp(cs[static_cast<std::size_t>(i)] - m);
  // The target mass gets its own shift so a far-below-max target cannot underflow to log(0).
  T ms = -std::numeric_limits<T>::infinity();
  if (gen_target >= 0) ms = lg[static_cast<std::size_t>(gen_target)];
  for (int c : copy_targets) ms = std::max(ms, cs[static_cast<std::size_t>(c)]);
  T sel = 0;
  if (gen_target >= 0) sel += std::exp(lg[static_cast<std::size_t>(gen_target)] - ms);
  for (int c : copy_targets) sel += std::exp(cs[static_cast<std::size_t>(c)] - ms);
  const T loss = (m + std::log(z)) - (ms + std::log(sel));

  const int ig = gen_logits.id;
  const int ic = copy_scores.valid() ? copy_scores.id : -1;
  std::vector<int> targets(copy_targets.begin(), copy_targets.end());
  const bool rg = gen_logits.requires_grad() || (copy_scores.valid() && copy_scores.requires_grad());
  return gen_logits.tape->push(1, 1, std::vector<T>{loss}, rg,
                               [ig, ic, v, n, m, ms, z, sel, gen_target, targets = std::move(targets)](Tape<T>& t, int self) {
                                 const T g = t.node(self).grad[0];
                                 // d loss / d z_j = softmax_j - [j selected] * exp(z_j - ms) / sel
                                 if (T* gg = t.grad_buffer(ig)) {
                                   const T* lg = t.node(ig).data();
                                   for (int j = 0; j < v; ++j) gg[j] += g * std::exp(lg[j] - m) / z;
                                   if (gen_target >= 0) gg[gen_target] -= g * std::exp(lg[gen_target] - ms) / sel;
                                 }
                                 if (ic >= 0) {
                                   if (T* gc = t.grad_buffer(ic)) {
                                     const T* cs = t.node(ic).data();
                                     for (int j = 0; j < n; ++j) gc[j] += g * std::exp(cs[j] - m) / z;
                                     for (int c : targets) gc[c] -= g * std::exp(cs[c] - ms) / sel;
                                   }
                                 }
                               });
}

template <typename T>
Var<T> softmax_nll(Var<T> logits, int target) {
  if (target < 0 || target >= logits.rows()) {
    throw IndexError("target " + std::to_string(target) + " out of range for " + std::to_string(logits.rows()) + " logits");
  }
  return mixture_nll(logits, Var<T>{}, target, {});
}

#define MOSS_INSTANTIATE_OPS(T)                                                                         \
  template Var<T> add(Var<T>, Var<T>);                                                                  \
  template Var<T> sub(Var<T>, Var<T>);                                                                  \
  template Var<T> mul(Var<T>, Var<T>);                                                                  \
  template Var<T> scale(Var<T>, T);                                                                     \
  template Var<T> sigmoid(Var<T>);                                                                      \
  template Var<T> tanh(Var<T>);                                                                         \
  template Var<T> matvec(Var<T>, Var<T>);                                                               \
  template Var<T> linear(Var<T>, Var<T>, Var<T>);                                                       \
  template Var<T> linear2(Var<T>, Var<T>, Var<T>, Var<T>, Var<T>);                                      \
  template Var<T> matvec_t(Var<T>, Var<T>);                                                             \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                                            \
  template Var<T> concat(std::span<const Var<T>>);                                                      \
  template Var<T> concat(std::initializer_list<Var<T>>);                                                \
  template Var<T> stack_rows(std::span<const Var<T>>);                                                  \
  template Var<T> row(Var<T>, int);                                                                     \
  template Var<T> additive_scores(Var<T>, Var<T>, Var<T>);                                              \
  template Var<T> softmax(Var<T>);                                                                      \
  template Var<T> sum(Var<T>);                                                                          \
  template Var<T> add_scalars(std::span<const Var<T>>);                                                 \
  template Var<T> dropout(Var<T>, double, bool, std::mt19937_64&);                                      \
  template Var<T> mixture_nll(Var<T>, Var<T>, int, std::span<const int>);                               \
  template Var<T> softmax_nll(Var<T>, int);

MOSS_INSTANTIATE_OPS(float)
MOSS_INSTANTIATE_OPS(double)

#undef MOSS_INSTANTIATE_OPS

}  // namespace moss::ops
