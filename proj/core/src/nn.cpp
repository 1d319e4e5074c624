#include "moss/nn.hpp"

#include "moss/errors.hpp"

namespace moss {

template <typename T>
void register_gru(ParameterStore<T>& store, const std::string& prefix, int d_in, int d_hid, double init_range) {
  for (const char* gate : {"z", "r", "h"}) {
    store.add(prefix + ".W_" + gate, {d_hid, d_in}, Init::uniform, init_range);
    store.add(prefix + ".U_" + gate, {d_hid, d_hid}, Init::uniform, init_range);
    store.add(prefix + ".b_" + gate, {d_hid}, Init::zeros);
  }
}

template <typename T>
GruCell<T> bind_gru(Tape<T>& tape, const ParameterStore<T>& store, const std::string& prefix) {
  auto p = [&](const char* n) { return tape.param(store.get(prefix + "." + n)); };
  return GruCell<T>{p("W_z"), p("U_z"), p("b_z"), p("W_r"), p("U_r"), p("b_r"), p("W_h"), p("U_h"), p("b_h")};
}

template <typename T>
Var<T> gru_cell(const GruCell<T>& c, Var<T> x, Var<T> h) {
  if (x.cols() != 1 || x.rows() != c.input_dim()) {
    throw DimensionError("gru_cell: input [" + std::to_string(x.rows()) + ", " + std::to_string(x.cols()) +
                         "] does not match W [" + std::to_string(c.hidden_dim()) + ", " + std::to_string(c.input_dim()) + "]");
  }
  if (h.cols() != 1 || h.rows() != c.hidden_dim()) {
    throw DimensionError("gru_cell: hidden [" + std::to_string(h.rows()) + ", " + std::to_string(h.cols()) +
                         "] does not match U [" + std::to_string(c.hidden_dim()) + ", " + std::to_string(c.hidden_dim()) + "]");
  }
  Var<T> z = ops::sigmoid(ops::linear2(c.W_z, x, c.U_z, h, c.b_z));
  Var<T> r = ops::sigmoid(ops::linear2(c.W_r, x, c.U_r, h, c.b_r));
  Var<T> cand = ops::tanh(ops::linear2(c.W_h, x, c.U_h, ops::mul(r, h), c.b_h));
  // (1 - z) * cand + z * h == cand + z * (h - cand)
  return ops::add(cand, ops::mul(z, ops::sub(h, cand)));
}

template <typename T>
void register_attention(ParameterStore<T>& store, const std::string& prefix, int d_query, int d_memory,
                        double init_range) {
  store.add(prefix + ".W_q", {d_query, d_query}, Init::uniform, init_range);
  store.add(prefix + ".W_m", {d_query, d_memory}, Init::uniform, init_range);
  store.add(prefix + ".v", {d_query}, Init::uniform, init_range);
}

template <typename T>
Attention<T> bind_attention(Tape<T>& tape, const ParameterStore<T>& store, const std::string& prefix) {
  return Attention<T>{tape.param(store.get(prefix + ".W_q")), tape.param(store.get(prefix + ".W_m")),
                      tape.param(store.get(prefix + ".v"))};
}

template <typename T>
AttentionResult<T> additive_attention(const Attention<T>& attn, Var<T> query, Var<T> memory, Var<T> keys) {
  if (!memory.valid() || memory.rows() == 0) throw ContractError("additive_attention: empty memory");
  if (!keys.valid()) keys = ops::matmul_nt(memory, attn.W_m);
  Var<T> scores = ops::additive_scores(ops::matvec(attn.W_q, query), keys, attn.v);
  Var<T> weights = ops::softmax(scores);
  return {ops::matvec_t(memory, weights), weights};
}

#define MOSS_INSTANTIATE_NN(T)                                                                    \
  template void register_gru(ParameterStore<T>&, const std::string&, int, int, double);                   \
  template GruCell<T> bind_gru(Tape<T>&, const ParameterStore<T>&, const std::string&);          \
  template Var<T> gru_cell(const GruCell<T>&, Var<T>, Var<T>);                                    \
  template void register_attention(ParameterStore<T>&, const std::string&, int, int, double);             \
  template Attention<T> bind_attention(Tape<T>&, const ParameterStore<T>&, const std::string&);  \
  template AttentionResult<T> additive_attention(const Attention<T>&, Var<T>, Var<T>, Var<T>);

MOSS_INSTANTIATE_NN(float)
MOSS_INSTANTIATE_NN(double)

#undef MOSS_INSTANTIATE_NN

}  // namespace moss
