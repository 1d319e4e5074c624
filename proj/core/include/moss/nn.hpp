#pragma once

#include <string>

#include "moss/ops.hpp"
#include "moss/params.hpp"
#include "moss/tape.hpp"

namespace moss {

// Gate weights of a GRU cell bound to a tape:
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   h~ = tanh(W_h x + U_h (r * h) + b_h)
//   h' = (1 - z) * h~ + z * h
template <typename T>
struct GruCell {
  Var<T> W_z, U_z, b_z;
  Var<T> W_r, U_r, b_r;
  Var<T> W_h, U_h, b_h;

  int input_dim() const { return W_z.cols(); }
  int hidden_dim() const { return U_z.rows(); }
};

template <typename T>
void register_gru(ParameterStore<T>& store, const std::string& prefix, int d_in, int d_hid, double init_range = kInitRange);

template <typename T>
GruCell<T> bind_gru(Tape<T>& tape, const ParameterStore<T>& store, const std::string& prefix);

template <typename T>
Var<T> gru_cell(const GruCell<T>& cell, Var<T> x, Var<T> h_prev);

// Additive attention: score_i = v . tanh(W_q q + W_m m_i).
template <typename T>
struct Attention {
  Var<T> W_q, W_m, v;
};

template <typename T>
void register_attention(ParameterStore<T>& store, const std::string& prefix, int d_query, int d_memory,
                        double init_range = kInitRange);

template <typename T>
Attention<T> bind_attention(Tape<T>& tape, const ParameterStore<T>& store, const std::string& prefix);

template <typename T>
struct AttentionResult {
  Var<T> context;
  Var<T> weights;
};

// `memory` is [n x d]. `keys` may carry a precomputed memory * W_m^T so a
// decoder can reuse it across steps; pass an invalid Var to compute it here.
template <typename T>
AttentionResult<T> additive_attention(const Attention<T>& attn, Var<T> query, Var<T> memory, Var<T> keys = {});

}  // namespace moss
