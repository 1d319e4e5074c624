#pragma once

#include <random>
#include <span>
#include <vector>

#include "moss/tape.hpp"

// Differentiable primitives. Vectors are [n x 1] nodes, matrices are
// row-major [rows x cols]. Every op checks shapes and throws DimensionError
// with both shapes on mismatch.
namespace moss::ops {

template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);
template <typename T> Var<T> scale(Var<T> a, T factor);
template <typename T> Var<T> sigmoid(Var<T> a);
template <typename T> Var<T> tanh(Var<T> a);

// W[r x c] * x[c]
template <typename T> Var<T> matvec(Var<T> w, Var<T> x);
// W x + b
template <typename T> Var<T> linear(Var<T> w, Var<T> x, Var<T> b);
// W x + U h + b, fused for the GRU gates.
template <typename T> Var<T> linear2(Var<T> w, Var<T> x, Var<T> u, Var<T> h, Var<T> b);
// M[n x d]^T * w[n] -> [d], i.e. the w-weighted sum of the rows of M.
template <typename T> Var<T> matvec_t(Var<T> m, Var<T> w);
// A[n x d] * W[r x d]^T -> [n x r]
template <typename T> Var<T> matmul_nt(Var<T> a, Var<T> w);

template <typename T> Var<T> concat(std::span<const Var<T>> parts);
template <typename T> Var<T> concat(std::initializer_list<Var<T>> parts);
// Equal-length vectors stacked as the rows of a matrix.
template <typename T> Var<T> stack_rows(std::span<const Var<T>> rows);
// Row i of E as a vector (embedding lookup).
template <typename T> Var<T> row(Var<T> e, int i);

// s_i = v . tanh(q + K_i) for q[r], K[n x r], v[r].
template <typename T> Var<T> additive_scores(Var<T> q, Var<T> keys, Var<T> v);
template <typename T> Var<T> softmax(Var<T> a);

template <typename T> Var<T> sum(Var<T> a);
// Sum of scalar nodes.
template <typename T> Var<T> add_scalars(std::span<const Var<T>> xs);

// Inverted dropout; identity when !training or rate == 0.
template <typename T> Var<T> dropout(Var<T> a, double rate, bool training, std::mt19937_64& rng);

// Joint-softmax negative log likelihood over [gen_logits ; copy_scores].
// The probability of the target is the sum of the generation entry
// `gen_target` (skipped when < 0) and the copy entries in `copy_targets`.
// `copy_scores` may be an invalid Var when nothing can be copied.
template <typename T>
Var<T> mixture_nll(Var<T> gen_logits, Var<T> copy_scores, int gen_target, std::span<const int> copy_targets);

// -log softmax(logits)[target]; IndexError when target is out of range.
template <typename T> Var<T> softmax_nll(Var<T> logits, int target);

}  // namespace moss::ops
