// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "flowcast/nn.hpp"

namespace flowcast {

// Eager reverse-mode tape over double vectors. Every op computes its value
// immediately and records what backward() needs. Parameters enter only
// through affine/matvec, which accumulate into ParamStore gradients. Node
// values live in one arena that reset() reclaims without freeing, so a tape
// is cheap to reuse across training steps.
class Tape {
 public:
  using Id = int;

  explicit Tape(ParamStore* store) : store_(store) {}

  void reset();

  Id input(std::span<const double> v);      // leaf; no gradient flows to it
  Id zeros(int n);                          // constant zero leaf

  Id affine(int w_idx, int b_idx, Id x);    // W x + b
  Id matvec(int w_idx, Id x);               // W x
  Id sigmoid(Id x);
  Id tanh_op(Id x);
  Id relu(Id x);
  Id softplus(Id x);
  Id add(Id a, Id b);                       // elementwise
  Id mul(Id a, Id b);                       // elementwise
  Id one_minus(Id a);                       // 1 - a
  Id concat(Id a, Id b);
  Id sum(const std::vector<Id>& xs);        // elementwise sum, all same size
  Id scale(Id a, double c);
  // sum over unmasked i of |pred_i - target_i| / target_i  (scalar output)
  Id mape_sum(Id pred, std::span<const double> target, std::span<const unsigned char> mask);

  int size_of(Id id) const { return nodes_[id].size; }
  std::span<const double> value(Id id) const;
  std::vector<double> value_copy(Id id) const;

  // Reverse pass from a scalar loss; accumulates into ParamStore grads
  // (which the caller zeroes when starting a fresh accumulation).
  void backward(Id loss);

  // MLP/GRU compositions on the tape.
  Id mlp(const MlpParams& m, Id x);
  Id gru(const GruParams& g, Id x, Id h);

 private:
  enum class Op {
    kInput, kZeros, kAffine, kMatvec, kSigmoid, kTanh, kRelu, kSoftplus,
    kAdd, kMul, kOneMinus, kConcat, kSum, kScale, kMapeSum
  };
  struct Node {
    Op op;
    int size = 0;
    int off = 0;        // value/grad arena offset
    Id a = -1, b = -1;  // operand node ids
    int w = -1, bias = -1;  // ParamStore indices (affine/matvec)
    int list_start = 0, list_count = 0;  // sum operands
    int aux_start = 0;  // aux doubles (scale constant / mape targets+mask)
    double c = 0.0;
  };

  Id push(Op op, int size);
  double* val(int node);
  const double* val(int node) const;
  double* grad(int node);

  ParamStore* store_;
  std::vector<Node> nodes_;
  std::vector<double> arena_;   // values
  std::vector<double> garena_;  // gradients (zeroed lazily per backward)
  std::vector<Id> list_pool_;
  std::vector<double> aux_;
  std::vector<unsigned char> aux_mask_;
};

}  // namespace flowcast
