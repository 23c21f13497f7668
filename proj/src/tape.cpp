// SPDX-License-Identifier: Apache-2.0
#include "flowcast/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowcast/error.hpp"

namespace flowcast {

void Tape::reset() {
  nodes_.clear();
  arena_.clear();
  garena_.clear();
  list_pool_.clear();
  aux_.clear();
  aux_mask_.clear();
}

Tape::Id Tape::push(Op op, int size) {
  Node n;
  n.op = op;
  n.size = size;
  n.off = static_cast<int>(arena_.size());
  arena_.resize(arena_.size() + static_cast<std::size_t>(size), 0.0);
  nodes_.push_back(n);
  return static_cast<Id>(nodes_.size()) - 1;
}

double* Tape::val(int node) { return arena_.data() + nodes_[node].off; }
const double* Tape::val(int node) const { return arena_.data() + nodes_[node].off; }
double* Tape::grad(int node) { return garena_.data() + nodes_[node].off; }

std::span<const double> Tape::value(Id id) const {
  return {val(id), static_cast<std::size_t>(nodes_[id].size)};
}

std::vector<double> Tape::value_copy(Id id) const {
  return {val(id), val(id) + nodes_[id].size};
}

Tape::Id Tape::input(std::span<const double> v) {
  const Id id = push(Op::kInput, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), val(id));
  return id;
}

Tape::Id Tape::zeros(int n) { return push(Op::kZeros, n); }

Tape::Id Tape::affine(int w_idx, int b_idx, Id x) {
  const Tensor& W = (*store_)[w_idx].value;
  const Tensor& b = (*store_)[b_idx].value;
  if (size_of(x) != W.cols())
    throw Error("affine: input size " + std::to_string(size_of(x)) + " != " +
                std::to_string(W.cols()) + " for " + (*store_)[w_idx].name);
  if (b.rows() != W.rows()) throw Error("affine: bias/weight shape mismatch");
  const Id id = push(Op::kAffine, W.rows());
  nodes_[id].a = x;
  nodes_[id].w = w_idx;
  nodes_[id].bias = b_idx;
  const double* xv = val(x);
  double* y = val(id);
  for (int r = 0; r < W.rows(); ++r) {
    double acc = b.data[r];
    for (int c = 0; c < W.cols(); ++c) acc += W.at(r, c) * xv[c];
    y[r] = acc;
  }
  return id;
}

Tape::Id Tape::matvec(int w_idx, Id x) {
  const Tensor& W = (*store_)[w_idx].value;
  if (size_of(x) != W.cols())
    throw Error("matvec: input size " + std::to_string(size_of(x)) + " != " +
                std::to_string(W.cols()) + " for " + (*store_)[w_idx].name);
  const Id id = push(Op::kMatvec, W.rows());
  nodes_[id].a = x;
  nodes_[id].w = w_idx;
  const double* xv = val(x);
  double* y = val(id);
  for (int r = 0; r < W.rows(); ++r) {
    double acc = 0.0;
    for (int c = 0; c < W.cols(); ++c) acc += W.at(r, c) * xv[c];
    y[r] = acc;
  }
  return id;
}

Tape::Id Tape::sigmoid(Id x) {
  const Id id = push(Op::kSigmoid, size_of(x));
  nodes_[id].a = x;
  const double* xv = val(x);
  double* y = val(id);
  for (int i = 0; i < size_of(x); ++i) y[i] = sigmoid_scalar(xv[i]);
  return id;
}

Tape::Id Tape::tanh_op(Id x) {
  const Id id = push(Op::kTanh, size_of(x));
  nodes_[id].a = x;
  const double* xv = val(x);
  double* y = val(id);
  for (int i = 0; i < size_of(x); ++i) y[i] = std::tanh(xv[i]);
  return id;
}

Tape::Id Tape::relu(Id x) {
  const Id id = push(Op::kRelu, size_of(x));
  nodes_[id].a = x;
  const double* xv = val(x);
  double* y = val(id);
  for (int i = 0; i < size_of(x); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return id;
}

Tape::Id Tape::softplus(Id x) {
  const Id id = push(Op::kSoftplus, size_of(x));
  nodes_[id].a = x;
  const double* xv = val(x);
  double* y = val(id);
  for (int i = 0; i < size_of(x); ++i) y[i] = softplus_scalar(xv[i]);
  return id;
}

Tape::Id Tape::add(Id a, Id b) {
  if (size_of(a) != size_of(b)) throw Error("add: size mismatch");
  const Id id = push(Op::kAdd, size_of(a));
  nodes_[id].a = a;
  nodes_[id].b = b;
  const double* av = val(a);
  const double* bv = val(b);
  double* y = val(id);
  for (int i = 0; i < size_of(a); ++i) y[i] = av[i] + bv[i];
  return id;
}

Tape::Id Tape::mul(Id a, Id b) {
  if (size_of(a) != size_of(b)) throw Error("mul: size mismatch");
  const Id id = push(Op::kMul, size_of(a));
  nodes_[id].a = a;
  nodes_[id].b = b;
  const double* av = val(a);
  const double* bv = val(b);
  double* y = val(id);
  for (int i = 0; i < size_of(a); ++i) y[i] = av[i] * bv[i];
  return id;
}

Tape::Id Tape::one_minus(Id a) {
  const Id id = push(Op::kOneMinus, size_of(a));
  nodes_[id].a = a;
  const double* av = val(a);
  double* y = val(id);
  for (int i = 0; i < size_of(a); ++i) y[i] = 1.0 - av[i];
  return id;
}

Tape::Id Tape::concat(Id a, Id b) {
  const int sa = size_of(a);
  const int sb = size_of(b);
  const Id id = push(Op::kConcat, sa + sb);
  nodes_[id].a = a;
  nodes_[id].b = b;
  const double* av = val(a);
  const double* bv = val(b);
  double* y = val(id);
  std::copy(av, av + sa, y);
  std::copy(bv, bv + sb, y + sa);
  return id;
}

Tape::Id Tape::sum(const std::vector<Id>& xs) {
  if (xs.empty()) throw Error("sum: empty operand list");
  const int n = size_of(xs[0]);
  for (Id x : xs)
    if (size_of(x) != n) throw Error("sum: size mismatch");
  const Id id = push(Op::kSum, n);
  nodes_[id].list_start = static_cast<int>(list_pool_.size());
  nodes_[id].list_count = static_cast<int>(xs.size());
  list_pool_.insert(list_pool_.end(), xs.begin(), xs.end());
  double* y = val(id);
  std::fill(y, y + n, 0.0);
  for (Id x : xs) {
    const double* xv = val(x);
    for (int i = 0; i < n; ++i) y[i] += xv[i];
  }
  return id;
}

Tape::Id Tape::scale(Id a, double c) {
  const Id id = push(Op::kScale, size_of(a));
  nodes_[id].a = a;
  nodes_[id].c = c;
  const double* av = val(a);
  double* y = val(id);
  for (int i = 0; i < size_of(a); ++i) y[i] = c * av[i];
  return id;
}

Tape::Id Tape::mape_sum(Id pred, std::span<const double> target,
                        std::span<const unsigned char> mask) {
  const int n = size_of(pred);
  if (static_cast<int>(target.size()) != n || static_cast<int>(mask.size()) != n)
    throw Error("mape_sum: size mismatch");
  for (int i = 0; i < n; ++i)
    if (mask[i] && target[i] == 0.0) throw Error("mape_sum: zero target");
  const Id id = push(Op::kMapeSum, 1);
  nodes_[id].a = pred;
  nodes_[id].aux_start = static_cast<int>(aux_.size());
  nodes_[id].list_count = n;  // operand element count
  aux_.insert(aux_.end(), target.begin(), target.end());
  aux_mask_.insert(aux_mask_.end(), mask.begin(), mask.end());
  const double* p = val(pred);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    acc += std::abs(p[i] - target[i]) / target[i];
  }
  val(id)[0] = acc;
  return id;
}

void Tape::backward(Id loss) {
  if (loss < 0 || loss >= static_cast<Id>(nodes_.size())) throw Error("backward: bad node id");
  if (nodes_[loss].size != 1) throw Error("backward: loss must be a scalar");
  garena_.assign(arena_.size(), 0.0);
  grad(loss)[0] = 1.0;
  for (Id i = loss; i >= 0; --i) {
    const Node& n = nodes_[i];
    const double* gy = grad(i);
    switch (n.op) {
      case Op::kInput:
      case Op::kZeros:
        break;
      case Op::kAffine:
      case Op::kMatvec: {
        const Tensor& W = (*store_)[n.w].value;
        Tensor& gW = (*store_)[n.w].grad;
        const double* x = val(n.a);
        double* gx = grad(n.a);
        double* gb = n.op == Op::kAffine ? (*store_)[n.bias].grad.data.data() : nullptr;
        for (int r = 0; r < W.rows(); ++r) {
          const double gr = gy[r];
          if (gr == 0.0) continue;
          if (gb) gb[r] += gr;
          for (int c = 0; c < W.cols(); ++c) {
            gW.at(r, c) += gr * x[c];
            gx[c] += W.at(r, c) * gr;
          }
        }
        break;
      }
      case Op::kSigmoid: {
        const double* y = val(i);
        double* gx = grad(n.a);
        for (int k = 0; k < n.size; ++k) gx[k] += gy[k] * y[k] * (1.0 - y[k]);
        break;
      }
      case Op::kTanh: {
        const double* y = val(i);
        double* gx = grad(n.a);
        for (int k = 0; k < n.size; ++k) gx[k] += gy[k] * (1.0 - y[k] * y[k]);
        break;
      }
      case Op::kRelu: {
        const double* x = val(n.a);
        double* gx = grad(n.a);
        for (int k = 0; k < n.size; ++k)
          if (x[k] > 0.0) gx[k] += gy[k];
        break;
      }
      case Op::kSoftplus: {
        const double* x = val(n.a);
        double* gx = grad(n.a);
        for (int k = 0; k < n.size; ++k) gx[k] += gy[k] * sigmoid_scalar(x[k]);
        break;
      }
      case Op::kAdd: {
        double* ga = grad(n.a);
        double* gb2 = grad(n.b);
        for (int k = 0; k < n.size; ++k) {
          ga[k] += gy[k];
          gb2[k] += gy[k];
        }
        break;
      }
      case Op::kMul: {
        const double* av = val(n.a);
        const double* bv = val(n.b);
        double* ga = grad(n.a);
        double* gb2 = grad(n.b);
        for (int k = 0; k < n.size; ++k) {
          ga[k] += gy[k] * bv[k];
          gb2[k] += gy[k] * av[k];
        }
        break;
      }
      case Op::kOneMinus: {
        double* ga = grad(n.a);
        for (int k = 0; k < n.size; ++k) ga[k] -= gy[k];
        break;
      }
      case Op::kConcat: {
        double* ga = grad(n.a);
        double* gb2 = grad(n.b);
        const int sa = nodes_[n.a].size;
        for (int k = 0; k < sa; ++k) ga[k] += gy[k];
        for (int k = 0; k < n.size - sa; ++k) gb2[k] += gy[sa + k];
        break;
      }
      case Op::kSum: {
        for (int j = 0; j < n.list_count; ++j) {
          double* gx = grad(list_pool_[n.list_start + j]);
          for (int k = 0; k < n.size; ++k) gx[k] += gy[k];
        }
        break;
      }
      case Op::kScale: {
        double* ga = grad(n.a);
        for (int k = 0; k < n.size; ++k) ga[k] += n.c * gy[k];
        break;
      }
      case Op::kMapeSum: {
        const double g0 = gy[0];
        if (g0 == 0.0) break;
        const double* p = val(n.a);
        double* gp = grad(n.a);
        for (int k = 0; k < n.list_count; ++k) {
          if (!aux_mask_[n.aux_start + k]) continue;
          const double t = aux_[n.aux_start + k];
          const double d = p[k] - t;
          const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          gp[k] += g0 * s / t;
        }
        break;
      }
    }
  }
}

Tape::Id Tape::mlp(const MlpParams& m, Id x) {
  Id h = x;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    h = affine(m.weights[i], m.biases[i], h);
    const bool last = (i + 1 == m.weights.size());
    if (!last)
      h = relu(h);
    else if (m.softplus_output)
      h = softplus(h);
  }
  return h;
}

Tape::Id Tape::gru(const GruParams& g, Id x, Id h) {
  if (size_of(h) != g.hidden_dim) throw Error("gru: bad hidden size");
  const Id z = sigmoid(add(affine(g.W_z, g.b_z, x), matvec(g.U_z, h)));
  const Id r = sigmoid(add(affine(g.W_r, g.b_r, x), matvec(g.U_r, h)));
  const Id cand = tanh_op(add(affine(g.W_h, g.b_h, x), matvec(g.U_h, mul(r, h))));
  return add(mul(one_minus(z), h), mul(z, cand));
}

}  // namespace flowcast
