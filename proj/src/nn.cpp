// SPDX-License-Identifier: Apache-2.0
#include "flowcast/nn.hpp"

#include <algorithm>
#include <cmath>

#include "flowcast/error.hpp"

namespace flowcast {

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(t.numel(), 0.0);
  return t;
}

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return shape.empty() ? 0 : n;
}

int ParamStore::add(const std::string& name, std::vector<int> shape) {
  Entry e;
  e.name = name;
  e.value = Tensor::zeros(shape);
  e.grad = Tensor::zeros(std::move(shape));
  entries_.push_back(std::move(e));
  return static_cast<int>(entries_.size()) - 1;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_)
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

MlpParams make_mlp(ParamStore& store, const std::string& name, const std::vector<int>& sizes,
                   bool softplus_output) {
  if (sizes.size() < 2) throw ConfigError("MLP needs at least input and output sizes");
  MlpParams m;
  m.sizes = sizes;
  m.softplus_output = softplus_output;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const std::string layer = name + "." + std::to_string(i);
    m.weights.push_back(store.add(layer + ".W", {sizes[i + 1], sizes[i]}));
    m.biases.push_back(store.add(layer + ".b", {sizes[i + 1]}));
  }
  return m;
}

GruParams make_gru(ParamStore& store, const std::string& name, int input_dim, int hidden_dim) {
  GruParams g;
  g.input_dim = input_dim;
  g.hidden_dim = hidden_dim;
  g.W_z = store.add(name + ".W_z", {hidden_dim, input_dim});
  g.U_z = store.add(name + ".U_z", {hidden_dim, hidden_dim});
  g.b_z = store.add(name + ".b_z", {hidden_dim});
  g.W_r = store.add(name + ".W_r", {hidden_dim, input_dim});
  g.U_r = store.add(name + ".U_r", {hidden_dim, hidden_dim});
  g.b_r = store.add(name + ".b_r", {hidden_dim});
  g.W_h = store.add(name + ".W_h", {hidden_dim, input_dim});
  g.U_h = store.add(name + ".U_h", {hidden_dim, hidden_dim});
  g.b_h = store.add(name + ".b_h", {hidden_dim});
  return g;
}

void init_params(ParamStore& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < store.size(); ++i) {
    auto& e = store[i];
    if (e.value.shape.size() == 1) {
      std::fill(e.value.data.begin(), e.value.data.end(), 0.0);  // biases
      continue;
    }
    const double limit = std::sqrt(6.0 / (e.value.rows() + e.value.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : e.value.data) w = dist(rng);
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}

double softplus_scalar(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

namespace {

std::vector<double> affine_eval(const ParamStore& store, int w_idx, int b_idx,
                                std::span<const double> x) {
  const Tensor& W = store[w_idx].value;
  const Tensor& b = store[b_idx].value;
  if (static_cast<int>(x.size()) != W.cols())
    throw Error("affine: input size " + std::to_string(x.size()) + " != " +
                std::to_string(W.cols()));
  std::vector<double> y(W.rows());
  for (int r = 0; r < W.rows(); ++r) {
    double acc = b.data[r];
    for (int c = 0; c < W.cols(); ++c) acc += W.at(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

}  // namespace

std::vector<double> mlp_eval(const MlpParams& m, const ParamStore& store,
                             std::span<const double> x) {
  std::vector<double> h(x.begin(), x.end());
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    h = affine_eval(store, m.weights[i], m.biases[i], h);
    const bool last = (i + 1 == m.weights.size());
    if (!last)
      for (double& v : h) v = v > 0.0 ? v : 0.0;
    else if (m.softplus_output)
      for (double& v : h) v = softplus_scalar(v);
  }
  return h;
}

std::vector<double> gru_eval(const GruParams& g, const ParamStore& store,
                             std::span<const double> x, std::span<const double> h) {
  if (static_cast<int>(h.size()) != g.hidden_dim) throw Error("gru: bad hidden size");
  std::vector<double> z = affine_eval(store, g.W_z, g.b_z, x);
  std::vector<double> r = affine_eval(store, g.W_r, g.b_r, x);
  std::vector<double> cand = affine_eval(store, g.W_h, g.b_h, x);
  const Tensor& Uz = store[g.U_z].value;
  const Tensor& Ur = store[g.U_r].value;
  const Tensor& Uh = store[g.U_h].value;
  for (int i = 0; i < g.hidden_dim; ++i) {
    double az = 0.0, ar = 0.0;
    for (int j = 0; j < g.hidden_dim; ++j) {
      az += Uz.at(i, j) * h[j];
      ar += Ur.at(i, j) * h[j];
    }
    z[i] = sigmoid_scalar(z[i] + az);
    r[i] = sigmoid_scalar(r[i] + ar);
  }
  std::vector<double> out(g.hidden_dim);
  for (int i = 0; i < g.hidden_dim; ++i) {
    double ah = 0.0;
    for (int j = 0; j < g.hidden_dim; ++j) ah += Uh.at(i, j) * (r[j] * h[j]);
    const double cand_i = std::tanh(cand[i] + ah);
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand_i;
  }
  return out;
}

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("fit_normalizer: no samples");
  const std::size_t k = rows[0].size();
  Normalizer n;
  n.mean.assign(k, 0.0);
  n.std.assign(k, 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < k; ++i) n.mean[i] += r[i];
  for (std::size_t i = 0; i < k; ++i) n.mean[i] /= static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t i = 0; i < k; ++i) {
      const double d = r[i] - n.mean[i];
      n.std[i] += d * d;
    }
  for (std::size_t i = 0; i < k; ++i) {
    n.std[i] = std::sqrt(n.std[i] / static_cast<double>(rows.size()));
    if (n.std[i] == 0.0) n.std[i] = 1.0;  // constant feature guard
  }
  return n;
}

void AdamState::init(const ParamStore& store) {
  step = 0;
  m.assign(store.scalar_count(), 0.0);
  v.assign(store.scalar_count(), 0.0);
}

void AdamState::update(ParamStore& store, double lr) {
  step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  std::size_t k = 0;
  for (int i = 0; i < store.size(); ++i) {
    auto& e = store[i];
    for (std::size_t j = 0; j < e.value.data.size(); ++j, ++k) {
      const double g = e.grad.data[j];
      m[k] = beta1 * m[k] + (1.0 - beta1) * g;
      v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      e.value.data[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace flowcast
