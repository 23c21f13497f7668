// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "flowcast/tensor.hpp"

namespace flowcast {

// Named parameter tensors with matching gradient storage. Indices into the
// store are stable once created; iteration order is creation order, which
// fixes the deterministic layout used by Adam and by checkpoints.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
  };

  int add(const std::string& name, std::vector<int> shape);
  Entry& operator[](int idx) { return entries_[idx]; }
  const Entry& operator[](int idx) const { return entries_[idx]; }
  int size() const { return static_cast<int>(entries_.size()); }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

// One MLP: affine layers with ReLU between them. `softplus_output` selects the
// output nonlinearity used by the readout; encoders use a linear output.
struct MlpParams {
  std::vector<int> sizes;      // e.g. {in, hidden, hidden, out}
  std::vector<int> weights;    // ParamStore indices, one per layer ({out,in})
  std::vector<int> biases;     // ParamStore indices, one per layer ({out})
  bool softplus_output = false;
};

// One GRU cell: update/reset/candidate gates.
struct GruParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int W_z = -1, U_z = -1, b_z = -1;
  int W_r = -1, U_r = -1, b_r = -1;
  int W_h = -1, U_h = -1, b_h = -1;
};

MlpParams make_mlp(ParamStore& store, const std::string& name, const std::vector<int>& sizes,
                   bool softplus_output);
GruParams make_gru(ParamStore& store, const std::string& name, int input_dim, int hidden_dim);

// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases; every
// rank-1 tensor in the store is a bias. Deterministic in seed.
void init_params(ParamStore& store, std::uint64_t seed);

// Plain (non-recorded) evaluations, used directly and as test references.
std::vector<double> mlp_eval(const MlpParams& m, const ParamStore& store,
                             std::span<const double> x);
std::vector<double> gru_eval(const GruParams& g, const ParamStore& store,
                             std::span<const double> x, std::span<const double> h);

double sigmoid_scalar(double x);
double softplus_scalar(double x);

// Z-score statistics for the flow features [avg_load, packet_rate].
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std;  // population std; zero-variance features get 1

  double apply(int feature, double x) const { return (x - mean[feature]) / std[feature]; }
};

// Fits per-feature population statistics over rows of samples.
Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows);

// Textbook Adam with bias correction over every scalar in a ParamStore.
struct AdamState {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  void init(const ParamStore& store);
  void update(ParamStore& store, double lr);  // applies store gradients
};

}  // namespace flowcast
