#pragma once

#include <span>
#include <vector>

#include "owarank/matrix.hpp"
#include "owarank/rng.hpp"

namespace owarank {

// Per-item scoring network: a plain MLP applied independently to each
// item's feature row, rectifier hidden activations, linear scalar output.
struct MlpParams {
  std::vector<Matrix> weights;              // layer l: out_l x in_l
  std::vector<std::vector<double>> biases;  // layer l: out_l

  // dims = {input, hidden..., 1}; He-style uniform fan-in init, seeded.
  static MlpParams make(const std::vector<int>& dims, Rng& rng);

  // Default architecture d -> h -> h/2 -> h/4 -> 1. hidden == 0 picks
  // h = min(256, next power of two >= input_dim).
  static std::vector<int> default_dims(int input_dim, int hidden = 0);

  int input_dim() const;
  std::size_t layer_count() const { return weights.size(); }
  void validate() const;
};

// Scores for every row of `features` (n x input_dim).
std::vector<double> mlp_forward(const MlpParams& params, const Matrix& features);

struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static MlpGradients zeros_like(const MlpParams& params);
  void add(const MlpGradients& other);
  void scale(double factor);
};

// Exact reverse-mode gradients of sum_i d_scores[i] * score_i(params)
// with respect to every parameter.
MlpGradients mlp_backward(const MlpParams& params, const Matrix& features,
                          std::span<const double> d_scores);

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
  long step = 0;

  static AdamState zeros_like(const MlpParams& params);
};

// Standard Adam update with bias correction; deterministic.
void adam_step(MlpParams& params, const MlpGradients& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace owarank
