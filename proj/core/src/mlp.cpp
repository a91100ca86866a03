#include "owarank/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace owarank {

namespace {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

MlpParams MlpParams::make(const std::vector<int>& dims, Rng& rng) {
  require(dims.size() >= 2, "MlpParams: need at least input and output dims");
  MlpParams params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    require(in >= 1 && out >= 1, "MlpParams: layer dims must be positive");
    Matrix w(out, in);
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(out, 0.0);
  }
  params.validate();
  return params;
}

std::vector<int> MlpParams::default_dims(int input_dim, int hidden) {
  require(input_dim >= 1, "MlpParams: input_dim must be >= 1");
  int h = hidden;
  if (h <= 0) {
    h = 1;
    while (h < input_dim) h *= 2;
    h = std::min(h, 256);
  }
  h = std::max(h, 4);
  return {input_dim, h, std::max(1, h / 2), std::max(1, h / 4), 1};
}

int MlpParams::input_dim() const {
  require(!weights.empty(), "MlpParams: empty network");
  return static_cast<int>(weights.front().cols());
}

void MlpParams::validate() const {
  require(!weights.empty() && weights.size() == biases.size(),
          "MlpParams: layer shape mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require(biases[l].size() == weights[l].rows(), "MlpParams: bias shape mismatch");
    if (l > 0) {
      require(weights[l].cols() == weights[l - 1].rows(),
              "MlpParams: layer dims do not chain");
    }
    for (double v : weights[l].data()) {
      require(std::isfinite(v), "MlpParams: non-finite weight");
    }
    for (double v : biases[l]) require(std::isfinite(v), "MlpParams: non-finite bias");
  }
  require(weights.back().rows() == 1, "MlpParams: output must be scalar");
}

std::vector<double> mlp_forward(const MlpParams& params, const Matrix& features) {
  require(static_cast<int>(features.cols()) == params.input_dim(),
          "mlp_forward: feature dimension mismatch");
  const std::size_t n = features.rows();
  const std::size_t layers = params.layer_count();
  std::vector<double> scores(n);
  std::vector<double> activation;
  std::vector<double> next;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    activation.assign(row.begin(), row.end());
    for (std::size_t l = 0; l < layers; ++l) {
      const Matrix& w = params.weights[l];
      next.assign(w.rows(), 0.0);
      for (std::size_t r = 0; r < w.rows(); ++r) {
        double z = params.biases[l][r];
        for (std::size_t c = 0; c < w.cols(); ++c) z += w(r, c) * activation[c];
        next[r] = (l + 1 < layers) ? relu(z) : z;
      }
      activation.swap(next);
    }
    scores[i] = activation[0];
  }
  return scores;
}

MlpGradients MlpGradients::zeros_like(const MlpParams& params) {
  MlpGradients g;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    g.weights.emplace_back(params.weights[l].rows(), params.weights[l].cols(), 0.0);
    g.biases.emplace_back(params.biases[l].size(), 0.0);
  }
  return g;
}

void MlpGradients::add(const MlpGradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t k = 0; k < weights[l].data().size(); ++k) {
      weights[l].data()[k] += other.weights[l].data()[k];
    }
    for (std::size_t k = 0; k < biases[l].size(); ++k) {
      biases[l][k] += other.biases[l][k];
    }
  }
}

void MlpGradients::scale(double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (double& v : weights[l].data()) v *= factor;
    for (double& v : biases[l]) v *= factor;
  }
}

MlpGradients mlp_backward(const MlpParams& params, const Matrix& features,
                          std::span<const double> d_scores) {
  require(features.rows() == d_scores.size(), "mlp_backward: shape mismatch");
  require(static_cast<int>(features.cols()) == params.input_dim(),
          "mlp_backward: feature dimension mismatch");
  const std::size_t layers = params.layer_count();
  MlpGradients grads = MlpGradients::zeros_like(params);

  // Per-item forward with cached pre-activations, then reverse sweep.
  std::vector<std::vector<double>> activations(layers + 1);
  std::vector<std::vector<double>> preacts(layers);
  std::vector<double> delta, prev_delta;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    if (d_scores[i] == 0.0) continue;
    const auto row = features.row(i);
    activations[0].assign(row.begin(), row.end());
    for (std::size_t l = 0; l < layers; ++l) {
      const Matrix& w = params.weights[l];
      preacts[l].assign(w.rows(), 0.0);
      activations[l + 1].assign(w.rows(), 0.0);
      for (std::size_t r = 0; r < w.rows(); ++r) {
        double z = params.biases[l][r];
        for (std::size_t c = 0; c < w.cols(); ++c) z += w(r, c) * activations[l][c];
        preacts[l][r] = z;
        activations[l + 1][r] = (l + 1 < layers) ? relu(z) : z;
      }
    }

    delta.assign(1, d_scores[i]);
    for (std::size_t l = layers; l-- > 0;) {
      const Matrix& w = params.weights[l];
      for (std::size_t r = 0; r < w.rows(); ++r) {
        grads.biases[l][r] += delta[r];
        for (std::size_t c = 0; c < w.cols(); ++c) {
          grads.weights[l](r, c) += delta[r] * activations[l][c];
        }
      }
      if (l == 0) break;
      prev_delta.assign(w.cols(), 0.0);
      for (std::size_t r = 0; r < w.rows(); ++r) {
        for (std::size_t c = 0; c < w.cols(); ++c) {
          prev_delta[c] += delta[r] * w(r, c);
        }
      }
      for (std::size_t c = 0; c < w.cols(); ++c) {
        if (preacts[l - 1][c] <= 0.0) prev_delta[c] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  return grads;
}

AdamState AdamState::zeros_like(const MlpParams& params) {
  AdamState state;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    state.m_weights.emplace_back(params.weights[l].rows(), params.weights[l].cols(), 0.0);
    state.v_weights.emplace_back(params.weights[l].rows(), params.weights[l].cols(), 0.0);
    state.m_biases.emplace_back(params.biases[l].size(), 0.0);
    state.v_biases.emplace_back(params.biases[l].size(), 0.0);
  }
  return state;
}

void adam_step(MlpParams& params, const MlpGradients& grads, AdamState& state,
               const AdamConfig& cfg) {
  ++state.step;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto update = [&](double& theta, double g, double& m, double& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    theta -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto& w = params.weights[l].data();
    const auto& gw = grads.weights[l].data();
    auto& mw = state.m_weights[l].data();
    auto& vw = state.v_weights[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) update(w[k], gw[k], mw[k], vw[k]);
    for (std::size_t k = 0; k < params.biases[l].size(); ++k) {
      update(params.biases[l][k], grads.biases[l][k], state.m_biases[l][k],
             state.v_biases[l][k]);
    }
  }
}

}  // namespace owarank
