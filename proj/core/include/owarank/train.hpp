#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owarank/data_io.hpp"
#include "owarank/mlp.hpp"
#include "owarank/spo_grad.hpp"

namespace owarank {

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 256;  // queries per Adam step
  int epochs = 20;
  double lambda = 0.0;
  int iters_train = 100;
  int iters_infer = 500;
  double beta0 = 1.0;
  OwaSchedule owa_schedule = OwaSchedule::kLinear;
  std::uint64_t seed = 0;
  int hidden = 0;  // first hidden width; 0 = auto
  int workers = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
  FwConfig train_fw() const;
  FwConfig infer_fw() const;
  AdamConfig adam() const;
};

// Per-feature z-score transform fitted on the training split and applied
// everywhere afterwards.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Dataset& dataset);
  Matrix apply(const Matrix& features) const;
};

struct EpochStats {
  int epoch = 0;                  // 0 = untrained baseline
  double train_spo_loss = 0.0;    // mean over training queries (0 at epoch 0)
  double valid_regret = 0.0;      // mean over validation queries
  double valid_dcg = 0.0;
  double valid_violation_mean = 0.0;
  double valid_violation_max = 0.0;
};

struct TrainResult {
  MlpParams params;  // parameters with the best validation regret
  Standardizer normalizer;
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

// End-to-end training: forward scores -> SPO+ subgradient through the
// fair-ranking layer -> backprop -> Adam step per batch. The target cache
// must cover both splits at cfg.lambda.
TrainResult train(const Dataset& train_split, const Dataset& valid_split,
                  const TrainConfig& cfg, const TargetCache& train_targets,
                  const TargetCache& valid_targets);

// Forward pass plus inference-grade solve for one query.
FwSolution predict_policy(const MlpParams& params, const Standardizer& normalizer,
                          const Matrix& features, const GroupAssignment& groups,
                          const FwConfig& cfg);

// Versioned JSON checkpoint: architecture, parameters, normalization
// constants and a config echo.
struct ModelBundle {
  MlpParams params;
  Standardizer normalizer;
  TrainConfig config;
};

void save_checkpoint(const std::string& path, const ModelBundle& bundle);
ModelBundle load_checkpoint(const std::string& path);

}  // namespace owarank
