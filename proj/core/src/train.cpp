#include "owarank/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "owarank/parallel.hpp"

namespace owarank {

namespace {

using nlohmann::json;

constexpr int kCheckpointFormatVersion = 1;

struct ValidStats {
  double regret = 0.0;
  double dcg = 0.0;
  double violation_mean = 0.0;
  double violation_max = 0.0;
};

ValidStats validate_split(const MlpParams& params, const Standardizer& normalizer,
                          const Dataset& split, const TrainConfig& cfg,
                          const TargetCache& targets, const PositionBias& bias) {
  const FwConfig fw = cfg.train_fw();
  std::vector<ValidStats> per_query(split.size());
  parallel_for(0, split.size(), cfg.workers, [&](std::size_t q) {
    const QuerySample& sample = split.samples[q];
    const Matrix feats = normalizer.apply(sample.features);
    const std::vector<double> scores = mlp_forward(params, feats);
    const FwSolution sol = solve(scores, sample.groups, bias, fw);
    double value = 0.0;
    for (std::size_t i = 0; i < sample.relevance.size(); ++i) {
      value += sample.relevance[i] * sol.item_exposures[i];
    }
    ValidStats s;
    s.dcg = value;
    const double truth_objective = targets.at(sample.qid).objective;
    s.regret = truth_objective -
               ((1.0 - cfg.lambda) * value + cfg.lambda * sol.owa_value);
    const std::vector<double> violations =
        fairness_violations(sol.policy, sample.groups, bias);
    s.violation_mean = std::accumulate(violations.begin(), violations.end(), 0.0) /
                       static_cast<double>(violations.size());
    s.violation_max = *std::max_element(violations.begin(), violations.end());
    per_query[q] = s;
  });
  ValidStats mean;
  for (const ValidStats& s : per_query) {
    mean.regret += s.regret;
    mean.dcg += s.dcg;
    mean.violation_mean += s.violation_mean;
    mean.violation_max += s.violation_max;
  }
  const double count = static_cast<double>(split.size());
  mean.regret /= count;
  mean.dcg /= count;
  mean.violation_mean /= count;
  mean.violation_max /= count;
  return mean;
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(epochs >= 1, "TrainConfig: epochs must be >= 1");
  require(lambda >= 0.0 && lambda <= 1.0, "TrainConfig: lambda must be in [0, 1]");
  require(iters_train >= 1 && iters_infer >= 1, "TrainConfig: iterations must be >= 1");
  require(beta0 > 0.0, "TrainConfig: beta0 must be positive");
}

FwConfig TrainConfig::train_fw() const {
  FwConfig fw;
  fw.lambda = lambda;
  fw.iterations = iters_train;
  fw.beta0 = beta0;
  fw.owa_schedule = owa_schedule;
  return fw;
}

FwConfig TrainConfig::infer_fw() const {
  FwConfig fw = train_fw();
  fw.iterations = iters_infer;
  return fw;
}

AdamConfig TrainConfig::adam() const {
  return {learning_rate, adam_beta1, adam_beta2, adam_epsilon};
}

Standardizer Standardizer::fit(const Dataset& dataset) {
  require(!dataset.samples.empty(), "Standardizer: empty dataset");
  const int d = dataset.feature_dim;
  Standardizer norm;
  norm.mean.assign(d, 0.0);
  norm.stddev.assign(d, 0.0);
  double count = 0.0;
  for (const QuerySample& sample : dataset.samples) {
    for (std::size_t i = 0; i < sample.features.rows(); ++i) {
      for (int j = 0; j < d; ++j) norm.mean[j] += sample.features(i, j);
      count += 1.0;
    }
  }
  for (int j = 0; j < d; ++j) norm.mean[j] /= count;
  for (const QuerySample& sample : dataset.samples) {
    for (std::size_t i = 0; i < sample.features.rows(); ++i) {
      for (int j = 0; j < d; ++j) {
        const double diff = sample.features(i, j) - norm.mean[j];
        norm.stddev[j] += diff * diff;
      }
    }
  }
  for (int j = 0; j < d; ++j) {
    norm.stddev[j] = std::sqrt(norm.stddev[j] / count);
    if (norm.stddev[j] < 1e-12) norm.stddev[j] = 1.0;  // constant feature
  }
  return norm;
}

Matrix Standardizer::apply(const Matrix& features) const {
  require(features.cols() == mean.size(), "Standardizer: dimension mismatch");
  Matrix out(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      out(i, j) = (features(i, j) - mean[j]) / stddev[j];
    }
  }
  return out;
}

TrainResult train(const Dataset& train_split, const Dataset& valid_split,
                  const TrainConfig& cfg, const TargetCache& train_targets,
                  const TargetCache& valid_targets) {
  cfg.validate();
  require(!train_split.samples.empty(), "train: empty training split");
  require(!valid_split.samples.empty(), "train: empty validation split");
  for (const QuerySample& sample : train_split.samples) {
    require(train_targets.contains(sample.qid), "train: target cache misses a query");
  }
  for (const QuerySample& sample : valid_split.samples) {
    require(valid_targets.contains(sample.qid), "train: target cache misses a query");
  }

  const PositionBias bias = position_bias(train_split.list_size);
  const FwConfig fw = cfg.train_fw();

  TrainResult result;
  result.normalizer = Standardizer::fit(train_split);

  Rng init_rng(cfg.seed);
  MlpParams params =
      MlpParams::make(MlpParams::default_dims(train_split.feature_dim, cfg.hidden),
                      init_rng);
  AdamState adam_state = AdamState::zeros_like(params);

  const ValidStats initial = validate_split(params, result.normalizer, valid_split,
                                            cfg, valid_targets, bias);
  result.history.push_back({0, 0.0, initial.regret, initial.dcg,
                            initial.violation_mean, initial.violation_max});
  result.params = params;
  result.best_epoch = 0;
  double best_regret = initial.regret;

  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Matrix> batch_features(train_split.size());
  std::vector<SpoEvaluation> batch_evals(train_split.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));

      // Solves are the expensive part and run in parallel; gradients are
      // accumulated sequentially in batch order for reproducibility.
      parallel_for(start, stop, cfg.workers, [&](std::size_t slot) {
        const QuerySample& sample = train_split.samples[order[slot]];
        batch_features[slot] = result.normalizer.apply(sample.features);
        const std::vector<double> scores = mlp_forward(params, batch_features[slot]);
        batch_evals[slot] = spo_plus_evaluate(scores, sample.relevance, sample.groups,
                                              bias, fw, train_targets, sample.qid);
      });

      MlpGradients grads = MlpGradients::zeros_like(params);
      for (std::size_t slot = start; slot < stop; ++slot) {
        grads.add(mlp_backward(params, batch_features[slot],
                               batch_evals[slot].gradient.d_scores));
        epoch_loss += batch_evals[slot].loss;
      }
      grads.scale(1.0 / static_cast<double>(stop - start));
      adam_step(params, grads, adam_state, cfg.adam());
    }

    const ValidStats stats = validate_split(params, result.normalizer, valid_split,
                                            cfg, valid_targets, bias);
    result.history.push_back({epoch, epoch_loss / static_cast<double>(order.size()),
                              stats.regret, stats.dcg, stats.violation_mean,
                              stats.violation_max});
    if (stats.regret < best_regret) {
      best_regret = stats.regret;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

FwSolution predict_policy(const MlpParams& params, const Standardizer& normalizer,
                          const Matrix& features, const GroupAssignment& groups,
                          const FwConfig& cfg) {
  const Matrix feats = normalizer.apply(features);
  const std::vector<double> scores = mlp_forward(params, feats);
  const PositionBias bias = position_bias(static_cast<int>(features.rows()));
  return solve(scores, groups, bias, cfg);
}

void save_checkpoint(const std::string& path, const ModelBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  json layers = json::array();
  for (std::size_t l = 0; l < bundle.params.weights.size(); ++l) {
    const Matrix& w = bundle.params.weights[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", w.data()},
                      {"biases", bundle.params.biases[l]}});
  }
  const TrainConfig& cfg = bundle.config;
  json doc = {
      {"format", "owarank-checkpoint"},
      {"version", kCheckpointFormatVersion},
      {"layers", std::move(layers)},
      {"normalizer", {{"mean", bundle.normalizer.mean},
                      {"stddev", bundle.normalizer.stddev}}},
      {"config",
       {{"learning_rate", cfg.learning_rate},
        {"batch_size", cfg.batch_size},
        {"epochs", cfg.epochs},
        {"lambda", cfg.lambda},
        {"iters_train", cfg.iters_train},
        {"iters_infer", cfg.iters_infer},
        {"beta0", cfg.beta0},
        {"owa_schedule", to_string(cfg.owa_schedule)},
        {"seed", cfg.seed},
        {"hidden", cfg.hidden},
        {"workers", cfg.workers}}},
  };
  out << doc.dump(2) << '\n';
}

ModelBundle load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json doc;
  in >> doc;
  if (doc.value("format", "") != "owarank-checkpoint" ||
      doc.value("version", -1) != kCheckpointFormatVersion) {
    throw std::runtime_error("load_checkpoint: unsupported checkpoint format in " +
                             path);
  }
  ModelBundle bundle;
  for (const json& layer : doc.at("layers")) {
    const std::size_t rows = layer.at("rows").get<std::size_t>();
    const std::size_t cols = layer.at("cols").get<std::size_t>();
    Matrix w(rows, cols);
    w.data() = layer.at("weights").get<std::vector<double>>();
    require(w.data().size() == rows * cols, "load_checkpoint: bad layer shape");
    bundle.params.weights.push_back(std::move(w));
    bundle.params.biases.push_back(layer.at("biases").get<std::vector<double>>());
  }
  bundle.params.validate();
  bundle.normalizer.mean = doc.at("normalizer").at("mean").get<std::vector<double>>();
  bundle.normalizer.stddev =
      doc.at("normalizer").at("stddev").get<std::vector<double>>();
  const json& cfg = doc.at("config");
  bundle.config.learning_rate = cfg.at("learning_rate").get<double>();
  bundle.config.batch_size = cfg.at("batch_size").get<int>();
  bundle.config.epochs = cfg.at("epochs").get<int>();
  bundle.config.lambda = cfg.at("lambda").get<double>();
  bundle.config.iters_train = cfg.at("iters_train").get<int>();
  bundle.config.iters_infer = cfg.at("iters_infer").get<int>();
  bundle.config.beta0 = cfg.at("beta0").get<double>();
  bundle.config.owa_schedule = owa_schedule_from_string(cfg.at("owa_schedule"));
  bundle.config.seed = cfg.at("seed").get<std::uint64_t>();
  bundle.config.hidden = cfg.at("hidden").get<int>();
  bundle.config.workers = cfg.at("workers").get<int>();
  return bundle;
}

}  // namespace owarank
