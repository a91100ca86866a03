#include "owarank/spo_grad.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "owarank/data_io.hpp"
#include "owarank/parallel.hpp"

namespace owarank {

namespace {

using nlohmann::json;

constexpr int kCacheFormatVersion = 1;

std::uint64_t fnv1a(std::uint64_t hash, const void* bytes, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t fnv1a_double(std::uint64_t hash, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  return fnv1a(hash, &bits, sizeof(bits));
}

// (2*gamma_hat - gamma)-weighted value of an augmented solution: the score
// block weighs the policy, the constant lambda weighs the OWA variable.
double augmented_value(std::span<const double> scores,
                       std::span<const double> item_exposures, double owa_value,
                       double lambda) {
  double dot = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) dot += scores[i] * item_exposures[i];
  return (1.0 - lambda) * dot + lambda * owa_value;
}

}  // namespace

void TargetCache::insert(std::int64_t query_id, TargetEntry entry) {
  entries_[query_id] = std::move(entry);
}

const TargetEntry& TargetCache::at(std::int64_t query_id) const {
  const auto it = entries_.find(query_id);
  if (it == entries_.end()) {
    throw std::out_of_range("TargetCache: no entry for query " +
                            std::to_string(query_id));
  }
  return it->second;
}

bool TargetCache::contains(std::int64_t query_id) const {
  return entries_.find(query_id) != entries_.end();
}

std::uint64_t TargetCache::entry_key(std::int64_t query_id,
                                     std::span<const double> relevance,
                                     std::span<const int> labels) const {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  hash = fnv1a(hash, &query_id, sizeof(query_id));
  hash = fnv1a_double(hash, lambda_);
  hash = fnv1a(hash, &iterations_, sizeof(iterations_));
  hash = fnv1a_double(hash, beta0_);
  const int schedule = static_cast<int>(schedule_);
  hash = fnv1a(hash, &schedule, sizeof(schedule));
  for (double y : relevance) hash = fnv1a_double(hash, y);
  for (int label : labels) hash = fnv1a(hash, &label, sizeof(label));
  return hash;
}

void TargetCache::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("TargetCache::save: cannot open " + path);
  json header = {
      {"format", "owarank-target-cache"},
      {"version", kCacheFormatVersion},
      {"lambda", lambda_},
      {"iterations", iterations_},
      {"beta0", beta0_},
      {"owa_schedule", to_string(schedule_)},
      {"entries", entries_.size()},
  };
  out << header.dump() << '\n';
  for (const auto& [qid, entry] : entries_) {
    json atoms = json::array();
    for (const PolicyAtom& atom : entry.policy_star.atoms()) {
      atoms.push_back({{"w", atom.weight}, {"order", atom.perm.order}});
    }
    json record = {
        {"qid", qid},
        {"atoms", std::move(atoms)},
        {"item_exposures", entry.item_exposures},
        {"group_exposures", entry.group_exposures},
        {"owa", entry.owa_value},
        {"objective", entry.objective},
    };
    out << record.dump() << '\n';
  }
}

TargetCache TargetCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("TargetCache::load: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("TargetCache::load: empty file " + path);
  }
  const json header = json::parse(line);
  if (header.value("format", "") != "owarank-target-cache" ||
      header.value("version", -1) != kCacheFormatVersion) {
    throw std::runtime_error("TargetCache::load: unsupported cache format in " + path);
  }
  TargetCache cache(header.at("lambda").get<double>(),
                    header.at("iterations").get<int>(),
                    header.at("beta0").get<double>(),
                    owa_schedule_from_string(header.at("owa_schedule")));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json record = json::parse(line);
    std::vector<PolicyAtom> atoms;
    for (const json& atom : record.at("atoms")) {
      PolicyAtom a;
      a.weight = atom.at("w").get<double>();
      a.perm.order = atom.at("order").get<std::vector<int>>();
      atoms.push_back(std::move(a));
    }
    TargetEntry entry;
    entry.policy_star = RankingPolicy::from_atoms(std::move(atoms));
    entry.item_exposures = record.at("item_exposures").get<std::vector<double>>();
    entry.group_exposures = record.at("group_exposures").get<std::vector<double>>();
    entry.owa_value = record.at("owa").get<double>();
    entry.objective = record.at("objective").get<double>();
    cache.insert(record.at("qid").get<std::int64_t>(), std::move(entry));
  }
  return cache;
}

double regret(std::span<const double> y_hat, std::span<const double> y,
              const GroupAssignment& groups, const PositionBias& bias,
              const FwConfig& cfg, const TargetCache& cache, std::int64_t query_id) {
  const TargetEntry& target = cache.at(query_id);
  const FwSolution predicted = solve(y_hat, groups, bias, cfg);
  const double predicted_value = augmented_value(y, predicted.item_exposures,
                                                 predicted.owa_value, cfg.lambda);
  return target.objective - predicted_value;
}

SpoEvaluation spo_plus_evaluate(std::span<const double> y_hat,
                                std::span<const double> y,
                                const GroupAssignment& groups,
                                const PositionBias& bias, const FwConfig& cfg,
                                const TargetCache& cache, std::int64_t query_id) {
  require(y_hat.size() == y.size(), "spo_plus_evaluate: score dimension mismatch");
  require(std::abs(cache.lambda() - cfg.lambda) <= 1e-12,
          "spo_plus_evaluate: cache was built at a different lambda");
  const TargetEntry& target = cache.at(query_id);

  std::vector<double> perturbed(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) perturbed[i] = 2.0 * y_hat[i] - y[i];
  const FwSolution plus = solve(perturbed, groups, bias, cfg);

  SpoEvaluation eval;
  eval.gradient.d_scores.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    eval.gradient.d_scores[i] =
        (1.0 - cfg.lambda) * (plus.item_exposures[i] - target.item_exposures[i]);
  }

  // L = (2*gamma_hat - gamma) . Gamma+  -  2 * gamma_hat . Gamma*  +  gamma . Gamma*
  const double plus_term =
      augmented_value(perturbed, plus.item_exposures, plus.owa_value, cfg.lambda);
  const double hat_at_star =
      augmented_value(y_hat, target.item_exposures, target.owa_value, cfg.lambda);
  eval.loss = plus_term - 2.0 * hat_at_star + target.objective;
  return eval;
}

SpoGradient spo_plus_subgradient(std::span<const double> y_hat,
                                 std::span<const double> y,
                                 const GroupAssignment& groups,
                                 const PositionBias& bias, const FwConfig& cfg,
                                 const TargetCache& cache, std::int64_t query_id) {
  return spo_plus_evaluate(y_hat, y, groups, bias, cfg, cache, query_id).gradient;
}

double spo_plus_loss(std::span<const double> y_hat, std::span<const double> y,
                     const GroupAssignment& groups, const PositionBias& bias,
                     const FwConfig& cfg, const TargetCache& cache,
                     std::int64_t query_id) {
  return spo_plus_evaluate(y_hat, y, groups, bias, cfg, cache, query_id).loss;
}

TargetCache precompute_targets(const Dataset& dataset, const FwConfig& cfg,
                               int workers) {
  cfg.validate();
  require(!dataset.samples.empty(), "precompute_targets: empty dataset");
  TargetCache cache(cfg.lambda, cfg.iterations, cfg.beta0, cfg.owa_schedule);
  const PositionBias bias = position_bias(dataset.list_size);
  std::vector<TargetEntry> entries(dataset.samples.size());
  parallel_for(0, dataset.samples.size(), workers, [&](std::size_t q) {
    const QuerySample& sample = dataset.samples[q];
    FwSolution sol = solve(sample.relevance, sample.groups, bias, cfg);
    TargetEntry entry;
    entry.item_exposures = std::move(sol.item_exposures);
    entry.group_exposures = std::move(sol.group_exposures);
    entry.owa_value = sol.owa_value;
    entry.objective = sol.objective;
    entry.policy_star = std::move(sol.policy);
    entries[q] = std::move(entry);
  });
  for (std::size_t q = 0; q < dataset.samples.size(); ++q) {
    cache.insert(dataset.samples[q].qid, std::move(entries[q]));
  }
  return cache;
}

}  // namespace owarank
