#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "owarank/fw_solver.hpp"

namespace owarank {

struct Dataset;  // data_io.hpp

// Ground-truth solution of one query at a fixed fairness weight:
// Pi* = solve(y), its exposures r* = E_G(Pi*), OWA value z* and objective
// value f*. Everything the backward pass needs from the ground-truth side.
struct TargetEntry {
  RankingPolicy policy_star;
  std::vector<double> item_exposures;   // Pi* b
  std::vector<double> group_exposures;  // r*
  double owa_value = 0.0;               // z*
  double objective = 0.0;               // f*
};

// Immutable map from query id to its precomputed target, all entries
// solved with one solver configuration. Built once before training,
// read-many afterwards.
class TargetCache {
 public:
  TargetCache() = default;
  TargetCache(double lambda, int iterations, double beta0, OwaSchedule schedule)
      : lambda_(lambda), iterations_(iterations), beta0_(beta0), schedule_(schedule) {}

  void insert(std::int64_t query_id, TargetEntry entry);
  const TargetEntry& at(std::int64_t query_id) const;
  bool contains(std::int64_t query_id) const;
  std::size_t size() const { return entries_.size(); }

  double lambda() const { return lambda_; }
  int iterations() const { return iterations_; }
  double beta0() const { return beta0_; }
  OwaSchedule schedule() const { return schedule_; }

  // Content hash of the solver configuration and one query's inputs;
  // stored per record so stale cache files are detected on load.
  std::uint64_t entry_key(std::int64_t query_id, std::span<const double> relevance,
                          std::span<const int> labels) const;

  void save(const std::string& path) const;
  static TargetCache load(const std::string& path);

 private:
  double lambda_ = 0.0;
  int iterations_ = 0;
  double beta0_ = 1.0;
  OwaSchedule schedule_ = OwaSchedule::kLinear;
  std::unordered_map<std::int64_t, TargetEntry> entries_;
};

struct SpoGradient {
  std::vector<double> d_scores;  // subgradient of the SPO+ loss w.r.t. scores
};

// Everything one training sample produces from a single perturbed solve.
struct SpoEvaluation {
  SpoGradient gradient;
  double loss = 0.0;
};

// f(Pi*(y), y) - f(Pi*(y_hat), y): the objective value lost by ranking
// with predicted instead of ground-truth scores. Solves at y_hat with cfg.
double regret(std::span<const double> y_hat, std::span<const double> y,
              const GroupAssignment& groups, const PositionBias& bias,
              const FwConfig& cfg, const TargetCache& cache, std::int64_t query_id);

// SPO+ subgradient through the fair-ranking problem: solve once at the
// perturbed scores 2*y_hat - y, then d_y = (1 - lambda) * (Pi+ - Pi*) b.
// The exposure and OWA blocks of the augmented solution difference carry
// no direct score dependence, so only the policy block contributes.
SpoGradient spo_plus_subgradient(std::span<const double> y_hat,
                                 std::span<const double> y,
                                 const GroupAssignment& groups,
                                 const PositionBias& bias, const FwConfig& cfg,
                                 const TargetCache& cache, std::int64_t query_id);

// SPO+ surrogate loss, an upper bound on regret (monitoring only).
double spo_plus_loss(std::span<const double> y_hat, std::span<const double> y,
                     const GroupAssignment& groups, const PositionBias& bias,
                     const FwConfig& cfg, const TargetCache& cache,
                     std::int64_t query_id);

// Subgradient and loss from the same perturbed solve.
SpoEvaluation spo_plus_evaluate(std::span<const double> y_hat,
                                std::span<const double> y,
                                const GroupAssignment& groups,
                                const PositionBias& bias, const FwConfig& cfg,
                                const TargetCache& cache, std::int64_t query_id);

// Solves every query of the dataset at its ground-truth scores.
TargetCache precompute_targets(const Dataset& dataset, const FwConfig& cfg,
                               int workers = 1);

}  // namespace owarank
