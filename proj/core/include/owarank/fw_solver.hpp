#pragma once

#include <span>
#include <vector>

#include "owarank/owa.hpp"
#include "owarank/policy.hpp"

namespace owarank {

// Solver hyperparameters for the fair-ranking objective
//   max_{Pi bistochastic} (1 - lambda) * y^T Pi b + lambda * OWA_w(E_G(Pi)).
struct FwConfig {
  double lambda = 0.0;      // fairness weight in [0, 1]
  int iterations = 100;     // fixed iteration budget T
  double beta0 = 1.0;       // initial smoothing, beta_k = beta0 / sqrt(k)
  OwaSchedule owa_schedule = OwaSchedule::kLinear;
  bool compact_atoms = true;  // merge consecutive identical vertices

  void validate() const;
  OwaWeights weights_for(std::size_t num_active_groups) const;
};

struct FwSolution {
  RankingPolicy policy;
  std::vector<double> objective_trace;  // smoothed objective after each iteration
  std::vector<double> gap_trace;        // Frank-Wolfe gap diagnostics
  std::vector<double> item_exposures;   // Pi b
  std::vector<double> group_exposures;  // over active groups
  double owa_value = 0.0;               // OWA of group_exposures
  double objective = 0.0;               // unsmoothed objective at the final iterate
};

// True (unsmoothed) objective of a policy under scores y.
double objective(const RankingPolicy& policy, std::span<const double> relevance,
                 const GroupAssignment& groups, const PositionBias& bias,
                 const FwConfig& cfg);

// Vertex of the Birkhoff polytope maximizing <Pi, scores b^T>: the ranking
// that sorts the effective scores decreasingly.
Permutation linearized_subproblem(std::span<const double> effective_scores);

// Convex weights that the averaged Frank-Wolfe updates
//   Pi^(k) = k/(k+2) Pi^(k-1) + 2/(k+2) P^(k)
// assign to the initial vertex and each subsequent one after T steps.
std::vector<double> atom_weights_from_steps(int iterations);

// Frank-Wolfe with Moreau-envelope smoothing of the OWA term. Each
// iteration costs O(n log n) plus O(n + m log m) bookkeeping; the policy
// matrix is never formed during the iterations.
FwSolution solve(std::span<const double> scores, const GroupAssignment& groups,
                 const PositionBias& bias, const FwConfig& cfg);

}  // namespace owarank
