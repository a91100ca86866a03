#include "owarank/fw_solver.hpp"

#include <algorithm>
#include <cmath>

namespace owarank {

namespace {

// y^T P b for a single vertex, O(n).
double vertex_dcg(const Permutation& perm, std::span<const double> scores,
                  const PositionBias& bias) {
  double value = 0.0;
  for (int rank = 0; rank < perm.size(); ++rank) {
    value += scores[perm.order[rank]] * bias.b[rank];
  }
  return value;
}

}  // namespace

void FwConfig::validate() const {
  require(lambda >= 0.0 && lambda <= 1.0, "FwConfig: lambda must be in [0, 1]");
  require(iterations >= 1, "FwConfig: iterations must be >= 1");
  require(beta0 > 0.0, "FwConfig: beta0 must be positive");
}

OwaWeights FwConfig::weights_for(std::size_t num_active_groups) const {
  return make_owa_weights(owa_schedule, num_active_groups);
}

double objective(const RankingPolicy& policy, std::span<const double> relevance,
                 const GroupAssignment& groups, const PositionBias& bias,
                 const FwConfig& cfg) {
  cfg.validate();
  const double utility = expected_dcg(policy, relevance, bias);
  if (cfg.lambda == 0.0) return utility;
  const std::vector<double> exposures = group_exposures(policy, groups, bias);
  const OwaWeights weights = cfg.weights_for(exposures.size());
  return (1.0 - cfg.lambda) * utility + cfg.lambda * owa(weights, exposures);
}

Permutation linearized_subproblem(std::span<const double> effective_scores) {
  return argsort_perm(effective_scores);
}

std::vector<double> atom_weights_from_steps(int iterations) {
  require(iterations >= 0, "atom_weights_from_steps: negative iteration count");
  const double denom =
      static_cast<double>(iterations + 1) * static_cast<double>(iterations + 2);
  std::vector<double> weights(iterations + 1);
  weights[0] = 2.0 / denom;
  for (int k = 1; k <= iterations; ++k) {
    weights[k] = 2.0 * static_cast<double>(k + 1) / denom;
  }
  return weights;
}

FwSolution solve(std::span<const double> scores, const GroupAssignment& groups,
                 const PositionBias& bias, const FwConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(scores.size());
  require(groups.items() == n, "solve: group labels do not match item count");
  require(bias.size() == n, "solve: position bias does not match item count");
  require(groups.active_count() >= 1, "solve: no nonempty group");

  const int T = cfg.iterations;
  const std::size_t m = groups.active.size();
  const OwaWeights weights = cfg.weights_for(m);
  const std::vector<double> w_tilde = negated_reversed(weights);
  const SmoothingSchedule smoothing{cfg.beta0};
  const std::vector<double> final_weights = atom_weights_from_steps(T);

  std::vector<PolicyAtom> atoms;
  atoms.reserve(16);
  auto push_atom = [&](int step, Permutation perm) {
    const double weight = final_weights[step];
    if (cfg.compact_atoms && !atoms.empty() && atoms.back().perm == perm) {
      atoms.back().weight += weight;
    } else {
      atoms.push_back({weight, std::move(perm)});
    }
  };

  // Pi^(0): vertex sorting the predicted scores decreasingly.
  Permutation current = argsort_perm(scores);

  // Incrementally maintained state of the averaged iterate.
  std::vector<double> item_exposure(n);   // Pi b
  for (int rank = 0; rank < n; ++rank) item_exposure[current.order[rank]] = bias.b[rank];
  double utility = vertex_dcg(current, scores, bias);  // y^T Pi b

  std::vector<double> group_sums(groups.num_groups, 0.0);
  std::vector<double> exposures(m, 0.0);
  auto recompute_group_exposures = [&] {
    std::fill(group_sums.begin(), group_sums.end(), 0.0);
    for (int i = 0; i < n; ++i) group_sums[groups.labels[i]] += item_exposure[i];
    for (std::size_t g = 0; g < m; ++g) {
      const int id = groups.active[g];
      exposures[g] = group_sums[id] / static_cast<double>(groups.group_sizes[id]);
    }
  };
  recompute_group_exposures();

  push_atom(0, current);

  FwSolution solution;
  solution.objective_trace.reserve(T);
  solution.gap_trace.reserve(T);

  std::vector<double> scaled(m);
  std::vector<double> effective(n);
  std::vector<double> group_boost(groups.num_groups, 0.0);

  for (int k = 1; k <= T; ++k) {
    const double beta = smoothing.beta(k);
    const double alpha = 2.0 / static_cast<double>(k + 2);
    const double keep = static_cast<double>(k) / static_cast<double>(k + 2);

    Permutation vertex;
    if (cfg.lambda > 0.0) {
      for (std::size_t g = 0; g < m; ++g) scaled[g] = exposures[g] / beta;
      const std::vector<double> mu = project_permutahedron(w_tilde, scaled);
      // mu lies in C(w_tilde); the ascent direction of the smoothed
      // concave OWA is -mu, so low-exposure groups get boosted.
      std::fill(group_boost.begin(), group_boost.end(), 0.0);
      for (std::size_t g = 0; g < m; ++g) {
        const int id = groups.active[g];
        group_boost[id] = -mu[g] / static_cast<double>(groups.group_sizes[id]);
      }
      for (int i = 0; i < n; ++i) {
        effective[i] =
            (1.0 - cfg.lambda) * scores[i] + cfg.lambda * group_boost[groups.labels[i]];
      }
      vertex = linearized_subproblem(effective);
    } else {
      vertex = linearized_subproblem(scores);
    }

    // Frank-Wolfe gap <P - Pi, grad f> restricted to the b-rank-one gradient.
    const std::span<const double> grad_scores =
        cfg.lambda > 0.0 ? std::span<const double>(effective)
                         : std::span<const double>(scores);
    double grad_at_vertex = vertex_dcg(vertex, grad_scores, bias);
    double grad_at_iterate = 0.0;
    for (int i = 0; i < n; ++i) grad_at_iterate += grad_scores[i] * item_exposure[i];
    solution.gap_trace.push_back(grad_at_vertex - grad_at_iterate);

    // Pi^(k) = keep * Pi^(k-1) + alpha * P^(k), tracked on the exposures
    // and the utility instead of the n x n matrix.
    utility = keep * utility + alpha * vertex_dcg(vertex, scores, bias);
    for (double& e : item_exposure) e *= keep;
    for (int rank = 0; rank < n; ++rank) {
      item_exposure[vertex.order[rank]] += alpha * bias.b[rank];
    }
    recompute_group_exposures();

    double smoothed = (1.0 - cfg.lambda) * utility;
    if (cfg.lambda > 0.0) {
      smoothed += cfg.lambda * smoothed_owa_value(weights, exposures, beta);
    }
    solution.objective_trace.push_back(smoothed);

    push_atom(k, std::move(vertex));
  }

  solution.policy = RankingPolicy::from_atoms(std::move(atoms));
  solution.item_exposures = std::move(item_exposure);
  solution.group_exposures = exposures;
  solution.owa_value = owa(weights, exposures);
  solution.objective = (1.0 - cfg.lambda) * utility + cfg.lambda * solution.owa_value;
  return solution;
}

}  // namespace owarank
