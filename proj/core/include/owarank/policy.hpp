#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "owarank/matrix.hpp"
#include "owarank/rng.hpp"

namespace owarank {

// A ranking of n items. order[k] is the (0-based) item placed at rank k.
struct Permutation {
  std::vector<int> order;

  static Permutation identity(int n);

  int size() const { return static_cast<int>(order.size()); }

  // Inverse map: positions()[item] = rank of the item.
  std::vector<int> positions() const;

  bool valid() const;

  friend bool operator==(const Permutation& a, const Permutation& b) = default;
};

// Items in strictly decreasing score order; ties broken by lower item
// index (stable), so results are reproducible across runs and platforms.
Permutation argsort_perm(std::span<const double> scores);

// Examination probability per rank, b_j = 1 / log2(1 + j) for j in 1..n.
struct PositionBias {
  std::vector<double> b;
  int size() const { return static_cast<int>(b.size()); }
  double sum() const;
};

PositionBias position_bias(int n);

// Group membership of the n items of one query. Groups that have no
// members are dropped from the incidence used by exposure computations,
// so exposure vectors range over active() only.
struct GroupAssignment {
  std::vector<int> labels;       // size n, values in [0, num_groups)
  int num_groups = 0;            // label space size m
  std::vector<int> group_sizes;  // size num_groups
  std::vector<int> active;       // ids of nonempty groups, ascending

  static GroupAssignment from_labels(std::vector<int> labels, int num_groups);

  int items() const { return static_cast<int>(labels.size()); }
  int active_count() const { return static_cast<int>(active.size()); }
};

struct PolicyAtom {
  double weight = 0.0;
  Permutation perm;
};

// Distribution over rankings represented as an explicit convex combination
// of permutation atoms. The atoms are the source of truth; the equivalent
// bistochastic matrix (entry (i, k): probability that item i takes rank k)
// is materialized lazily and cached.
class RankingPolicy {
 public:
  RankingPolicy() = default;

  static RankingPolicy from_atoms(std::vector<PolicyAtom> atoms);
  static RankingPolicy deterministic(Permutation perm);

  int size() const { return n_; }
  const std::vector<PolicyAtom>& atoms() const { return atoms_; }

  // Lazily materialized sum_k rho_k P^(k). Thread-safe.
  const Matrix& matrix() const;

  // Pi b: expected examination probability per item.
  std::vector<double> item_exposures(const PositionBias& bias) const;

 private:
  struct MatrixCell {
    std::once_flag once;
    Matrix mat;
  };

  std::vector<PolicyAtom> atoms_;
  int n_ = 0;
  std::shared_ptr<MatrixCell> cell_;
};

// sum_i y_i b_{rank(i)} for a single ranking.
double dcg(const Permutation& perm, std::span<const double> relevance,
           const PositionBias& bias);

// y^T Pi b; equals the atom-weighted average of per-ranking DCG.
double expected_dcg(const RankingPolicy& policy, std::span<const double> relevance,
                    const PositionBias& bias);

// Mean exposure of each nonempty group: (A Pi b) with group-size-normalized
// incidence rows. Indexed like groups.active.
std::vector<double> group_exposures(const RankingPolicy& policy,
                                    const GroupAssignment& groups,
                                    const PositionBias& bias);

// |E_g - E_all| per nonempty group, where E_all = sum(b) / n is the
// policy-independent all-items mean exposure.
std::vector<double> fairness_violations(const RankingPolicy& policy,
                                        const GroupAssignment& groups,
                                        const PositionBias& bias);

// Draws atom k with probability rho_k.
Permutation sample_ranking(const RankingPolicy& policy, Rng& rng);

}  // namespace owarank
