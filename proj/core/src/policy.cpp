#include "owarank/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace owarank {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

}  // namespace

Permutation Permutation::identity(int n) {
  Permutation p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), 0);
  return p;
}

std::vector<int> Permutation::positions() const {
  std::vector<int> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
  return pos;
}

bool Permutation::valid() const {
  std::vector<bool> seen(order.size(), false);
  for (int item : order) {
    if (item < 0 || item >= static_cast<int>(order.size()) || seen[item]) return false;
    seen[item] = true;
  }
  return true;
}

Permutation argsort_perm(std::span<const double> scores) {
  Permutation p;
  p.order.resize(scores.size());
  std::iota(p.order.begin(), p.order.end(), 0);
  std::stable_sort(p.order.begin(), p.order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return p;
}

double PositionBias::sum() const {
  return std::accumulate(b.begin(), b.end(), 0.0);
}

PositionBias position_bias(int n) {
  require(n >= 1, "position_bias: n must be >= 1");
  PositionBias bias;
  bias.b.resize(n);
  for (int j = 1; j <= n; ++j) {
    bias.b[j - 1] = 1.0 / std::log2(1.0 + static_cast<double>(j));
  }
  return bias;
}

GroupAssignment GroupAssignment::from_labels(std::vector<int> labels, int num_groups) {
  require(num_groups >= 1, "GroupAssignment: need at least one group");
  GroupAssignment g;
  g.num_groups = num_groups;
  g.group_sizes.assign(num_groups, 0);
  for (int label : labels) {
    require(label >= 0 && label < num_groups, "GroupAssignment: label out of range");
    ++g.group_sizes[label];
  }
  for (int id = 0; id < num_groups; ++id) {
    if (g.group_sizes[id] > 0) g.active.push_back(id);
  }
  g.labels = std::move(labels);
  return g;
}

RankingPolicy RankingPolicy::from_atoms(std::vector<PolicyAtom> atoms) {
  require(!atoms.empty(), "RankingPolicy: empty atom list");
  const int n = atoms.front().perm.size();
  double weight_sum = 0.0;
  for (const PolicyAtom& atom : atoms) {
    require(atom.perm.size() == n, "RankingPolicy: inconsistent atom sizes");
    require(atom.perm.valid(), "RankingPolicy: atom is not a permutation");
    require(atom.weight >= 0.0, "RankingPolicy: negative atom weight");
    weight_sum += atom.weight;
  }
  require(std::abs(weight_sum - 1.0) <= kWeightSumTolerance,
          "RankingPolicy: atom weights must sum to 1");
  RankingPolicy policy;
  policy.atoms_ = std::move(atoms);
  policy.n_ = n;
  policy.cell_ = std::make_shared<MatrixCell>();
  return policy;
}

RankingPolicy RankingPolicy::deterministic(Permutation perm) {
  std::vector<PolicyAtom> atoms;
  atoms.push_back({1.0, std::move(perm)});
  return from_atoms(std::move(atoms));
}

const Matrix& RankingPolicy::matrix() const {
  require(cell_ != nullptr, "RankingPolicy: uninitialized");
  std::call_once(cell_->once, [this] {
    Matrix mat(n_, n_, 0.0);
    for (const PolicyAtom& atom : atoms_) {
      for (int rank = 0; rank < n_; ++rank) {
        mat(atom.perm.order[rank], rank) += atom.weight;
      }
    }
    cell_->mat = std::move(mat);
  });
  return cell_->mat;
}

std::vector<double> RankingPolicy::item_exposures(const PositionBias& bias) const {
  require(bias.size() == n_, "item_exposures: dimension mismatch");
  std::vector<double> exposure(n_, 0.0);
  for (const PolicyAtom& atom : atoms_) {
    for (int rank = 0; rank < n_; ++rank) {
      exposure[atom.perm.order[rank]] += atom.weight * bias.b[rank];
    }
  }
  return exposure;
}

double dcg(const Permutation& perm, std::span<const double> relevance,
           const PositionBias& bias) {
  require(perm.size() == static_cast<int>(relevance.size()) &&
              perm.size() == bias.size(),
          "dcg: dimension mismatch");
  double value = 0.0;
  for (int rank = 0; rank < perm.size(); ++rank) {
    value += relevance[perm.order[rank]] * bias.b[rank];
  }
  return value;
}

double expected_dcg(const RankingPolicy& policy, std::span<const double> relevance,
                    const PositionBias& bias) {
  require(policy.size() == static_cast<int>(relevance.size()),
          "expected_dcg: dimension mismatch");
  const std::vector<double> exposure = policy.item_exposures(bias);
  double value = 0.0;
  for (int i = 0; i < policy.size(); ++i) value += relevance[i] * exposure[i];
  return value;
}

std::vector<double> group_exposures(const RankingPolicy& policy,
                                    const GroupAssignment& groups,
                                    const PositionBias& bias) {
  require(groups.items() == policy.size(), "group_exposures: dimension mismatch");
  require(groups.active_count() >= 1, "group_exposures: no nonempty group");
  const std::vector<double> item_exposure = policy.item_exposures(bias);
  std::vector<double> sums(groups.num_groups, 0.0);
  for (int i = 0; i < groups.items(); ++i) sums[groups.labels[i]] += item_exposure[i];
  std::vector<double> out;
  out.reserve(groups.active_count());
  for (int id : groups.active) {
    out.push_back(sums[id] / static_cast<double>(groups.group_sizes[id]));
  }
  return out;
}

std::vector<double> fairness_violations(const RankingPolicy& policy,
                                        const GroupAssignment& groups,
                                        const PositionBias& bias) {
  const std::vector<double> exposures = group_exposures(policy, groups, bias);
  const double overall = bias.sum() / static_cast<double>(policy.size());
  std::vector<double> out(exposures.size());
  for (std::size_t g = 0; g < exposures.size(); ++g) {
    out[g] = std::abs(exposures[g] - overall);
  }
  return out;
}

Permutation sample_ranking(const RankingPolicy& policy, Rng& rng) {
  require(!policy.atoms().empty(), "sample_ranking: empty atom list");
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (const PolicyAtom& atom : policy.atoms()) {
    cumulative += atom.weight;
    if (u < cumulative) return atom.perm;
  }
  return policy.atoms().back().perm;
}

}  // namespace owarank
