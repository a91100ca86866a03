#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace owarank::oracles {

std::vector<double> naive_isotonic_nonincreasing(std::span<const double> s) {
  std::vector<double> value(s.begin(), s.end());
  std::vector<int> count(s.size(), 1);
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i + 1 < value.size(); ++i) {
      if (value[i] < value[i + 1]) {
        const double total = value[i] * count[i] + value[i + 1] * count[i + 1];
        count[i] += count[i + 1];
        value[i] = total / count[i];
        value.erase(value.begin() + i + 1);
        count.erase(count.begin() + i + 1);
        merged = true;
        break;
      }
    }
  }
  std::vector<double> out;
  out.reserve(s.size());
  for (std::size_t blk = 0; blk < value.size(); ++blk) {
    for (int j = 0; j < count[blk]; ++j) out.push_back(value[blk]);
  }
  return out;
}

std::vector<std::vector<int>> all_permutations(int m) {
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

namespace {

double objective_at(std::span<const double> w_tilde,
                    const std::vector<std::vector<int>>& perms,
                    std::span<const double> x, double beta,
                    const std::vector<double>& y) {
  double support = -std::numeric_limits<double>::infinity();
  for (const auto& perm : perms) {
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += w_tilde[perm[i]] * y[i];
    support = std::max(support, dot);
  }
  double quad = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double diff = y[i] - x[i];
    quad += diff * diff;
  }
  return support + quad / (2.0 * beta);
}

}  // namespace

double support_envelope_value(std::span<const double> w_tilde,
                              std::span<const double> x, double beta) {
  const int m = static_cast<int>(x.size());
  const auto perms = all_permutations(m);

  double w_norm = 0.0;
  for (double w : w_tilde) w_norm += w * w;
  w_norm = std::sqrt(w_norm);

  std::vector<double> center(x.begin(), x.end());
  double radius = 2.0 * (beta * w_norm + 1.0);

  constexpr int kPointsPerAxis = 9;  // odd, so the center is a grid point
  std::vector<double> best = center;
  std::vector<double> point(m);
  std::vector<int> index(m, 0);
  int guard = 0;
  while (radius / (kPointsPerAxis - 1) * 2.0 > 2e-9 && ++guard < 200) {
    const double spacing = 2.0 * radius / (kPointsPerAxis - 1);
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> best_point = center;
    bool best_on_boundary = false;

    std::fill(index.begin(), index.end(), 0);
    while (true) {
      bool on_boundary = false;
      for (int d = 0; d < m; ++d) {
        point[d] = center[d] - radius + spacing * index[d];
        if (index[d] == 0 || index[d] == kPointsPerAxis - 1) on_boundary = true;
      }
      const double value = objective_at(w_tilde, perms, x, beta, point);
      if (value < best_value) {
        best_value = value;
        best_point = point;
        best_on_boundary = on_boundary;
      }
      int d = 0;
      while (d < m && ++index[d] == kPointsPerAxis) index[d++] = 0;
      if (d == m) break;
    }

    best = best_point;
    if (best_on_boundary) {
      center = best_point;
      radius *= 2.0;  // the minimizer escaped the box; grow it
    } else {
      center = best_point;
      radius = 2.0 * spacing;
    }
  }
  return objective_at(w_tilde, perms, x, beta, best);
}

std::vector<double> support_envelope_fd_gradient(std::span<const double> w_tilde,
                                                 std::span<const double> x,
                                                 double beta, double step) {
  std::vector<double> gradient(x.size());
  std::vector<double> shifted(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    shifted[i] = x[i] + step;
    const double plus = support_envelope_value(w_tilde, shifted, beta);
    shifted[i] = x[i] - step;
    const double minus = support_envelope_value(w_tilde, shifted, beta);
    shifted[i] = x[i];
    gradient[i] = (plus - minus) / (2.0 * step);
  }
  return gradient;
}

Permutation best_vertex_exhaustive(std::span<const double> coefficients,
                                   const PositionBias& bias) {
  const int n = static_cast<int>(coefficients.size());
  const auto perms = all_permutations(n);
  double best_value = -std::numeric_limits<double>::infinity();
  Permutation best;
  for (const auto& order : perms) {
    double value = 0.0;
    for (int rank = 0; rank < n; ++rank) value += coefficients[order[rank]] * bias.b[rank];
    if (value > best_value) {
      best_value = value;
      best.order = order;
    }
  }
  return best;
}

OwaWeights random_owa_weights(int m, Rng& rng) {
  // Suffix sums of positive gaps are strictly decreasing by construction.
  std::vector<double> gaps(m);
  for (double& g : gaps) g = rng.uniform(0.05, 1.0);
  std::vector<double> w(m, 0.0);
  for (int j = m - 1; j >= 0; --j) {
    w[j] = gaps[j] + (j + 1 < m ? w[j + 1] : 0.0);
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  return OwaWeights::from(std::move(w));
}

}  // namespace owarank::oracles
