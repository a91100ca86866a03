#include "owarank/owa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "owarank/matrix.hpp"

namespace owarank {

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

OwaWeights OwaWeights::from(std::vector<double> weights) {
  require(!weights.empty(), "OwaWeights: empty weight vector");
  double sum = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    require(weights[j] >= 0.0, "OwaWeights: negative weight");
    if (j > 0) {
      require(weights[j - 1] > weights[j],
              "OwaWeights: weights must be strictly decreasing");
    }
    sum += weights[j];
  }
  require(std::abs(sum - 1.0) <= kSumTolerance, "OwaWeights: weights must sum to 1");
  OwaWeights out;
  out.w = std::move(weights);
  return out;
}

OwaWeights OwaWeights::linear(std::size_t m) {
  require(m >= 1, "OwaWeights::linear: m must be >= 1");
  std::vector<double> w(m);
  const double denom = static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = static_cast<double>(m - j) / denom;
  }
  // Renormalize so the sum is 1 to the last ulp.
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  return from(std::move(w));
}

OwaWeights OwaWeights::harmonic(std::size_t m) {
  require(m >= 1, "OwaWeights::harmonic: m must be >= 1");
  std::vector<double> w(m);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = 1.0 / static_cast<double>(j + 1);
    sum += w[j];
  }
  for (double& v : w) v /= sum;
  return from(std::move(w));
}

OwaWeights make_owa_weights(OwaSchedule schedule, std::size_t m) {
  switch (schedule) {
    case OwaSchedule::kLinear:
      return OwaWeights::linear(m);
    case OwaSchedule::kHarmonic:
      return OwaWeights::harmonic(m);
  }
  throw std::invalid_argument("make_owa_weights: unknown schedule");
}

std::string to_string(OwaSchedule schedule) {
  return schedule == OwaSchedule::kLinear ? "linear" : "harmonic";
}

OwaSchedule owa_schedule_from_string(const std::string& name) {
  if (name == "linear") return OwaSchedule::kLinear;
  if (name == "harmonic") return OwaSchedule::kHarmonic;
  throw std::invalid_argument("unknown OWA schedule: " + name);
}

double SmoothingSchedule::beta(int k) const {
  require(beta0 > 0.0, "SmoothingSchedule: beta0 must be positive");
  require(k >= 1, "SmoothingSchedule: iteration index starts at 1");
  return beta0 / std::sqrt(static_cast<double>(k));
}

double owa(const OwaWeights& weights, std::span<const double> x) {
  require(x.size() == weights.size(), "owa: dimension mismatch");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  double value = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) value += weights.w[j] * sorted[j];
  return value;
}

double owa_min_oracle(const OwaWeights& weights, std::span<const double> x) {
  require(x.size() == weights.size(), "owa_min_oracle: dimension mismatch");
  const std::size_t m = x.size();
  require(m <= 8, "owa_min_oracle: factorial enumeration limited to m <= 8");
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += weights.w[perm[i]] * x[i];
    best = std::min(best, dot);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> isotonic_nonincreasing(std::span<const double> s) {
  const std::size_t m = s.size();
  std::vector<double> value;   // block mean
  std::vector<double> sum;     // block sum
  std::vector<std::size_t> count;
  value.reserve(m);
  sum.reserve(m);
  count.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    value.push_back(s[i]);
    sum.push_back(s[i]);
    count.push_back(1);
    // Pool while the block ordering violates v_prev >= v_next.
    while (value.size() > 1 && value[value.size() - 2] < value.back()) {
      const double merged_sum = sum[sum.size() - 2] + sum.back();
      const std::size_t merged_count = count[count.size() - 2] + count.back();
      value.pop_back();
      sum.pop_back();
      count.pop_back();
      sum.back() = merged_sum;
      count.back() = merged_count;
      value.back() = merged_sum / static_cast<double>(merged_count);
    }
  }
  std::vector<double> out(m);
  std::size_t pos = 0;
  for (std::size_t blk = 0; blk < value.size(); ++blk) {
    for (std::size_t j = 0; j < count[blk]; ++j) out[pos++] = value[blk];
  }
  return out;
}

std::vector<double> project_permutahedron(std::span<const double> w_tilde,
                                          std::span<const double> z) {
  require(w_tilde.size() == z.size(), "project_permutahedron: dimension mismatch");
  const std::size_t m = z.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });

  std::vector<double> w_sorted(w_tilde.begin(), w_tilde.end());
  std::sort(w_sorted.begin(), w_sorted.end(), std::greater<double>());

  std::vector<double> diff(m);
  for (std::size_t r = 0; r < m; ++r) diff[r] = z[idx[r]] - w_sorted[r];
  const std::vector<double> v = isotonic_nonincreasing(diff);

  std::vector<double> projection(m);
  for (std::size_t r = 0; r < m; ++r) projection[idx[r]] = z[idx[r]] - v[r];
  return projection;
}

std::vector<double> negated_reversed(const OwaWeights& weights) {
  const std::size_t m = weights.size();
  std::vector<double> w_tilde(m);
  for (std::size_t j = 0; j < m; ++j) w_tilde[j] = -weights.w[m - 1 - j];
  return w_tilde;
}

std::vector<double> smoothed_owa_gradient(const OwaWeights& weights,
                                          std::span<const double> x, double beta) {
  require(beta > 0.0, "smoothed_owa_gradient: beta must be positive");
  require(x.size() == weights.size(), "smoothed_owa_gradient: dimension mismatch");
  std::vector<double> scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] / beta;
  return project_permutahedron(negated_reversed(weights), scaled);
}

double smoothed_owa_value(const OwaWeights& weights, std::span<const double> x,
                          double beta) {
  const std::vector<double> mu = smoothed_owa_gradient(weights, x, beta);
  double dot = 0.0;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    dot += mu[i] * x[i];
    norm2 += mu[i] * mu[i];
  }
  return -(dot - 0.5 * beta * norm2);
}

}  // namespace owarank
