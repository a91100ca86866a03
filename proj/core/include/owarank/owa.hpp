#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace owarank {

// Weights of a fair ordered weighted average (generalized Gini welfare).
// Strictly decreasing, non-negative, summing to one: the largest weight
// multiplies the smallest criterion, which is what rewards equitable
// outcome vectors.
struct OwaWeights {
  std::vector<double> w;

  std::size_t size() const { return w.size(); }

  // Validates the fair-OWA invariants and takes ownership of the vector.
  static OwaWeights from(std::vector<double> weights);

  // w_j proportional to m + 1 - j, normalized.
  static OwaWeights linear(std::size_t m);

  // w_j proportional to 1 / j, normalized.
  static OwaWeights harmonic(std::size_t m);
};

enum class OwaSchedule { kLinear, kHarmonic };

OwaWeights make_owa_weights(OwaSchedule schedule, std::size_t m);
std::string to_string(OwaSchedule schedule);
OwaSchedule owa_schedule_from_string(const std::string& name);

// Smoothing sequence beta_k = beta0 / sqrt(k), k >= 1.
struct SmoothingSchedule {
  double beta0 = 1.0;
  double beta(int k) const;
};

// OWA_w(x) = w . sort_increasing(x).
double owa(const OwaWeights& weights, std::span<const double> x);

// OWA as min over all permutations sigma of w_sigma . x. Factorial
// enumeration, usable up to m = 8; exists as an independent cross-check
// of owa().
double owa_min_oracle(const OwaWeights& weights, std::span<const double> x);

// Exact euclidean projection onto { v : v_1 >= v_2 >= ... >= v_m } by the
// pool-adjacent-violators algorithm.
std::vector<double> isotonic_nonincreasing(std::span<const double> s);

// Euclidean projection of z onto the permutahedron C(w_tilde), the convex
// hull of all permutations of w_tilde. Reduces to isotonic regression on
// the decreasingly sorted coordinates.
std::vector<double> project_permutahedron(std::span<const double> w_tilde,
                                          std::span<const double> z);

// Modified weight vector -(w_m, ..., w_1) whose permutahedron carries the
// smoothing of the OWA term.
std::vector<double> negated_reversed(const OwaWeights& weights);

// Gradient of the Moreau envelope of the (support-function form of the)
// OWA at x with smoothing beta: the projection of x / beta onto
// C(w_tilde). Lies in C(w_tilde); the ascent direction of the smoothed
// concave OWA is its negation.
std::vector<double> smoothed_owa_gradient(const OwaWeights& weights,
                                          std::span<const double> x, double beta);

// Value of the smoothed concave OWA at x; converges to owa(weights, x)
// from above as beta -> 0.
double smoothed_owa_value(const OwaWeights& weights, std::span<const double> x,
                          double beta);

}  // namespace owarank
