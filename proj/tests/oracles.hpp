#pragma once

// Independent reference implementations used only by tests. Everything
// here is deliberately brute force and shares no code path with the
// library implementations it checks.

#include <span>
#include <vector>

#include "owarank/owa.hpp"
#include "owarank/policy.hpp"
#include "owarank/rng.hpp"

namespace owarank::oracles {

// Repeated-pooling isotonic regression, O(m^2): scan for an adjacent
// ordering violation, merge the two blocks, restart.
std::vector<double> naive_isotonic_nonincreasing(std::span<const double> s);

// All permutations of {0, ..., m-1}.
std::vector<std::vector<int>> all_permutations(int m);

// min over y of max_sigma <w_tilde_sigma, y> + ||y - x||^2 / (2 beta),
// solved by multiscale grid refinement (value accurate to ~1e-8). This is
// the Moreau envelope whose gradient smoothed_owa_gradient claims to be.
double support_envelope_value(std::span<const double> w_tilde,
                              std::span<const double> x, double beta);

// Central finite differences of support_envelope_value at x.
std::vector<double> support_envelope_fd_gradient(std::span<const double> w_tilde,
                                                 std::span<const double> x,
                                                 double beta, double step = 1e-3);

// Exhaustive argmax of c^T P b over all n! permutation matrices.
Permutation best_vertex_exhaustive(std::span<const double> coefficients,
                                   const PositionBias& bias);

// Strictly decreasing random fair-OWA weights.
OwaWeights random_owa_weights(int m, Rng& rng);

}  // namespace owarank::oracles
