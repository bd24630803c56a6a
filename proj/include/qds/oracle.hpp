// Exact brute-force references used by tests and audits: linear-scan
// search, the five-distance distortion report for a state pair, density
// vectorization, and the full-basis total-variation sanity check. None of
// these run on query paths.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qds/rng.hpp"
#include "qds/statevector.hpp"

namespace qds {

// All ids whose exact trace distance to q is at most eps, sorted.
std::vector<uint32_t> linear_scan_search(
    const std::vector<std::pair<uint32_t, PureState>>& states,
    const PureState& q, double eps);

// A state at exact trace distance dist from anchor (dist in [0, 1]): a
// random unit vector orthogonal to anchor mixed in with weight dist.
PureState planted_near(const PureState& anchor, double dist, Rng& rng);

struct DistortionReport {
  double D = 0.0;         // trace distance
  double L1 = 0.0;        // l1 between amplitude vectors (complex modulus)
  double L2 = 0.0;        // l2 between amplitude vectors
  double L1_prime = 0.0;  // l1 between outcome probability vectors
  double L2_prime = 0.0;  // l2 between outcome probability vectors
};

DistortionReport distortion_table(const PureState& a, const PureState& b);

// Real and imaginary parts of phi phi^dag, row-major interleaved; length
// 2d^2, unit l2 norm, and l2 between two outputs equals sqrt(2) * D.
std::vector<double> density_vectorize(const PureState& phi);

struct FullBasisReport {
  uint64_t trials = 0;
  double min_ratio = 0.0;   // empirical lower constant c
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  bool upper_bound_ok = false;  // TV <= D held in every trial
};

// Random full orthonormal bases (d <= 64): the total-variation distance
// between the two exact d-outcome distributions never exceeds the trace
// distance; the lower constant is reported, not asserted.
FullBasisReport full_basis_distance_check(uint64_t d, uint64_t pairs,
                                          Rng& rng);

}  // namespace qds
