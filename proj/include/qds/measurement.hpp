// k-outcome sketching measurements. Clifford mode applies a sampled
// circuit and bins the first ceil(log2 k) qubits mod k; PGM mode
// orthonormalizes a random Gaussian frame into an exact basis and groups
// d/k consecutive columns per bin. Both rebuild deterministically from
// (mode, n, k, seed).

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qds/clifford.hpp"
#include "qds/rng.hpp"
#include "qds/statevector.hpp"

namespace qds {

inline constexpr uint64_t kPgmDimCap = 1024;

enum class MeasurementMode : uint8_t { clifford, pgm };

struct SketchMeasurement {
  MeasurementMode mode = MeasurementMode::clifford;
  int n = 0;
  uint64_t k = 1;
  uint64_t seed = 0;
  CliffordCircuit circuit;    // clifford mode
  Eigen::MatrixXcd basis;     // pgm mode; column t is gamma_t, pre-permuted

  uint64_t dim() const { return uint64_t{1} << n; }
  // Clifford mode: mod-k of the first ceil(log2 k) qubits of the outcome.
  // PGM mode: outcome is a basis index t; bins are d/k consecutive columns.
  uint64_t bin(uint64_t outcome) const;
};

SketchMeasurement build_clifford_measurement(int n, uint64_t k, Rng& rng,
                                             int cap = kDefaultQubitCap);

SketchMeasurement build_pgm_measurement(uint64_t d, uint64_t k, Rng& rng);

uint64_t sketch_measure(const PureState& state, const SketchMeasurement& m,
                        Rng& rng);

std::vector<double> exact_outcome_distribution(const PureState& state,
                                               const SketchMeasurement& m);

struct MomentStats {
  double est_second = 0.0;  // E |<1|gamma>|^2,          target 1/d
  double est_fourth = 0.0;  // E |<1|gamma>|^4,          target 2/(d(d+1))
  double est_cross = 0.0;   // E |U_11|^2 |U_21|^2,      target 1/(d(d+1))
  uint64_t trials = 0;
};

// Monte Carlo over sampled Clifford first columns; matches the Haar
// values above because the Clifford group is a 2-design.
MomentStats validate_design_moments(int n, uint64_t k, uint64_t trials,
                                    Rng& rng, int threads = 0);

// Sample variance of W = d(|<1|gamma>|^2 - |<2|gamma>|^2); tends to
// 2d/(d+1).
double estimate_w_variance(int n, uint64_t trials, Rng& rng, int threads = 0);

// One-line JSON header {mode, n, k, seed, gates?}; PGM appends the raw
// basis matrix. The file is a cache: (mode, n, k, seed) rebuilds it.
void save_measurement(const SketchMeasurement& m, const std::string& path);
SketchMeasurement load_measurement(const std::string& path,
                                   int cap = kDefaultQubitCap);

// Rebuild from header fields; used to honor the cache contract.
SketchMeasurement rebuild_measurement(MeasurementMode mode, int n, uint64_t k,
                                      uint64_t seed,
                                      int cap = kDefaultQubitCap);

}  // namespace qds
