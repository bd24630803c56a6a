// Length-k vector sketches of pure states and the calibrated estimators
// turning sketch-space distances back into trace-distance estimates, plus
// the threshold equality test built on them.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qds/measurement.hpp"
#include "qds/rng.hpp"
#include "qds/statevector.hpp"

namespace qds {

// Shipped default for the L1 scale constant; the Gaussian-limit value is
// sqrt(pi)/2 ~ 0.8862. Per-(d,k) calibration can replace it.
inline constexpr double kDefaultCTau = 0.8862;

// Estimates may exceed 1 by distortion; clamp at 1 plus this slack.
inline constexpr double kEstimateSlack = 0.01;

struct MeasurementId {
  MeasurementMode mode = MeasurementMode::clifford;
  int n = 0;
  uint64_t k = 1;
  uint64_t seed = 0;

  bool operator==(const MeasurementId&) const = default;
};

MeasurementId id_of(const SketchMeasurement& m);

enum class SketchFlavor : uint8_t { l1, l2 };

struct SampleSpec {
  bool exact = true;
  uint64_t samples = 0;

  static SampleSpec exact_mode() { return {true, 0}; }
  static SampleSpec empirical(uint64_t s) { return {false, s}; }
};

struct SketchVector {
  SketchFlavor flavor = SketchFlavor::l1;
  uint64_t k = 0;
  uint64_t d = 0;
  uint64_t samples = 0;  // 0 means exact
  MeasurementId measurement_id;
  std::vector<double> probs;
};

struct SketchParams {
  double iota = 0.01;     // multiplicative distortion
  double delta = 0.05;    // failure probability
  double c_design = 1.0;  // constant in k = ceil(c log(1/delta) / iota^2)
  double eps_hat = 0.001; // additive budget granted to empirical sampling
  SampleSpec samples;

  void validate() const;
  // Rounded up to a power of two, at least 2.
  uint64_t derive_k() const;
};

// Copies needed so empirical sketches stay within eps_hat additive error.
uint64_t samples_rule_basic(uint64_t d, double eps_hat, double c_s = 4.0);
uint64_t samples_rule_delta(uint64_t d, double eps_hat, double delta,
                            double c_s = 4.0);
// The larger of the two rules; the package default.
uint64_t default_samples(uint64_t d, double eps_hat, double delta,
                         double c_s = 4.0);

// Exact mode evaluates the outcome distribution directly; empirical mode
// draws spec.samples outcomes from it, which is statistically identical to
// independent per-copy measurements without re-evolving the state per shot.
SketchVector build_sketch(const PureState& state, const SketchMeasurement& m,
                          SketchFlavor flavor, const SampleSpec& spec,
                          Rng& rng);

struct CTauCalibration {
  uint64_t d = 0;
  uint64_t k = 0;
  double c_tau = kDefaultCTau;
  uint64_t trials = 0;  // 0 means the shipped default, not a measured fit
  double ci_halfwidth = 0.0;
};

CTauCalibration default_calibration(uint64_t d, uint64_t k);

// Monte Carlo fit of c_tau: random Haar pairs and Clifford measurements,
// R = sqrt(d/k) * l1 / D per draw, c_tau = 1 / mean(R). Pairs closer than
// D = 0.05 are resampled.
CTauCalibration calibrate_c_tau(uint64_t d, uint64_t k, uint64_t trials,
                                Rng& rng, int threads = 0);

// sqrt(d/k) * c_tau * l1(a, b), clamped to [0, 1 + slack].
double estimate_D_l1(const SketchVector& a, const SketchVector& b,
                     const CTauCalibration& cal);

// sqrt(d/2) * l2(a, b), clamped likewise; needs no constant.
double estimate_D_l2(const SketchVector& a, const SketchVector& b);

enum class EqualityVerdict : uint8_t { equal, not_equal };

// Threshold test at (1+beta)*eps/2. Feasibility demands
// beta > 1 + iota + eps_hat/eps, else an argument error names the minimum.
EqualityVerdict equality_test(const SketchVector& a, const SketchVector& b,
                              double eps, double beta,
                              const SketchParams& params,
                              const CTauCalibration& cal);

// Sketch file: magic "QSK1", flavor byte, u32 k, u64 d, u64 s,
// measurement id (mode byte, i32 n, u64 k, u64 seed), k float64 probs.
void save_sketch(const SketchVector& v, const std::string& path);
SketchVector load_sketch(const std::string& path);

// JSON cache of calibrations keyed by (d, k).
std::optional<CTauCalibration> cached_calibration(const std::string& path,
                                                  uint64_t d, uint64_t k);
void store_calibration(const std::string& path, const CTauCalibration& cal);

}  // namespace qds
