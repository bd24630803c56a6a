// The database layer: records with sketches and shadow seeds under one
// shared measurement, plus the approximate operations built on them
// (threshold equality, indexed search, join, observable selection and
// sorting) and the swap-test and selection-based reference paths.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qds/lsh.hpp"
#include "qds/measurement.hpp"
#include "qds/observable.hpp"
#include "qds/shadow.hpp"
#include "qds/sketch.hpp"

namespace qds {

struct EngineConfig {
  double iota = 0.01;            // multiplicative sketch distortion budget
  double eps_hat_factor = 0.01;  // eps_hat = factor * eps at query time
  SketchFlavor flavor = SketchFlavor::l1;
  ShadowMode shadow_mode = ShadowMode::cst;
  uint64_t sketch_k = 64;      // outcome bins of the shared measurement
  SampleSpec sketch_samples;   // exact by default
  uint32_t seed_rows = 0;      // shadow rows built per ingest; 0 = none
  bool store_states = true;    // keep raw vectors for oracle audits
  int threads = 0;
};

struct StateRecord {
  uint32_t id = 0;
  std::map<std::string, std::string> metadata;
  std::optional<PureState> state;
  std::optional<SketchVector> sketch;
  std::optional<SeedMatrix> seed;
};

struct SwapTestResult {
  EqualityVerdict verdict = EqualityVerdict::not_equal;
  uint64_t trials = 0;
  double success_rate = 0.0;
  // The physical protocol burns its input copies; flagged so callers can
  // account for that cost.
  bool consumes_fresh_copies = true;
};

class Database {
 public:
  Database(SketchMeasurement measurement, CTauCalibration calibration,
           EngineConfig config, uint64_t seed);

  int num_qubits() const { return measurement_.n; }
  size_t size() const { return records_.size(); }
  const EngineConfig& config() const { return config_; }
  const SketchMeasurement& measurement() const { return measurement_; }
  const CTauCalibration& calibration() const { return calibration_; }
  uint64_t seed() const { return seed_; }
  const std::vector<StateRecord>& records() const { return records_; }
  const StateRecord& record(uint32_t id) const;

  // Builds sketch (and seed matrix if configured) eagerly; randomness is
  // keyed by the new id, so the record is a pure function of (db seed,
  // id, state).
  uint32_t ingest(const PureState& state,
                  std::map<std::string, std::string> metadata = {});

  // Feasibility gate shared by search/join: beta > 1 + iota + eps_hat/eps.
  double min_feasible_beta(double eps) const;

  // Multiplier turning raw sketch-space distance into a trace-distance
  // estimate: sqrt(d/k)*c_tau for l1, sqrt(d/2) for l2.
  double sketch_scale() const;

  // (Re)builds the LSH index for this (eps, beta); a no-op when the index
  // is current. The index seed is a pure function of (db seed, eps, beta).
  void ensure_index(double eps, double beta);
  const LshIndex* index() const {
    return index_ ? &*index_ : nullptr;
  }

  // Sketch q, then ANN-query the index at the sketch-space radius
  // (1+iota)*eps / scale with beta_nn = beta / (1+iota+eps_hat/eps).
  // Returned ids always satisfy the estimator bound est <= beta*eps.
  std::optional<uint32_t> search(const PureState& q, double eps, double beta,
                                 Rng& rng, AnnStats* stats = nullptr);
  std::optional<uint32_t> search_sketch(const SketchVector& q, double eps,
                                        double beta, AnnStats* stats = nullptr);

  // Estimates per-record expectations of m (mode per config), includes ids
  // with estimate >= eta - eps/2. Requires every seed matrix to have
  // required_samples(k, |M|, eps/3, 1/m^2) rows.
  std::vector<uint32_t> select(const LocalObservable& m, double eta,
                               double eps, Rng& rng) const;

  // Band selection via one shared estimate pass:
  // keep eta - 3eps/2 <= estimate < eta + 3eps/2.
  std::vector<uint32_t> select_equality(const LocalObservable& m, double eta,
                                        double eps, Rng& rng) const;

  // Ascending by estimated expectation (ties by id); seeds must support
  // +-eps/2 at delta = 1/m^2.
  std::vector<uint32_t> sort(const LocalObservable& m, double eps,
                             Rng& rng) const;

  // Rank-one reduction M = qq^dag estimated per record via shadows; only
  // workable when the whole register fits the locality cap.
  std::optional<uint32_t> search_via_selection(const PureState& q, double eps,
                                               double beta, Rng& rng) const;

  friend void save_database(const Database& db, const std::string& dir);
  friend Database load_database(const std::string& dir, int cap);

 private:
  std::vector<double> estimate_all(const LocalObservable& m, Rng& rng) const;
  double union_bound_delta() const;
  void require_seed_rows(const LocalObservable& m, double eps_unit,
                         double delta) const;

  SketchMeasurement measurement_;
  CTauCalibration calibration_;
  EngineConfig config_;
  uint64_t seed_ = 0;
  std::vector<StateRecord> records_;
  uint32_t next_id_ = 0;
  std::optional<LshIndex> index_;
  double index_eps_ = 0.0;
  double index_beta_ = 0.0;
};

// Pairs (idX, idY) whose sketch-estimated distance stays under beta*eps;
// both databases must share one measurement. x may alias y (self-join).
std::vector<std::pair<uint32_t, uint32_t>> join(Database& x, const Database& y,
                                                double eps, double beta);

// Bernoulli simulation of the swap-test protocol: success probability
// 1 - D^2/2 per fresh pair of copies, ceil(8 ln(1/delta)/eps^2) trials
// unless overridden, failure-rate threshold at the gap midpoint
// (1+beta^2) eps^2 / 4.
SwapTestResult swap_test_equality(const PureState& a, const PureState& b,
                                  double eps, double beta, double delta,
                                  Rng& rng, uint64_t trials_override = 0);

// Directory layout: manifest.json + measurement.qms + states/ sketches/
// seeds/ + index.qlx when built.
void save_database(const Database& db, const std::string& dir);
Database load_database(const std::string& dir, int cap = kDefaultQubitCap);

}  // namespace qds
