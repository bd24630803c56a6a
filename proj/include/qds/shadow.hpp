// Classical-shadow machinery: seed matrices recording randomized
// single-qubit measurements (basis set {I, H, S†H}), the classical
// shadow estimator for <phi|M|phi>, and the sampled single-shot variant
// that mimics measuring M on reconstructed product states.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qds/observable.hpp"
#include "qds/rng.hpp"
#include "qds/statevector.hpp"

namespace qds {

class SeedMatrix {
 public:
  SeedMatrix(uint32_t rows, uint16_t n);

  uint32_t rows() const { return rows_; }
  uint16_t n() const { return n_; }

  struct Entry {
    uint8_t b;  // measured bit
    uint8_t u;  // basis index into {I, H, S†H}
  };

  Entry at(uint32_t row, uint32_t qubit) const;
  void set(uint32_t row, uint32_t qubit, Entry e);

  const std::vector<uint8_t>& packed() const { return bits_; }
  bool operator==(const SeedMatrix& other) const = default;

 private:
  uint32_t rows_ = 0;
  uint16_t n_ = 0;
  std::vector<uint8_t> bits_;  // 3 bits per entry, row-major
};

// Per row: a uniform basis draw per qubit, one simulated measurement of a
// fresh copy, outcomes recorded bitwise. Deterministic given the rng seed.
SeedMatrix build_seed_matrix(const PureState& state, uint32_t rows, Rng& rng,
                             int threads = 0);

enum class ShadowMode : uint8_t { cst, qcqc };

struct ShadowEstimate {
  double value = 0.0;
  uint64_t rows_used = 0;
  ShadowMode mode = ShadowMode::cst;
  double std_error = 0.0;  // bootstrap, diagnostic only
};

// Mean over rows of tr(M rho_hat_i) with rho_hat_i the tensor product of
// per-qubit one-shot reconstructions 3vv† - I. Evaluated term by term, so
// a scalar term contributes exactly its coefficient.
ShadowEstimate estimate_cst(const SeedMatrix& seed, const LocalObservable& m,
                            int threads = 0);

// Single-shot resampling estimator: per row flip each recorded bit
// with probability 1/3 (weight -1), rebuild the product state, sample M's
// eigenbasis, and scale by 3^k. Every sample obeys |S_i| <= 3^k ||M||inf.
ShadowEstimate estimate_qcqc(const SeedMatrix& seed, const LocalObservable& m,
                             Rng& rng, int threads = 0);

// The inverse measurement channel on one qubit: rho -> 3 rho - I.
Eigen::Matrix2cd gamma0_inverse(const Eigen::Matrix2cd& rho);

// ceil(4^k or 9^k * inf_norm^2 * ln(1/delta) / eps^2).
uint64_t required_samples(int k, double inf_norm, double eps, double delta,
                          ShadowMode mode);

// Product of per-qubit reconstruction traces over `support`; exactly 1.
double rho_hat_trace(const SeedMatrix& seed, uint32_t row,
                     const std::vector<int>& support);

// Seed file: magic "QSH1", u32 N, u16 n, packed entries row-major.
void save_seed_matrix(const SeedMatrix& seed, const std::string& path);
SeedMatrix load_seed_matrix(const std::string& path);

}  // namespace qds
