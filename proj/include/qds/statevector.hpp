// Dense simulation of n-qubit pure states: elementary gates, Born-rule
// sampling, inner products and trace distance.
//
// Convention: qubit 0 is the most significant bit of a basis index, so the
// basis label |x_0 x_1 ... x_{n-1}> has decimal index sum x_j << (n-1-j).

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qds/rng.hpp"

namespace qds {

using cplx = std::complex<double>;

inline constexpr int kDefaultQubitCap = 16;
inline constexpr double kNormTolerance = 1e-9;

class PureState {
 public:
  // Takes ownership of the amplitudes; rejects wrong length or norm drift
  // beyond 1e-9. Never renormalizes silently.
  PureState(int num_qubits, std::vector<cplx> amplitudes);

  static PureState basis(int num_qubits, uint64_t index);

  int num_qubits() const { return num_qubits_; }
  uint64_t dim() const { return uint64_t{1} << num_qubits_; }
  const std::vector<cplx>& amplitudes() const { return amp_; }
  const cplx& operator[](uint64_t i) const { return amp_[i]; }

 private:
  int num_qubits_;
  std::vector<cplx> amp_;
};

enum class GateKind : uint8_t { h, s, sdg, x, y, z, generic, cnot };

struct Gate {
  GateKind kind;
  int target = 0;
  int control = 0;                 // cnot only
  std::array<cplx, 4> unitary{};   // generic only, row-major

  static Gate h(int q) { return {GateKind::h, q}; }
  static Gate s(int q) { return {GateKind::s, q}; }
  static Gate sdg(int q) { return {GateKind::sdg, q}; }
  static Gate x(int q) { return {GateKind::x, q}; }
  static Gate y(int q) { return {GateKind::y, q}; }
  static Gate z(int q) { return {GateKind::z, q}; }
  // Rejects matrices that fail U†U = I beyond 1e-12.
  static Gate generic(int q, const std::array<cplx, 4>& u);
  static Gate cnot(int control, int target) {
    return {GateKind::cnot, target, control};
  }
};

PureState apply_gate(const PureState& state, const Gate& gate);

cplx inner_product(const PureState& a, const PureState& b);

// sqrt(1 - |<b|a>|^2), clamped to [0, 1].
double trace_distance(const PureState& a, const PureState& b);

PureState random_haar_state(int n, Rng& rng, int cap = kDefaultQubitCap);

// shots i.i.d. Born samples; returns counts over all d outcomes.
std::vector<uint64_t> measure_computational(const PureState& state,
                                            uint64_t shots, Rng& rng);

// One Born sample of the full outcome index.
uint64_t born_sample(const std::vector<cplx>& amplitudes, Rng& rng);

// State file: magic "QDS1", u8 n, then 2^n little-endian (f64 re, f64 im).
void save_state(const PureState& state, const std::string& path);
PureState load_state(const std::string& path, int cap = kDefaultQubitCap);

// In-place action of a 2x2 unitary (row-major) on one qubit of a raw
// amplitude vector. Shared by the simulator layers; does no validation.
void apply_1q_inplace(std::vector<cplx>& amp, int n, int qubit,
                      const std::array<cplx, 4>& u);

// In-place action of one gate; validates qubit indices but not the norm.
void apply_gate_inplace(std::vector<cplx>& amp, int n, const Gate& gate);

}  // namespace qds
