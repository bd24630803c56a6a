// Stabilizer tableaux over F2 and uniform Clifford sampling. A tableau is
// synthesized into an {H, S, CNOT} gate list for statevector execution;
// sampling draws a uniformly random symplectic basis pair by pair and
// attaches uniform sign bits, which is uniform over the group mod phase.

#pragma once

#include <cstdint>
#include <vector>

#include "qds/rng.hpp"
#include "qds/statevector.hpp"

namespace qds {

// Pauli string on up to 64 qubits: bit q of x/z set means an X/Z factor on
// qubit q; both set means Y (phase folded into neg).
struct PauliRow {
  uint64_t x = 0;
  uint64_t z = 0;
  bool neg = false;
};

// Parity of the symplectic product; 1 means the strings anticommute.
bool anticommute(const PauliRow& a, const PauliRow& b);

// Rows xs[i] = U X_i U^dag and zs[i] = U Z_i U^dag for some Clifford U.
struct Tableau {
  int n = 0;
  std::vector<PauliRow> xs;
  std::vector<PauliRow> zs;

  bool operator==(const Tableau& other) const;
};

Tableau identity_tableau(int n);

// Uniform over n-qubit Cliffords mod global phase.
Tableau random_tableau(int n, Rng& rng);

struct CliffordCircuit {
  int n = 0;
  std::vector<Gate> gates;
};

// Gate list realizing the tableau, drawn from {H, S, CNOT} only; length
// is O(n^2). circuit_tableau(synthesize_circuit(t)) == t exactly.
std::vector<Gate> synthesize_circuit(const Tableau& tableau);

// Tableau of a gate list by Pauli conjugation. Accepts any Clifford gate
// kind; rejects generic gates.
Tableau circuit_tableau(const std::vector<Gate>& gates, int n);

CliffordCircuit sample_clifford(int n, Rng& rng, int cap = kDefaultQubitCap);

PureState apply_circuit(const PureState& state, const std::vector<Gate>& gates);

// Reversed gate list with each gate inverted; applying both is the identity.
std::vector<Gate> adjoint_circuit(const std::vector<Gate>& gates);

}  // namespace qds
