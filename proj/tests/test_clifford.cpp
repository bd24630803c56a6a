#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "qds/clifford.hpp"
#include "qds/error.hpp"
#include "qds/rng.hpp"
#include "qds/statevector.hpp"

using namespace qds;
using Eigen::MatrixXcd;

namespace {

// Dense matrix of a gate list built through the simulator, column by
// column. Independent of the tableau algebra under test.
MatrixXcd circuit_matrix(const std::vector<Gate>& gates, int n) {
  const uint64_t d = uint64_t{1} << n;
  MatrixXcd u(d, d);
  for (uint64_t j = 0; j < d; ++j) {
    PureState col = apply_circuit(PureState::basis(n, j), gates);
    for (uint64_t i = 0; i < d; ++i) u(i, j) = col[i];
  }
  return u;
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Hermitian Pauli-string matrix for a tableau row: tensor factors I, X, Z
// or Y per qubit, sign from the row.
MatrixXcd pauli_matrix(const PauliRow& row, int n) {
  const MatrixXcd eye = MatrixXcd::Identity(2, 2);
  MatrixXcd x(2, 2), z(2, 2), y(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (int q = 0; q < n; ++q) {
    const bool bx = (row.x >> q) & 1, bz = (row.z >> q) & 1;
    const MatrixXcd& f = bx ? (bz ? y : x) : (bz ? z : eye);
    // Qubit 0 is the most significant factor, matching the simulator.
    out = kron(out, f);
  }
  if (row.neg) out = -out;
  return out;
}

// Key fingerprint of a 1-qubit tableau for counting distinct Cliffords.
uint64_t tableau_key(const Tableau& t) {
  uint64_t k = 0;
  for (int i = 0; i < t.n; ++i) {
    k = k * 1024 + (t.xs[i].x << 5) + (t.xs[i].z << 3) + t.xs[i].neg;
    k = k * 1024 + (t.zs[i].x << 5) + (t.zs[i].z << 3) + t.zs[i].neg;
  }
  return k;
}

}  // namespace

TEST_CASE("anticommutation follows the symplectic product") {
  PauliRow x{1, 0, false}, z{0, 1, false}, y{1, 1, false};
  PauliRow xx{3, 0, false}, zz{0, 3, false};
  CHECK(anticommute(x, z));
  CHECK(anticommute(x, y));
  CHECK(anticommute(y, z));
  CHECK_FALSE(anticommute(x, x));
  CHECK_FALSE(anticommute(xx, zz));  // two anticommuting factors commute
}

TEST_CASE("tableau conjugation matches explicit matrix conjugation") {
  // For random circuits, the claimed images U X_q U^dag and U Z_q U^dag
  // must equal the matrix products computed densely.
  Rng rng(17);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 12; ++trial) {
      CliffordCircuit c = sample_clifford(n, rng);
      Tableau t = circuit_tableau(c.gates, n);
      MatrixXcd u = circuit_matrix(c.gates, n);
      for (int q = 0; q < n; ++q) {
        PauliRow xq{uint64_t{1} << q, 0, false};
        PauliRow zq{0, uint64_t{1} << q, false};
        MatrixXcd lhs_x = u * pauli_matrix(xq, n) * u.adjoint();
        MatrixXcd lhs_z = u * pauli_matrix(zq, n) * u.adjoint();
        CHECK((lhs_x - pauli_matrix(t.xs[q], n)).norm() < 1e-11);
        CHECK((lhs_z - pauli_matrix(t.zs[q], n)).norm() < 1e-11);
      }
    }
  }
}

TEST_CASE("single gates conjugate paulis correctly") {
  struct Case {
    Gate g;
    // expected images of X0 and Z0 on one qubit
    PauliRow x_img, z_img;
  };
  const Case cases[] = {
      {Gate::h(0), {0, 1, false}, {1, 0, false}},    // H: X<->Z
      {Gate::s(0), {1, 1, false}, {0, 1, false}},    // S: X->Y
      {Gate::sdg(0), {1, 1, true}, {0, 1, false}},   // Sdg: X->-Y
  };
  for (const Case& c : cases) {
    Tableau t = circuit_tableau({c.g}, 1);
    CHECK(t.xs[0].x == c.x_img.x);
    CHECK(t.xs[0].z == c.x_img.z);
    CHECK(t.xs[0].neg == c.x_img.neg);
    CHECK(t.zs[0].x == c.z_img.x);
    CHECK(t.zs[0].z == c.z_img.z);
    CHECK(t.zs[0].neg == c.z_img.neg);
  }
  // CNOT(0,1): X_c -> X_c X_t, Z_t -> Z_c Z_t.
  Tableau t = circuit_tableau({Gate::cnot(0, 1)}, 2);
  CHECK(t.xs[0].x == 3);
  CHECK(t.xs[0].z == 0);
  CHECK(t.zs[1].x == 0);
  CHECK(t.zs[1].z == 3);
}

TEST_CASE("circuit_tableau rejects generic gates and bad indices") {
  std::array<cplx, 4> eye{1.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(circuit_tableau({Gate::generic(0, eye)}, 1), ArgumentError);
  CHECK_THROWS_AS(circuit_tableau({Gate::h(2)}, 2), ArgumentError);
}

TEST_CASE("synthesis reproduces the tableau exactly") {
  Rng rng(23);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      Tableau t = random_tableau(n, rng);
      std::vector<Gate> gates = synthesize_circuit(t);
      CHECK(circuit_tableau(gates, n) == t);
    }
  }
}

TEST_CASE("synthesized gate count stays quadratic") {
  Rng rng(31);
  for (int n : {2, 4, 8}) {
    size_t worst = 0;
    for (int trial = 0; trial < 40; ++trial) {
      Tableau t = random_tableau(n, rng);
      worst = std::max(worst, synthesize_circuit(t).size());
    }
    CHECK(worst <= size_t(30 * n * n + 40));
  }
}

TEST_CASE("one-qubit sampling is uniform over all 24 cliffords") {
  Rng rng(41);
  std::map<uint64_t, int> counts;
  const int trials = 48000;
  for (int t = 0; t < trials; ++t) {
    CliffordCircuit c = sample_clifford(1, rng);
    ++counts[tableau_key(circuit_tableau(c.gates, 1))];
  }
  CHECK(counts.size() == 24);
  for (const auto& [key, c] : counts) {
    CHECK(c > trials / 24 * 0.80);
    CHECK(c < trials / 24 * 1.20);
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  Rng a(5), b(5);
  Tableau ta = random_tableau(4, a);
  Tableau tb = random_tableau(4, b);
  CHECK(ta == tb);
  Tableau tc = random_tableau(4, a);  // stream advanced
  CHECK_FALSE(tc == ta);
}

TEST_CASE("adjoint circuits undo their originals") {
  Rng rng(53);
  for (int trial = 0; trial < 8; ++trial) {
    CliffordCircuit c = sample_clifford(4, rng);
    PureState s = random_haar_state(4, rng);
    PureState round =
        apply_circuit(apply_circuit(s, c.gates), adjoint_circuit(c.gates));
    CHECK(trace_distance(s, round) < 1e-9);
  }
}

TEST_CASE("clifford sampling respects the qubit cap") {
  Rng rng(2);
  CHECK_THROWS_AS(sample_clifford(kDefaultQubitCap + 1, rng), ResourceError);
}
