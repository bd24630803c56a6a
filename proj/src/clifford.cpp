#include "qds/clifford.hpp"

#include <bit>

#include "qds/error.hpp"

namespace qds {

namespace {

bool parity(uint64_t v) { return std::popcount(v) & 1; }

// Conjugation by one gate, postcomposed: row -> g row g^dag. Sign updates
// follow the usual stabilizer bookkeeping.
void conj_h(PauliRow& r, int q) {
  uint64_t m = uint64_t{1} << q;
  if ((r.x & m) && (r.z & m)) r.neg = !r.neg;
  uint64_t xb = r.x & m, zb = r.z & m;
  r.x = (r.x & ~m) | zb;
  r.z = (r.z & ~m) | xb;
}

void conj_s(PauliRow& r, int q) {
  uint64_t m = uint64_t{1} << q;
  if ((r.x & m) && (r.z & m)) r.neg = !r.neg;
  r.z ^= r.x & m;
}

void conj_sdg(PauliRow& r, int q) {
  uint64_t m = uint64_t{1} << q;
  r.z ^= r.x & m;
  if ((r.x & m) && (r.z & m)) r.neg = !r.neg;
}

void conj_cnot(PauliRow& r, int c, int t) {
  uint64_t mc = uint64_t{1} << c;
  uint64_t mt = uint64_t{1} << t;
  bool xc = r.x & mc, zc = r.z & mc, xt = r.x & mt, zt = r.z & mt;
  if (xc && zt && (xt == zc)) r.neg = !r.neg;
  if (xc) r.x ^= mt;
  if (zt) r.z ^= mc;
}

void conj_gate(PauliRow& r, const Gate& g) {
  uint64_t mt = uint64_t{1} << g.target;
  switch (g.kind) {
    case GateKind::h:
      conj_h(r, g.target);
      break;
    case GateKind::s:
      conj_s(r, g.target);
      break;
    case GateKind::sdg:
      conj_sdg(r, g.target);
      break;
    case GateKind::x:
      if (r.z & mt) r.neg = !r.neg;
      break;
    case GateKind::y:
      if (bool(r.x & mt) != bool(r.z & mt)) r.neg = !r.neg;
      break;
    case GateKind::z:
      if (r.x & mt) r.neg = !r.neg;
      break;
    case GateKind::cnot:
      conj_cnot(r, g.control, g.target);
      break;
    case GateKind::generic:
      throw ArgumentError("generic gates have no tableau");
  }
}

// Reduction driver: applies a gate to every row of a working tableau and
// records it, so the recorded list V satisfies V U = I when done.
struct Reducer {
  Tableau t;
  std::vector<Gate> applied;

  void apply(const Gate& g) {
    for (auto& r : t.xs) conj_gate(r, g);
    for (auto& r : t.zs) conj_gate(r, g);
    applied.push_back(g);
  }
  void h(int q) { apply(Gate::h(q)); }
  void s(int q) { apply(Gate::s(q)); }
  void cnot(int c, int x) { apply(Gate::cnot(c, x)); }
  void swap(int a, int b) {
    cnot(a, b);
    cnot(b, a);
    cnot(a, b);
  }
};

uint64_t bit(uint64_t v, int q) { return (v >> q) & 1; }

}  // namespace

bool anticommute(const PauliRow& a, const PauliRow& b) {
  return parity(a.x & b.z) != parity(a.z & b.x);
}

bool Tableau::operator==(const Tableau& other) const {
  if (n != other.n) return false;
  for (int i = 0; i < n; ++i) {
    const PauliRow &a = xs[i], &b = other.xs[i];
    const PauliRow &c = zs[i], &d = other.zs[i];
    if (a.x != b.x || a.z != b.z || a.neg != b.neg) return false;
    if (c.x != d.x || c.z != d.z || c.neg != d.neg) return false;
  }
  return true;
}

Tableau identity_tableau(int n) {
  if (n < 1 || n > 64) throw ArgumentError("bad qubit count for tableau");
  Tableau t;
  t.n = n;
  t.xs.resize(n);
  t.zs.resize(n);
  for (int i = 0; i < n; ++i) {
    t.xs[i].x = uint64_t{1} << i;
    t.zs[i].z = uint64_t{1} << i;
  }
  return t;
}

Tableau random_tableau(int n, Rng& rng) {
  if (n < 1 || n > 32) throw ArgumentError("bad qubit count for tableau");
  Tableau t;
  t.n = n;
  uint64_t mask = (n == 64) ? ~uint64_t{0} : (uint64_t{1} << n) - 1;

  auto random_row = [&]() {
    PauliRow r;
    r.x = rng.next_u64() & mask;
    r.z = rng.next_u64() & mask;
    return r;
  };
  // Projection onto the symplectic complement of the pairs fixed so far;
  // a uniform input stays uniform over the complement.
  auto project = [&](PauliRow v) {
    for (size_t j = 0; j < t.xs.size(); ++j) {
      if (anticommute(v, t.zs[j])) {
        v.x ^= t.xs[j].x;
        v.z ^= t.xs[j].z;
      }
      if (anticommute(v, t.xs[j])) {
        v.x ^= t.zs[j].x;
        v.z ^= t.zs[j].z;
      }
    }
    return v;
  };

  for (int i = 0; i < n; ++i) {
    PauliRow a;
    do {
      a = project(random_row());
    } while (a.x == 0 && a.z == 0);
    PauliRow b;
    do {
      b = project(random_row());
    } while (!anticommute(a, b));
    a.neg = rng.next_u64() & 1;
    b.neg = rng.next_u64() & 1;
    t.xs.push_back(a);
    t.zs.push_back(b);
  }
  return t;
}

std::vector<Gate> synthesize_circuit(const Tableau& tableau) {
  int n = tableau.n;
  Reducer red{tableau, {}};

  for (int i = 0; i < n; ++i) {
    // Make xs[i] = +-X_i. Rows i..n-1 have no support below qubit i:
    // they commute with the already-fixed +-X_j, +-Z_j.
    {
      PauliRow& r = red.t.xs[i];
      bool have_x = false;
      for (int q = i; q < n; ++q)
        if (bit(r.x, q)) have_x = true;
      if (!have_x) {
        for (int q = i; q < n; ++q)
          if (bit(red.t.xs[i].z, q)) {
            red.h(q);
            break;
          }
      }
      if (!bit(red.t.xs[i].x, i))
        for (int q = i + 1; q < n; ++q)
          if (bit(red.t.xs[i].x, q)) {
            red.swap(i, q);
            break;
          }
      for (int q = i + 1; q < n; ++q)
        if (bit(red.t.xs[i].x, q)) red.cnot(i, q);
      for (int q = i + 1; q < n; ++q)
        if (bit(red.t.xs[i].z, q)) {
          red.h(q);
          red.cnot(i, q);
        }
      if (bit(red.t.xs[i].z, i)) red.s(i);
    }
    // Make zs[i] = +-Z_i; z_i = 1 already since it anticommutes with xs[i].
    {
      for (int q = i + 1; q < n; ++q)
        if (bit(red.t.zs[i].x, q)) {
          if (bit(red.t.zs[i].z, q)) red.s(q);
          red.h(q);
        }
      for (int q = i + 1; q < n; ++q)
        if (bit(red.t.zs[i].z, q)) red.cnot(q, i);
      if (bit(red.t.zs[i].x, i)) {
        red.h(i);
        red.s(i);
        red.h(i);
      }
    }
  }
  // Sign fixes: conjugating by Z_i flips xs[i] only, by X_i flips zs[i] only.
  for (int i = 0; i < n; ++i) {
    if (red.t.xs[i].neg) {
      red.s(i);
      red.s(i);
    }
    if (red.t.zs[i].neg) {
      red.h(i);
      red.s(i);
      red.s(i);
      red.h(i);
    }
  }

  // applied, in order, satisfies g_m ... g_1 U = I, so U is the reversed
  // adjoints; S^dag is emitted as three S gates to stay in {H, S, CNOT}.
  std::vector<Gate> out;
  out.reserve(red.applied.size() * 2);
  for (auto it = red.applied.rbegin(); it != red.applied.rend(); ++it) {
    if (it->kind == GateKind::s) {
      out.push_back(*it);
      out.push_back(*it);
      out.push_back(*it);
    } else {
      out.push_back(*it);
    }
  }
  return out;
}

Tableau circuit_tableau(const std::vector<Gate>& gates, int n) {
  Tableau t = identity_tableau(n);
  for (const auto& g : gates) {
    if (g.target < 0 || g.target >= n ||
        (g.kind == GateKind::cnot && (g.control < 0 || g.control >= n)))
      throw ArgumentError("gate qubit out of range");
    for (auto& r : t.xs) conj_gate(r, g);
    for (auto& r : t.zs) conj_gate(r, g);
  }
  return t;
}

CliffordCircuit sample_clifford(int n, Rng& rng, int cap) {
  if (n < 1) throw ArgumentError("need at least one qubit");
  if (n > cap)
    throw ResourceError("n = " + std::to_string(n) +
                        " exceeds the simulator cap of " + std::to_string(cap));
  return CliffordCircuit{n, synthesize_circuit(random_tableau(n, rng))};
}

PureState apply_circuit(const PureState& state,
                        const std::vector<Gate>& gates) {
  int n = state.num_qubits();
  std::vector<cplx> amp = state.amplitudes();
  for (const auto& g : gates) apply_gate_inplace(amp, n, g);
  return PureState(n, std::move(amp));
}

std::vector<Gate> adjoint_circuit(const std::vector<Gate>& gates) {
  std::vector<Gate> out;
  out.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    Gate g = *it;
    switch (g.kind) {
      case GateKind::s:
        g.kind = GateKind::sdg;
        break;
      case GateKind::sdg:
        g.kind = GateKind::s;
        break;
      case GateKind::generic: {
        std::array<cplx, 4> u = g.unitary;
        g.unitary = {std::conj(u[0]), std::conj(u[2]), std::conj(u[1]),
                     std::conj(u[3])};
        break;
      }
      default:
        break;
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace qds
