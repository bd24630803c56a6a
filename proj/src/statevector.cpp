#include "qds/statevector.hpp"

#include <algorithm>
#include <cmath>

#include "qds/error.hpp"
#include "qds/io.hpp"

namespace qds {

namespace {

double norm_sq(const std::vector<cplx>& amp) {
  double s = 0.0;
  for (const auto& a : amp) s += std::norm(a);
  return s;
}

void check_qubit(int q, int n) {
  if (q < 0 || q >= n)
    throw ArgumentError("qubit index " + std::to_string(q) +
                        " out of range for " + std::to_string(n) + " qubits");
}

}  // namespace

PureState::PureState(int num_qubits, std::vector<cplx> amplitudes)
    : num_qubits_(num_qubits), amp_(std::move(amplitudes)) {
  if (num_qubits_ < 1)
    throw ArgumentError("state needs at least one qubit");
  if (num_qubits_ >= 63 || amp_.size() != (uint64_t{1} << num_qubits_))
    throw ArgumentError("amplitude count does not equal 2^n");
  if (std::abs(norm_sq(amp_) - 1.0) > kNormTolerance)
    throw ArgumentError("state is not unit norm");
}

PureState PureState::basis(int num_qubits, uint64_t index) {
  if (num_qubits < 1 || num_qubits >= 63)
    throw ArgumentError("bad qubit count");
  uint64_t d = uint64_t{1} << num_qubits;
  if (index >= d) throw ArgumentError("basis index out of range");
  std::vector<cplx> amp(d, cplx{0.0, 0.0});
  amp[index] = cplx{1.0, 0.0};
  return PureState(num_qubits, std::move(amp));
}

Gate Gate::generic(int q, const std::array<cplx, 4>& u) {
  // U†U = I within 1e-12.
  cplx c00 = std::conj(u[0]) * u[0] + std::conj(u[2]) * u[2];
  cplx c01 = std::conj(u[0]) * u[1] + std::conj(u[2]) * u[3];
  cplx c11 = std::conj(u[1]) * u[1] + std::conj(u[3]) * u[3];
  if (std::abs(c00 - 1.0) > 1e-12 || std::abs(c01) > 1e-12 ||
      std::abs(c11 - 1.0) > 1e-12)
    throw ArgumentError("generic gate matrix is not unitary");
  Gate g{GateKind::generic, q};
  g.unitary = u;
  return g;
}

void apply_1q_inplace(std::vector<cplx>& amp, int n, int qubit,
                      const std::array<cplx, 4>& u) {
  uint64_t stride = uint64_t{1} << (n - 1 - qubit);
  uint64_t d = amp.size();
  for (uint64_t base = 0; base < d; base += stride * 2) {
    for (uint64_t i = base; i < base + stride; ++i) {
      cplx a0 = amp[i];
      cplx a1 = amp[i + stride];
      amp[i] = u[0] * a0 + u[1] * a1;
      amp[i + stride] = u[2] * a0 + u[3] * a1;
    }
  }
}

void apply_gate_inplace(std::vector<cplx>& amp, int n, const Gate& gate) {
  check_qubit(gate.target, n);
  constexpr double r = 0.70710678118654752440;
  switch (gate.kind) {
    case GateKind::h:
      apply_1q_inplace(amp, n, gate.target, {cplx{r}, cplx{r}, cplx{r}, cplx{-r}});
      break;
    case GateKind::s:
      apply_1q_inplace(amp, n, gate.target,
                       {cplx{1}, cplx{0}, cplx{0}, cplx{0, 1}});
      break;
    case GateKind::sdg:
      apply_1q_inplace(amp, n, gate.target,
                       {cplx{1}, cplx{0}, cplx{0}, cplx{0, -1}});
      break;
    case GateKind::x:
      apply_1q_inplace(amp, n, gate.target, {cplx{0}, cplx{1}, cplx{1}, cplx{0}});
      break;
    case GateKind::y:
      apply_1q_inplace(amp, n, gate.target,
                       {cplx{0}, cplx{0, -1}, cplx{0, 1}, cplx{0}});
      break;
    case GateKind::z:
      apply_1q_inplace(amp, n, gate.target,
                       {cplx{1}, cplx{0}, cplx{0}, cplx{-1}});
      break;
    case GateKind::generic:
      apply_1q_inplace(amp, n, gate.target, gate.unitary);
      break;
    case GateKind::cnot: {
      check_qubit(gate.control, n);
      if (gate.control == gate.target)
        throw ArgumentError("cnot control equals target");
      uint64_t cbit = uint64_t{1} << (n - 1 - gate.control);
      uint64_t tbit = uint64_t{1} << (n - 1 - gate.target);
      for (uint64_t i = 0; i < amp.size(); ++i)
        if ((i & cbit) && !(i & tbit)) std::swap(amp[i], amp[i | tbit]);
      break;
    }
  }
}

PureState apply_gate(const PureState& state, const Gate& gate) {
  std::vector<cplx> amp = state.amplitudes();
  apply_gate_inplace(amp, state.num_qubits(), gate);
  return PureState(state.num_qubits(), std::move(amp));
}

cplx inner_product(const PureState& a, const PureState& b) {
  if (a.num_qubits() != b.num_qubits())
    throw ArgumentError("inner product needs equal qubit counts");
  cplx acc{0.0, 0.0};
  const auto& va = a.amplitudes();
  const auto& vb = b.amplitudes();
  for (uint64_t i = 0; i < va.size(); ++i) acc += std::conj(va[i]) * vb[i];
  return acc;
}

double trace_distance(const PureState& a, const PureState& b) {
  double fid = std::norm(inner_product(b, a));
  return std::sqrt(std::clamp(1.0 - fid, 0.0, 1.0));
}

PureState random_haar_state(int n, Rng& rng, int cap) {
  if (n < 1) throw ArgumentError("state needs at least one qubit");
  if (n > cap)
    throw ResourceError("n = " + std::to_string(n) +
                        " exceeds the simulator cap of " + std::to_string(cap) +
                        " qubits");
  uint64_t d = uint64_t{1} << n;
  std::vector<cplx> amp(d);
  double s = 0.0;
  for (auto& a : amp) {
    a = cplx{rng.normal(), rng.normal()};
    s += std::norm(a);
  }
  double inv = 1.0 / std::sqrt(s);
  for (auto& a : amp) a *= inv;
  return PureState(n, std::move(amp));
}

uint64_t born_sample(const std::vector<cplx>& amplitudes, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  uint64_t last = amplitudes.size() - 1;
  for (uint64_t i = 0; i < last; ++i) {
    acc += std::norm(amplitudes[i]);
    if (u < acc) return i;
  }
  return last;
}

std::vector<uint64_t> measure_computational(const PureState& state,
                                            uint64_t shots, Rng& rng) {
  if (shots < 1) throw ArgumentError("shots must be at least 1");
  uint64_t d = state.dim();
  std::vector<double> cdf(d);
  double acc = 0.0;
  for (uint64_t i = 0; i < d; ++i) {
    acc += std::norm(state[i]);
    cdf[i] = acc;
  }
  std::vector<uint64_t> counts(d, 0);
  for (uint64_t s = 0; s < shots; ++s) {
    double u = rng.uniform() * acc;
    uint64_t i =
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (i >= d) i = d - 1;
    ++counts[i];
  }
  return counts;
}

void save_state(const PureState& state, const std::string& path) {
  auto out = io::open_out(path);
  io::write_magic(out, "QDS1");
  io::write_le<uint8_t>(out, static_cast<uint8_t>(state.num_qubits()));
  for (const auto& a : state.amplitudes()) {
    io::write_le<double>(out, a.real());
    io::write_le<double>(out, a.imag());
  }
  if (!out) throw ArgumentError("failed writing state file: " + path);
}

PureState load_state(const std::string& path, int cap) {
  auto in = io::open_in(path);
  io::expect_magic(in, "QDS1", "state");
  int n = io::read_le<uint8_t>(in);
  if (n < 1) throw ArgumentError("state file has bad qubit count");
  if (n > cap)
    throw ResourceError("state file exceeds the simulator cap of " +
                        std::to_string(cap) + " qubits");
  uint64_t d = uint64_t{1} << n;
  std::vector<cplx> amp(d);
  for (uint64_t i = 0; i < d; ++i) {
    double re = io::read_le<double>(in);
    double im = io::read_le<double>(in);
    amp[i] = cplx{re, im};
  }
  return PureState(n, std::move(amp));
}

}  // namespace qds
