#include "qds/measurement.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "qds/error.hpp"
#include "qds/io.hpp"
#include "qds/parallel.hpp"

namespace qds {

namespace {

using json = nlohmann::json;

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

int ceil_log2(uint64_t k) { return std::bit_width(k - 1); }

SketchMeasurement clifford_from_seed(int n, uint64_t k, uint64_t seed,
                                     int cap) {
  if (n < 1) throw ArgumentError("need at least one qubit");
  if (n > cap)
    throw ResourceError("n = " + std::to_string(n) +
                        " exceeds the simulator cap of " + std::to_string(cap));
  if (!is_pow2(k))
    throw ArgumentError(
        "k = " + std::to_string(k) +
        " is not a power of two; Clifford binning needs one (nearest are " +
        std::to_string(uint64_t{1} << (ceil_log2(k) - 1)) + " and " +
        std::to_string(uint64_t{1} << ceil_log2(k)) + ")");
  if (k > (uint64_t{1} << n))
    throw ArgumentError("k exceeds the outcome space 2^n");
  SketchMeasurement m;
  m.mode = MeasurementMode::clifford;
  m.n = n;
  m.k = k;
  m.seed = seed;
  Rng local(seed);
  m.circuit = sample_clifford(n, local, cap);
  return m;
}

SketchMeasurement pgm_from_seed(int n, uint64_t k, uint64_t seed) {
  uint64_t d = uint64_t{1} << n;
  if (n < 1) throw ArgumentError("need at least one qubit");
  if (d > kPgmDimCap)
    throw ResourceError("PGM mode is capped at d = " +
                        std::to_string(kPgmDimCap));
  if (k < 1 || d % k != 0)
    throw ArgumentError("k = " + std::to_string(k) + " must divide d = " +
                        std::to_string(d));
  SketchMeasurement m;
  m.mode = MeasurementMode::pgm;
  m.n = n;
  m.k = k;
  m.seed = seed;

  Rng local(seed);
  double sigma = 1.0 / std::sqrt(2.0 * double(d));
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXcd g(d, d);
    for (uint64_t col = 0; col < d; ++col)
      for (uint64_t row = 0; row < d; ++row)
        g(row, col) = cplx{local.normal() * sigma, local.normal() * sigma};
    Eigen::MatrixXcd gamma = g * g.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma);
    if (es.eigenvalues().minCoeff() < 1e-12) continue;
    Eigen::VectorXd inv_sqrt = es.eigenvalues().array().rsqrt();
    Eigen::MatrixXcd root_inv = es.eigenvectors() *
                                inv_sqrt.asDiagonal() *
                                es.eigenvectors().adjoint();
    m.basis = root_inv * g;
    // Random grouping: permute columns, then bins take d/k consecutive ones.
    for (uint64_t i = d - 1; i > 0; --i) {
      uint64_t j = local.below(i + 1);
      if (j != i) m.basis.col(i).swap(m.basis.col(j));
    }
    return m;
  }
  throw std::runtime_error(
      "random Gaussian frame stayed singular after 3 attempts");
}

}  // namespace

uint64_t SketchMeasurement::bin(uint64_t outcome) const {
  if (mode == MeasurementMode::clifford) {
    int t = ceil_log2(k);
    return (outcome >> (n - t)) % k;
  }
  return outcome / (dim() / k);
}

SketchMeasurement build_clifford_measurement(int n, uint64_t k, Rng& rng,
                                             int cap) {
  return clifford_from_seed(n, k, rng.next_u64(), cap);
}

SketchMeasurement build_pgm_measurement(uint64_t d, uint64_t k, Rng& rng) {
  if (!is_pow2(d)) throw ArgumentError("d must be a power of two");
  return pgm_from_seed(std::bit_width(d) - 1, k, rng.next_u64());
}

SketchMeasurement rebuild_measurement(MeasurementMode mode, int n, uint64_t k,
                                      uint64_t seed, int cap) {
  return mode == MeasurementMode::clifford
             ? clifford_from_seed(n, k, seed, cap)
             : pgm_from_seed(n, k, seed);
}

uint64_t sketch_measure(const PureState& state, const SketchMeasurement& m,
                        Rng& rng) {
  if (state.num_qubits() != m.n)
    throw ArgumentError("state and measurement qubit counts differ");
  if (m.mode == MeasurementMode::clifford) {
    PureState evolved = apply_circuit(state, m.circuit.gates);
    return m.bin(born_sample(evolved.amplitudes(), rng));
  }
  uint64_t d = m.dim();
  Eigen::Map<const Eigen::VectorXcd> v(state.amplitudes().data(), d);
  Eigen::VectorXcd y = m.basis.adjoint() * v;
  double u = rng.uniform();
  double acc = 0.0;
  for (uint64_t t = 0; t + 1 < d; ++t) {
    acc += std::norm(y(t));
    if (u < acc) return m.bin(t);
  }
  return m.bin(d - 1);
}

std::vector<double> exact_outcome_distribution(const PureState& state,
                                               const SketchMeasurement& m) {
  if (state.num_qubits() != m.n)
    throw ArgumentError("state and measurement qubit counts differ");
  std::vector<double> probs(m.k, 0.0);
  uint64_t d = m.dim();
  if (m.mode == MeasurementMode::clifford) {
    PureState evolved = apply_circuit(state, m.circuit.gates);
    for (uint64_t i = 0; i < d; ++i) probs[m.bin(i)] += std::norm(evolved[i]);
  } else {
    Eigen::Map<const Eigen::VectorXcd> v(state.amplitudes().data(), d);
    Eigen::VectorXcd y = m.basis.adjoint() * v;
    for (uint64_t t = 0; t < d; ++t) probs[m.bin(t)] += std::norm(y(t));
  }
  return probs;
}

namespace {

// First-column probabilities |<0|U|0>|^2 and |<1|U|0>|^2 across sampled
// Cliffords; the shared kernel behind both moment validators.
void sample_first_column(int n, uint64_t trials, Rng& rng, int threads,
                         std::vector<double>& p0, std::vector<double>& p1) {
  if (trials < 1) throw ArgumentError("trials must be at least 1");
  p0.assign(trials, 0.0);
  p1.assign(trials, 0.0);
  uint64_t base = rng.next_u64();
  if (threads <= 0) threads = default_thread_count();
  Rng root(base);
  parallel_for(trials, threads, [&](uint64_t i) {
    Rng sub = root.substream(i);
    CliffordCircuit c = sample_clifford(n, sub);
    PureState col = apply_circuit(PureState::basis(n, 0), c.gates);
    p0[i] = std::norm(col[0]);
    p1[i] = std::norm(col[1]);
  });
}

}  // namespace

MomentStats validate_design_moments(int n, uint64_t k, uint64_t trials,
                                    Rng& rng, int threads) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  std::vector<double> p0, p1;
  sample_first_column(n, trials, rng, threads, p0, p1);
  MomentStats stats;
  stats.trials = trials;
  double s2 = 0.0, s4 = 0.0, sx = 0.0;
  for (uint64_t i = 0; i < trials; ++i) {
    s2 += p0[i];
    s4 += p0[i] * p0[i];
    sx += p0[i] * p1[i];
  }
  stats.est_second = s2 / double(trials);
  stats.est_fourth = s4 / double(trials);
  stats.est_cross = sx / double(trials);
  return stats;
}

double estimate_w_variance(int n, uint64_t trials, Rng& rng, int threads) {
  std::vector<double> p0, p1;
  sample_first_column(n, trials, rng, threads, p0, p1);
  double d = double(uint64_t{1} << n);
  double mean = 0.0;
  for (uint64_t i = 0; i < trials; ++i) mean += d * (p0[i] - p1[i]);
  mean /= double(trials);
  double ss = 0.0;
  for (uint64_t i = 0; i < trials; ++i) {
    double w = d * (p0[i] - p1[i]) - mean;
    ss += w * w;
  }
  return trials > 1 ? ss / double(trials - 1) : 0.0;
}

namespace {

const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::h: return "h";
    case GateKind::s: return "s";
    case GateKind::sdg: return "sdg";
    case GateKind::x: return "x";
    case GateKind::y: return "y";
    case GateKind::z: return "z";
    case GateKind::cnot: return "cnot";
    default: throw ArgumentError("gate kind has no file encoding");
  }
}

GateKind gate_kind(const std::string& name) {
  if (name == "h") return GateKind::h;
  if (name == "s") return GateKind::s;
  if (name == "sdg") return GateKind::sdg;
  if (name == "x") return GateKind::x;
  if (name == "y") return GateKind::y;
  if (name == "z") return GateKind::z;
  if (name == "cnot") return GateKind::cnot;
  throw ArgumentError("unknown gate name in measurement file: " + name);
}

}  // namespace

void save_measurement(const SketchMeasurement& m, const std::string& path) {
  json header;
  header["mode"] = m.mode == MeasurementMode::clifford ? "clifford" : "pgm";
  header["n"] = m.n;
  header["k"] = m.k;
  header["seed"] = m.seed;
  if (m.mode == MeasurementMode::clifford) {
    json gates = json::array();
    for (const auto& g : m.circuit.gates) {
      json e = json::array();
      e.push_back(gate_name(g.kind));
      if (g.kind == GateKind::cnot) e.push_back(g.control);
      e.push_back(g.target);
      gates.push_back(std::move(e));
    }
    header["gates"] = std::move(gates);
  }
  auto out = io::open_out(path);
  out << header.dump() << '\n';
  if (m.mode == MeasurementMode::pgm) {
    uint64_t d = m.dim();
    for (uint64_t col = 0; col < d; ++col)
      for (uint64_t row = 0; row < d; ++row) {
        io::write_le<double>(out, m.basis(row, col).real());
        io::write_le<double>(out, m.basis(row, col).imag());
      }
  }
  if (!out) throw ArgumentError("failed writing measurement file: " + path);
}

SketchMeasurement load_measurement(const std::string& path, int cap) {
  auto in = io::open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw ArgumentError("measurement file has no header: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw ArgumentError("measurement file header is not JSON: " + path);

  SketchMeasurement m;
  std::string mode = header.at("mode").get<std::string>();
  m.n = header.at("n").get<int>();
  m.k = header.at("k").get<uint64_t>();
  m.seed = header.at("seed").get<uint64_t>();
  if (m.n < 1) throw ArgumentError("measurement file has bad qubit count");
  if (m.n > cap)
    throw ResourceError("measurement file exceeds the simulator cap of " +
                        std::to_string(cap));
  if (mode == "clifford") {
    m.mode = MeasurementMode::clifford;
    m.circuit.n = m.n;
    for (const auto& e : header.at("gates")) {
      GateKind kind = gate_kind(e.at(0).get<std::string>());
      if (kind == GateKind::cnot)
        m.circuit.gates.push_back(Gate::cnot(e.at(1).get<int>(),
                                             e.at(2).get<int>()));
      else
        m.circuit.gates.push_back(Gate{kind, e.at(1).get<int>()});
    }
  } else if (mode == "pgm") {
    m.mode = MeasurementMode::pgm;
    uint64_t d = m.dim();
    m.basis.resize(d, d);
    for (uint64_t col = 0; col < d; ++col)
      for (uint64_t row = 0; row < d; ++row) {
        double re = io::read_le<double>(in);
        double im = io::read_le<double>(in);
        m.basis(row, col) = cplx{re, im};
      }
  } else {
    throw ArgumentError("unknown measurement mode: " + mode);
  }
  return m;
}

}  // namespace qds
