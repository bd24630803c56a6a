#include "qds/shadow.hpp"

#include <cmath>
#include <stdexcept>

#include "qds/error.hpp"
#include "qds/io.hpp"
#include "qds/parallel.hpp"

namespace qds {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One-shot reconstruction B = 3 v v^dag - I for v = U_u |b>, indexed
// [u][b], row-major entries. All entries are exact in binary floating
// point, so tr(B) = 1 holds bitwise.
const std::array<cplx, 4>& b_table(uint8_t u, uint8_t b) {
  static const std::array<std::array<std::array<cplx, 4>, 2>, 3> tab = {{
      {{{cplx{2}, cplx{0}, cplx{0}, cplx{-1}},
        {cplx{-1}, cplx{0}, cplx{0}, cplx{2}}}},
      {{{cplx{0.5}, cplx{1.5}, cplx{1.5}, cplx{0.5}},
        {cplx{0.5}, cplx{-1.5}, cplx{-1.5}, cplx{0.5}}}},
      {{{cplx{0.5}, cplx{0, 1.5}, cplx{0, -1.5}, cplx{0.5}},
        {cplx{0.5}, cplx{0, -1.5}, cplx{0, 1.5}, cplx{0.5}}}},
  }};
  return tab[u][b];
}

// Amplitudes of U_u |c>.
const std::array<cplx, 2>& v_table(uint8_t u, uint8_t c) {
  static const std::array<std::array<std::array<cplx, 2>, 2>, 3> tab = {{
      {{{cplx{1}, cplx{0}}, {cplx{0}, cplx{1}}}},
      {{{cplx{kInvSqrt2}, cplx{kInvSqrt2}},
        {cplx{kInvSqrt2}, cplx{-kInvSqrt2}}}},
      {{{cplx{kInvSqrt2}, cplx{0, -kInvSqrt2}},
        {cplx{kInvSqrt2}, cplx{0, kInvSqrt2}}}},
  }};
  return tab[u][c];
}

// Mean with the first value as the offset; exact on constant input.
double shifted_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x - v[0];
  return v[0] + s / double(v.size());
}

double bootstrap_std_error(const std::vector<double>& vals) {
  size_t n = vals.size();
  if (n < 2) return 0.0;
  constexpr int kResamples = 200;
  Rng boot(0xb0075ull);  // internal, diagnostic only
  std::vector<double> means(kResamples);
  for (int r = 0; r < kResamples; ++r) {
    Rng sub = boot.substream(r);
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += vals[sub.below(n)];
    means[r] = s / double(n);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= kResamples;
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss / (kResamples - 1));
}

void check_support(const SeedMatrix& seed, const LocalObservable& m) {
  if (!m.support().empty() && m.support().back() >= int(seed.n()))
    throw ArgumentError("observable support exceeds the seed matrix qubits");
}

}  // namespace

SeedMatrix::SeedMatrix(uint32_t rows, uint16_t n) : rows_(rows), n_(n) {
  if (rows < 1) throw ArgumentError("seed matrix needs at least one row");
  if (n < 1) throw ArgumentError("seed matrix needs at least one qubit");
  size_t total_bits = size_t(rows) * n * 3;
  bits_.assign((total_bits + 7) / 8, 0);
}

SeedMatrix::Entry SeedMatrix::at(uint32_t row, uint32_t qubit) const {
  size_t off = (size_t(row) * n_ + qubit) * 3;
  size_t byte = off / 8;
  unsigned shift = off % 8;
  unsigned word = bits_[byte];
  if (shift > 5 && byte + 1 < bits_.size())
    word |= unsigned(bits_[byte + 1]) << 8;
  unsigned val = (word >> shift) & 0x7;
  return Entry{uint8_t(val & 1), uint8_t(val >> 1)};
}

void SeedMatrix::set(uint32_t row, uint32_t qubit, Entry e) {
  size_t off = (size_t(row) * n_ + qubit) * 3;
  size_t byte = off / 8;
  unsigned shift = off % 8;
  unsigned val = (unsigned(e.u) << 1 | e.b) & 0x7;
  bits_[byte] = uint8_t((bits_[byte] & ~(0x7u << shift)) | (val << shift));
  if (shift > 5 && byte + 1 < bits_.size()) {
    unsigned high_bits = 3 - (8 - shift);
    unsigned mask = (1u << high_bits) - 1;
    bits_[byte + 1] =
        uint8_t((bits_[byte + 1] & ~mask) | (val >> (8 - shift)));
  }
}

SeedMatrix build_seed_matrix(const PureState& state, uint32_t rows, Rng& rng,
                             int threads) {
  int n = state.num_qubits();
  SeedMatrix seed(rows, uint16_t(n));
  if (threads <= 0) threads = int(default_thread_count());
  Rng root(rng.next_u64());

  constexpr std::array<cplx, 4> h_mat = {cplx{kInvSqrt2}, cplx{kInvSqrt2},
                                         cplx{kInvSqrt2}, cplx{-kInvSqrt2}};
  constexpr std::array<cplx, 4> s_mat = {cplx{1}, cplx{0}, cplx{0},
                                         cplx{0, 1}};

  std::vector<std::vector<uint8_t>> us(rows);
  std::vector<uint64_t> outcomes(rows, 0);
  parallel_for(rows, unsigned(threads), [&](size_t i) {
    Rng sub = root.substream(i);
    auto& u = us[i];
    u.resize(n);
    for (int j = 0; j < n; ++j) u[j] = uint8_t(sub.below(3));
    std::vector<cplx> amp = state.amplitudes();
    // Measuring in the basis U_u|b> means applying U_u^dag first:
    // u=1 applies H, u=2 applies S then H.
    for (int j = 0; j < n; ++j) {
      if (u[j] == 1) {
        apply_1q_inplace(amp, n, j, h_mat);
      } else if (u[j] == 2) {
        apply_1q_inplace(amp, n, j, s_mat);
        apply_1q_inplace(amp, n, j, h_mat);
      }
    }
    outcomes[i] = born_sample(amp, sub);
  });

  for (uint32_t i = 0; i < rows; ++i)
    for (int j = 0; j < n; ++j) {
      uint8_t b = uint8_t((outcomes[i] >> (n - 1 - j)) & 1);
      seed.set(i, j, SeedMatrix::Entry{b, us[i][j]});
    }
  return seed;
}

ShadowEstimate estimate_cst(const SeedMatrix& seed, const LocalObservable& m,
                            int threads) {
  check_support(seed, m);
  if (threads <= 0) threads = int(default_thread_count());
  uint32_t rows = seed.rows();
  std::vector<double> vals(rows, 0.0);
  parallel_for(rows, unsigned(threads), [&](size_t i) {
    double row_val = 0.0;
    for (const auto& term : m.terms()) {
      int kt = int(term.support.size());
      uint64_t sub = uint64_t{1} << kt;
      std::array<const std::array<cplx, 4>*, kMaxLocality> b{};
      for (int j = 0; j < kt; ++j) {
        auto e = seed.at(uint32_t(i), uint32_t(term.support[j]));
        b[j] = &b_table(e.u, e.b);
      }
      // tr(term * tensor B_j); the dropped union qubits contribute
      // tr(B) = 1 each.
      cplx acc{0.0, 0.0};
      for (uint64_t p = 0; p < sub; ++p)
        for (uint64_t q = 0; q < sub; ++q) {
          cplx prod = term.matrix(p, q);
          for (int j = 0; j < kt; ++j) {
            unsigned pj = unsigned((p >> (kt - 1 - j)) & 1);
            unsigned qj = unsigned((q >> (kt - 1 - j)) & 1);
            prod *= (*b[j])[qj * 2 + pj];
          }
          acc += prod;
        }
      row_val += acc.real();
    }
    vals[i] = row_val;
  });

  ShadowEstimate est;
  est.mode = ShadowMode::cst;
  est.rows_used = rows;
  est.value = shifted_mean(vals);
  est.std_error = bootstrap_std_error(vals);
  return est;
}

ShadowEstimate estimate_qcqc(const SeedMatrix& seed, const LocalObservable& m,
                             Rng& rng, int threads) {
  check_support(seed, m);
  if (threads <= 0) threads = int(default_thread_count());
  uint32_t rows = seed.rows();
  const auto& support = m.support();
  int k = m.locality();
  uint64_t dim = uint64_t{1} << k;
  double scale = std::pow(3.0, k);
  double bound = scale * m.inf_norm() * (1.0 + 1e-12);
  Rng root(rng.next_u64());

  std::vector<double> vals(rows, 0.0);
  parallel_for(rows, unsigned(threads), [&](size_t i) {
    Rng sub = root.substream(i);
    double wprod = 1.0;
    std::array<const std::array<cplx, 2>*, kMaxLocality> v{};
    for (int j = 0; j < k; ++j) {
      auto e = seed.at(uint32_t(i), uint32_t(support[j]));
      uint8_t c = e.b;
      if (sub.below(3) == 2) {  // flip with probability 1/3, weight -1
        c = uint8_t(1 - c);
        wprod = -wprod;
      }
      v[j] = &v_table(e.u, c);
    }
    // Product state on the union support, then one Born sample of M's
    // eigenbasis.
    std::vector<double> probs(dim);
    for (uint64_t e = 0; e < dim; ++e) {
      cplx amp{0.0, 0.0};
      for (uint64_t a = 0; a < dim; ++a) {
        cplx prod = std::conj(m.eigenvectors()(a, e));
        for (int j = 0; j < k; ++j)
          prod *= (*v[j])[(a >> (k - 1 - j)) & 1];
        amp += prod;
      }
      probs[e] = std::norm(amp);
    }
    double u = sub.uniform();
    double cum = 0.0;
    uint64_t pick = dim - 1;
    for (uint64_t e = 0; e < dim; ++e) {
      cum += probs[e];
      if (u < cum) {
        pick = e;
        break;
      }
    }
    double s = scale * m.eigenvalues()(pick) * wprod;
    if (std::abs(s) > bound)
      throw std::logic_error("single-shot value exceeded the eigenvalue bound");
    vals[i] = s;
  });

  ShadowEstimate est;
  est.mode = ShadowMode::qcqc;
  est.rows_used = rows;
  est.value = shifted_mean(vals);
  est.std_error = bootstrap_std_error(vals);
  return est;
}

Eigen::Matrix2cd gamma0_inverse(const Eigen::Matrix2cd& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw ArgumentError("input is not Hermitian");
  if (std::abs(rho.trace() - cplx{1.0}) > 1e-9)
    throw ArgumentError("input does not have unit trace");
  return 3.0 * rho - Eigen::Matrix2cd::Identity();
}

uint64_t required_samples(int k, double inf_norm, double eps, double delta,
                          ShadowMode mode) {
  if (k < 0) throw ArgumentError("locality must be nonnegative");
  if (inf_norm < 0.0) throw ArgumentError("inf_norm must be nonnegative");
  if (!(eps > 0.0 && eps <= 1.0))
    throw ArgumentError("eps must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0))
    throw ArgumentError("delta must lie in (0, 1)");
  double base = mode == ShadowMode::cst ? 4.0 : 9.0;
  double raw = std::pow(base, k) * inf_norm * inf_norm *
               std::log(1.0 / delta) / (eps * eps);
  return static_cast<uint64_t>(std::ceil(raw));
}

double rho_hat_trace(const SeedMatrix& seed, uint32_t row,
                     const std::vector<int>& support) {
  double tr = 1.0;
  for (int q : support) {
    if (q < 0 || q >= int(seed.n()))
      throw ArgumentError("support qubit out of range");
    auto e = seed.at(row, uint32_t(q));
    const auto& b = b_table(e.u, e.b);
    tr *= (b[0] + b[3]).real();
  }
  return tr;
}

void save_seed_matrix(const SeedMatrix& seed, const std::string& path) {
  auto out = io::open_out(path);
  io::write_magic(out, "QSH1");
  io::write_le<uint32_t>(out, seed.rows());
  io::write_le<uint16_t>(out, seed.n());
  out.write(reinterpret_cast<const char*>(seed.packed().data()),
            std::streamsize(seed.packed().size()));
  if (!out) throw ArgumentError("failed writing seed file: " + path);
}

SeedMatrix load_seed_matrix(const std::string& path) {
  auto in = io::open_in(path);
  io::expect_magic(in, "QSH1", "seed matrix");
  uint32_t rows = io::read_le<uint32_t>(in);
  uint16_t n = io::read_le<uint16_t>(in);
  SeedMatrix seed(rows, n);
  std::vector<uint8_t> buf(seed.packed().size());
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (!in) throw ArgumentError("seed file is truncated: " + path);
  for (uint32_t i = 0; i < rows; ++i)
    for (uint32_t j = 0; j < n; ++j) {
      size_t off = (size_t(i) * n + j) * 3;
      unsigned word = buf[off / 8];
      if (off % 8 > 5 && off / 8 + 1 < buf.size())
        word |= unsigned(buf[off / 8 + 1]) << 8;
      unsigned val = (word >> (off % 8)) & 0x7;
      seed.set(i, j, SeedMatrix::Entry{uint8_t(val & 1), uint8_t(val >> 1)});
    }
  return seed;
}

}  // namespace qds
