#include "qds/observable.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qds/error.hpp"
#include "qds/io.hpp"

namespace qds {

namespace {

void validate_term(const LocalTerm& term, int k_max) {
  for (size_t i = 0; i < term.support.size(); ++i) {
    if (term.support[i] < 0)
      throw ArgumentError("negative qubit index in term support");
    if (i > 0 && term.support[i] <= term.support[i - 1])
      throw ArgumentError("term support must be strictly increasing");
  }
  if (static_cast<int>(term.support.size()) > k_max)
    throw ResourceError("term support exceeds the locality cap of " +
                        std::to_string(k_max));
  Eigen::Index dim = Eigen::Index{1} << term.support.size();
  if (term.matrix.rows() != dim || term.matrix.cols() != dim)
    throw ArgumentError("term matrix dimension does not match its support");
  double drift = (term.matrix - term.matrix.adjoint()).cwiseAbs().maxCoeff();
  if (drift > 1e-12)
    throw ArgumentError("term matrix is not Hermitian (drift " +
                        std::to_string(drift) + ")");
}

// Positions of each term-support qubit inside the sorted union support.
std::vector<int> positions_in(const std::vector<int>& union_support,
                              const std::vector<int>& term_support) {
  std::vector<int> pos;
  pos.reserve(term_support.size());
  for (int q : term_support) {
    auto it = std::lower_bound(union_support.begin(), union_support.end(), q);
    pos.push_back(static_cast<int>(it - union_support.begin()));
  }
  return pos;
}

}  // namespace

LocalObservable::LocalObservable(std::vector<LocalTerm> terms, int k_max)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw ArgumentError("observable needs at least one term");
  if (terms_.size() > 64)
    std::cerr << "warning: observable has " << terms_.size()
              << " terms; expected a small constant\n";
  for (const auto& t : terms_) validate_term(t, k_max);

  for (const auto& t : terms_)
    support_.insert(support_.end(), t.support.begin(), t.support.end());
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()),
                 support_.end());
  int k = locality();
  if (k > k_max)
    throw ResourceError("union support " + std::to_string(k) +
                        " exceeds the locality cap of " +
                        std::to_string(k_max));

  Eigen::Index dim = Eigen::Index{1} << k;
  union_matrix_ = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : terms_) {
    int kt = static_cast<int>(t.support.size());
    std::vector<int> pos = positions_in(support_, t.support);
    // Union-index bit for local bit j (both MSB-first).
    std::vector<Eigen::Index> bit(kt);
    for (int j = 0; j < kt; ++j)
      bit[j] = Eigen::Index{1} << (k - 1 - pos[j]);
    std::vector<Eigen::Index> rest_bits;
    for (int p = 0; p < k; ++p) {
      Eigen::Index b = Eigen::Index{1} << (k - 1 - p);
      if (std::find(bit.begin(), bit.end(), b) == bit.end())
        rest_bits.push_back(b);
    }
    Eigen::Index sub = Eigen::Index{1} << kt;
    Eigen::Index rest = Eigen::Index{1} << rest_bits.size();
    for (Eigen::Index r = 0; r < rest; ++r) {
      Eigen::Index base = 0;
      for (size_t p = 0; p < rest_bits.size(); ++p)
        if ((r >> (rest_bits.size() - 1 - p)) & 1) base |= rest_bits[p];
      for (Eigen::Index a = 0; a < sub; ++a) {
        Eigen::Index row = base;
        for (int j = 0; j < kt; ++j)
          if ((a >> (kt - 1 - j)) & 1) row |= bit[j];
        for (Eigen::Index b = 0; b < sub; ++b) {
          Eigen::Index col = base;
          for (int j = 0; j < kt; ++j)
            if ((b >> (kt - 1 - j)) & 1) col |= bit[j];
          union_matrix_(row, col) += t.matrix(a, b);
        }
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(union_matrix_);
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
  inf_norm_ = eigenvalues_.cwiseAbs().maxCoeff();
}

double expectation_exact(const PureState& state, const LocalObservable& m) {
  int n = state.num_qubits();
  if (!m.support().empty() && m.support().back() >= n)
    throw ArgumentError("observable support exceeds the state's qubits");

  const auto& amp = state.amplitudes();
  cplx acc{0.0, 0.0};
  for (const auto& term : m.terms()) {
    int kt = static_cast<int>(term.support.size());
    uint64_t sub = uint64_t{1} << kt;
    std::vector<uint64_t> sup_bit(kt);
    for (int j = 0; j < kt; ++j)
      sup_bit[j] = uint64_t{1} << (n - 1 - term.support[j]);
    std::vector<uint64_t> rest_bits;
    for (int q = 0; q < n; ++q) {
      uint64_t b = uint64_t{1} << (n - 1 - q);
      if (std::find(sup_bit.begin(), sup_bit.end(), b) == sup_bit.end())
        rest_bits.push_back(b);
    }
    uint64_t rest = uint64_t{1} << rest_bits.size();
    std::vector<cplx> x(sub);
    for (uint64_t r = 0; r < rest; ++r) {
      uint64_t base = 0;
      for (size_t p = 0; p < rest_bits.size(); ++p)
        if ((r >> (rest_bits.size() - 1 - p)) & 1) base |= rest_bits[p];
      for (uint64_t a = 0; a < sub; ++a) {
        uint64_t idx = base;
        for (int j = 0; j < kt; ++j)
          if ((a >> (kt - 1 - j)) & 1) idx |= sup_bit[j];
        x[a] = amp[idx];
      }
      for (uint64_t a = 0; a < sub; ++a) {
        cplx row{0.0, 0.0};
        for (uint64_t b = 0; b < sub; ++b) row += term.matrix(a, b) * x[b];
        acc += std::conj(x[a]) * row;
      }
    }
  }
  if (std::abs(acc.imag()) > 1e-9)
    throw std::runtime_error("expectation developed an imaginary part: " +
                             std::to_string(acc.imag()));
  return acc.real();
}

LocalTerm pauli_term(double coefficient,
                     const std::vector<std::pair<char, int>>& factors) {
  Eigen::Matrix2cd px, py, pz;
  px << 0, 1, 1, 0;
  py << 0, cplx{0, -1}, cplx{0, 1}, 0;
  pz << 1, 0, 0, -1;

  std::vector<std::pair<char, int>> sorted = factors;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  LocalTerm term;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Constant(1, 1, coefficient);
  for (const auto& [p, q] : sorted) {
    if (!term.support.empty() && term.support.back() == q)
      throw ArgumentError("repeated qubit in Pauli factor list");
    const Eigen::Matrix2cd* f = nullptr;
    switch (std::toupper(p)) {
      case 'X': f = &px; break;
      case 'Y': f = &py; break;
      case 'Z': f = &pz; break;
      default:
        throw ArgumentError(std::string("unknown Pauli letter: ") + p);
    }
    term.support.push_back(q);
    // Kronecker with the earlier factors on the more significant side.
    Eigen::MatrixXcd kron(acc.rows() * 2, acc.cols() * 2);
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j)
        kron.block<2, 2>(2 * i, 2 * j) = acc(i, j) * (*f);
    acc = kron;
  }
  term.matrix = acc;
  return term;
}

namespace {

LocalTerm parse_term_line(const std::string& line,
                          const std::string& base_dir) {
  std::istringstream in(line);
  std::string first;
  in >> first;
  if (first == "dense") {
    std::string file;
    in >> file;
    if (file.empty()) throw ArgumentError("dense term is missing a file");
    LocalTerm term;
    int q;
    while (in >> q) term.support.push_back(q);
    if (term.support.empty())
      throw ArgumentError("dense term is missing its qubits");
    std::filesystem::path p(file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    term.matrix = load_dense_matrix(p.string());
    return term;
  }

  double coeff;
  try {
    size_t used = 0;
    coeff = std::stod(first, &used);
    if (used != first.size()) throw std::invalid_argument(first);
  } catch (const std::exception&) {
    throw ArgumentError("term line must start with a coefficient: " + line);
  }
  std::string star;
  in >> star;
  if (star != "*")
    throw ArgumentError("expected '*' after the coefficient: " + line);
  std::vector<std::pair<char, int>> factors;
  std::string tok;
  bool identity = false;
  while (in >> tok) {
    if (tok == "I" || tok == "i") {
      identity = true;
      continue;
    }
    if (tok.size() < 2)
      throw ArgumentError("bad Pauli factor '" + tok + "' in: " + line);
    int q;
    try {
      q = std::stoi(tok.substr(1));
    } catch (const std::exception&) {
      throw ArgumentError("bad qubit index in factor '" + tok + "'");
    }
    factors.push_back({tok[0], q});
  }
  if (factors.empty() && !identity)
    throw ArgumentError("term has no Pauli factors: " + line);
  return pauli_term(coeff, factors);
}

}  // namespace

LocalObservable parse_observable(const std::string& text,
                                 const std::string& base_dir) {
  std::vector<LocalTerm> terms;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    terms.push_back(parse_term_line(line, base_dir));
  }
  return LocalObservable(std::move(terms));
}

LocalObservable load_observable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open observable file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_observable(buf.str(), dir.empty() ? "." : dir);
}

void save_dense_matrix(const Eigen::MatrixXcd& m, const std::string& path) {
  if (m.rows() != m.cols() || m.rows() < 1 ||
      (m.rows() & (m.rows() - 1)) != 0)
    throw ArgumentError("dense matrix must be square with power-of-two size");
  int k = 0;
  while ((Eigen::Index{1} << k) < m.rows()) ++k;
  auto out = io::open_out(path);
  io::write_magic(out, "QOB1");
  io::write_le<uint8_t>(out, static_cast<uint8_t>(k));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      io::write_le<double>(out, m(i, j).real());
      io::write_le<double>(out, m(i, j).imag());
    }
  if (!out) throw ArgumentError("failed writing dense matrix: " + path);
}

Eigen::MatrixXcd load_dense_matrix(const std::string& path) {
  auto in = io::open_in(path);
  io::expect_magic(in, "QOB1", "dense observable");
  int k = io::read_le<uint8_t>(in);
  if (k > 16) throw ArgumentError("dense matrix qubit count is implausible");
  Eigen::Index dim = Eigen::Index{1} << k;
  Eigen::MatrixXcd m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      double re = io::read_le<double>(in);
      double im = io::read_le<double>(in);
      m(i, j) = cplx{re, im};
    }
  return m;
}

}  // namespace qds
