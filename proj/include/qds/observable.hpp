// k-local Hermitian observables: sums of dense terms on small qubit
// supports, with exact expectations against statevectors and a cached
// eigensystem of the union-support representation.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qds/statevector.hpp"

namespace qds {

inline constexpr int kMaxLocality = 8;

struct LocalTerm {
  std::vector<int> support;  // sorted, unique qubit indices; empty = scalar
  Eigen::MatrixXcd matrix;   // dense Hermitian, dim 2^|support|
};

class LocalObservable {
 public:
  // Validates each term (sorted support, Hermitian within 1e-12, matching
  // dimension), forms the union-support dense matrix and eigensystem once.
  // Union support larger than k_max is a resource error.
  explicit LocalObservable(std::vector<LocalTerm> terms,
                           int k_max = kMaxLocality);

  const std::vector<LocalTerm>& terms() const { return terms_; }
  const std::vector<int>& support() const { return support_; }
  int locality() const { return static_cast<int>(support_.size()); }
  double inf_norm() const { return inf_norm_; }
  const Eigen::MatrixXcd& union_matrix() const { return union_matrix_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }

 private:
  std::vector<LocalTerm> terms_;
  std::vector<int> support_;  // sorted union
  Eigen::MatrixXcd union_matrix_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
  double inf_norm_ = 0.0;
};

// <phi| M |phi>, term by term; the imaginary residue must stay under 1e-9.
double expectation_exact(const PureState& state, const LocalObservable& m);

// Pauli factor shorthand: "1.5 * Z0 Z3" or "-0.5 * X1" or "2 * I".
LocalTerm pauli_term(double coefficient,
                     const std::vector<std::pair<char, int>>& factors);

// Text format, one term per line:
//   <coeff> * <P><q> [<P><q> ...]     Pauli product, P in {I, X, Y, Z}
//   <coeff> * I                        scalar term
//   dense <file> <q> [<q> ...]         dense matrix sidecar on those qubits
// '#' starts a comment. Sidecar paths resolve relative to base_dir.
LocalObservable parse_observable(const std::string& text,
                                 const std::string& base_dir = ".");
LocalObservable load_observable(const std::string& path);

// Dense sidecar: magic "QOB1", u8 qubit count k, 4^k complex doubles
// row-major.
void save_dense_matrix(const Eigen::MatrixXcd& m, const std::string& path);
Eigen::MatrixXcd load_dense_matrix(const std::string& path);

}  // namespace qds
