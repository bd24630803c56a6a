#include "qds/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "qds/error.hpp"

namespace qds {

std::vector<uint32_t> linear_scan_search(
    const std::vector<std::pair<uint32_t, PureState>>& states,
    const PureState& q, double eps) {
  std::vector<uint32_t> hits;
  for (const auto& [id, state] : states) {
    if (trace_distance(state, q) <= eps) hits.push_back(id);
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

PureState planted_near(const PureState& anchor, double dist, Rng& rng) {
  if (dist < 0.0 || dist > 1.0) {
    throw ArgumentError("planted_near: distance must be in [0, 1]");
  }
  const auto& phi = anchor.amplitudes();
  const size_t d = phi.size();
  std::vector<cplx> perp(d);
  double norm2 = 0.0;
  do {
    for (auto& a : perp) a = cplx(rng.normal(), rng.normal());
    cplx overlap = 0.0;
    for (size_t i = 0; i < d; ++i) overlap += std::conj(phi[i]) * perp[i];
    norm2 = 0.0;
    for (size_t i = 0; i < d; ++i) {
      perp[i] -= overlap * phi[i];
      norm2 += std::norm(perp[i]);
    }
  } while (norm2 < 1e-12);
  const double w_anchor = std::sqrt(1.0 - dist * dist);
  const double w_perp = dist / std::sqrt(norm2);
  std::vector<cplx> out(d);
  double out_norm2 = 0.0;
  for (size_t i = 0; i < d; ++i) {
    out[i] = w_anchor * phi[i] + w_perp * perp[i];
    out_norm2 += std::norm(out[i]);
  }
  const double inv = 1.0 / std::sqrt(out_norm2);
  for (auto& a : out) a *= inv;
  return PureState(anchor.num_qubits(), std::move(out));
}

DistortionReport distortion_table(const PureState& a, const PureState& b) {
  const auto& x = a.amplitudes();
  const auto& y = b.amplitudes();
  if (x.size() != y.size()) {
    throw ArgumentError("distortion_table: states have different dimensions");
  }
  DistortionReport rep;
  rep.D = trace_distance(a, b);
  double l1 = 0.0, l2 = 0.0, p1 = 0.0, p2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double da = std::abs(x[i] - y[i]);
    const double dp = std::abs(std::norm(x[i]) - std::norm(y[i]));
    l1 += da;
    l2 += da * da;
    p1 += dp;
    p2 += dp * dp;
  }
  rep.L1 = l1;
  rep.L2 = std::sqrt(l2);
  rep.L1_prime = p1;
  rep.L2_prime = std::sqrt(p2);
  return rep;
}

std::vector<double> density_vectorize(const PureState& phi) {
  const auto& x = phi.amplitudes();
  const size_t d = x.size();
  std::vector<double> out(2 * d * d);
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < d; ++j) {
      const cplx rho_ij = x[i] * std::conj(x[j]);
      out[2 * (i * d + j)] = rho_ij.real();
      out[2 * (i * d + j) + 1] = rho_ij.imag();
    }
  }
  return out;
}

namespace {

// Haar-distributed unitary: complex Gaussian matrix, QR, then column phases
// fixed so the R diagonal is positive.
Eigen::MatrixXcd haar_unitary(uint64_t d, Rng& rng) {
  Eigen::MatrixXcd g(d, d);
  for (uint64_t i = 0; i < d; ++i) {
    for (uint64_t j = 0; j < d; ++j) {
      g(i, j) = cplx(rng.normal(), rng.normal());
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (uint64_t j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

std::vector<cplx> gaussian_state(uint64_t d, Rng& rng) {
  std::vector<cplx> v(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& a : v) {
      a = cplx(rng.normal(), rng.normal());
      norm2 += std::norm(a);
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : v) a *= inv;
  return v;
}

}  // namespace

FullBasisReport full_basis_distance_check(uint64_t d, uint64_t pairs,
                                          Rng& rng) {
  if (d < 2 || d > 64) {
    throw ResourceError(
        "full_basis_distance_check: dimension must be in [2, 64]");
  }
  if (pairs == 0) {
    throw ArgumentError("full_basis_distance_check: need at least one pair");
  }
  FullBasisReport rep;
  rep.trials = pairs;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  rep.upper_bound_ok = true;
  double ratio_sum = 0.0;
  const uint64_t base = rng.next_u64();
  Rng root(base);
  for (uint64_t t = 0; t < pairs; ++t) {
    Rng local = root.substream(t);
    const Eigen::MatrixXcd basis = haar_unitary(d, local);
    std::vector<cplx> a, b;
    double dist = 0.0;
    do {
      a = gaussian_state(d, local);
      b = gaussian_state(d, local);
      cplx ip = 0.0;
      for (uint64_t i = 0; i < d; ++i) ip += std::conj(a[i]) * b[i];
      const double fid = std::min(1.0, std::norm(ip));
      dist = std::sqrt(1.0 - fid);
    } while (dist < 1e-3);  // ratio is ill-conditioned at coincident pairs
    double tv = 0.0;
    for (uint64_t k = 0; k < d; ++k) {
      cplx ga = 0.0, gb = 0.0;
      for (uint64_t i = 0; i < d; ++i) {
        ga += std::conj(basis(i, k)) * a[i];
        gb += std::conj(basis(i, k)) * b[i];
      }
      tv += std::abs(std::norm(ga) - std::norm(gb));
    }
    tv *= 0.5;
    if (tv > dist + 1e-12) rep.upper_bound_ok = false;
    const double ratio = tv / dist;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ratio_sum += ratio;
  }
  rep.mean_ratio = ratio_sum / static_cast<double>(pairs);
  return rep;
}

}  // namespace qds
