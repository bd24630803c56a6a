// p-stable locality-sensitive hashing over real vectors: Cauchy
// projections for l1, Gaussian for l2. Queries verify every candidate with
// an exact distance check, so returned results never violate dist < beta*r;
// only recall is probabilistic.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qds/rng.hpp"

namespace qds {

enum class LshFamily : uint8_t { l1_stable, l2_stable };

struct LshParams {
  LshFamily family = LshFamily::l1_stable;
  uint32_t tables = 1;               // L
  uint32_t functions_per_table = 1;  // t
  double bucket_width = 1.0;         // w
  uint64_t seed = 0;
  uint64_t max_probes = 0;  // 0: resolved at build to 3 * L * avg bucket size
};

// P[h(a) = h(b)] at distance c for the family's standard hash
// h(v) = floor((a.v + b)/w).
double collision_probability(LshFamily family, double c, double w);

// Standard sizing: w = 4r, t = ceil(ln m / ln(1/p2)) with p2 = p(beta*r),
// L = ceil(ln(1-recall)/ln(1-p1^t)) with p1 = p(r).
LshParams derive_lsh_params(LshFamily family, double r, double beta, size_t m,
                            uint64_t seed, double target_recall = 0.9);

class LshIndex {
 public:
  LshIndex() = default;

  const LshParams& params() const { return params_; }
  size_t size() const { return ids_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<uint32_t>& ids() const { return ids_; }
  const std::vector<double>& vector_at(size_t slot) const {
    return vectors_[slot];
  }

  friend LshIndex build_index(
      const std::vector<std::pair<uint32_t, std::vector<double>>>& vectors,
      const LshParams& params);
  friend void save_index(const LshIndex& index, const std::string& path);
  friend LshIndex load_index(const std::string& path);

  struct Table {
    std::vector<double> proj;    // t x dim, row-major
    std::vector<double> offset;  // t
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;  // slot lists
  };

  uint64_t bucket_key(const Table& table, const std::vector<double>& v) const;
  const std::vector<Table>& tables() const { return tables_; }

 private:
  LshParams params_;
  size_t dim_ = 0;
  std::vector<uint32_t> ids_;
  std::vector<std::vector<double>> vectors_;
  std::vector<Table> tables_;
};

LshIndex build_index(
    const std::vector<std::pair<uint32_t, std::vector<double>>>& vectors,
    const LshParams& params);

struct AnnStats {
  uint64_t candidates = 0;      // distinct vectors distance-checked
  uint64_t probed_entries = 0;  // bucket entries scanned, duplicates included
};

// First verified id with dist < beta*r, or nothing after max_probes bucket
// entries (0 = the index default).
std::optional<uint32_t> ann_query(const LshIndex& index,
                                  const std::vector<double>& q, double r,
                                  double beta, uint64_t max_probes = 0,
                                  AnnStats* stats = nullptr);

// Every colliding id with verified dist < beta*r, sorted; no probe budget.
std::vector<uint32_t> range_query_all(const LshIndex& index,
                                      const std::vector<double>& q, double r,
                                      double beta);

// All (idA, idB) with verified dist < beta*r. self_join drops idA >= idB.
std::vector<std::pair<uint32_t, uint32_t>> join_pairs(
    const LshIndex& index_a,
    const std::vector<std::pair<uint32_t, std::vector<double>>>& vectors_b,
    double r, double beta, bool self_join = false);

// Index file "QLX1": params, vectors and bucket tables; loads without
// rehashing. Buckets are written in sorted key order.
void save_index(const LshIndex& index, const std::string& path);
LshIndex load_index(const std::string& path);

}  // namespace qds
