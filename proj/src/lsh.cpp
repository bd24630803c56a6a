#include "qds/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "qds/error.hpp"
#include "qds/io.hpp"

namespace qds {

namespace {

double vec_distance(LshFamily family, const std::vector<double>& a,
                    const std::vector<double>& b) {
  double s = 0.0;
  if (family == LshFamily::l1_stable) {
    for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  }
  for (size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

void check_params(const LshParams& p) {
  if (p.tables < 1 || p.functions_per_table < 1)
    throw ArgumentError("LSH needs at least one table and one function");
  if (!(p.bucket_width > 0.0)) throw ArgumentError("bucket width must be > 0");
}

uint64_t combine_hashes(const std::vector<int64_t>& hs) {
  uint64_t key = 1469598103934665603ull;  // FNV offset basis
  for (int64_t h : hs) {
    key ^= static_cast<uint64_t>(h);
    key *= 1099511628211ull;
  }
  return key;
}

}  // namespace

double collision_probability(LshFamily family, double c, double w) {
  if (!(w > 0.0)) throw ArgumentError("bucket width must be > 0");
  if (c <= 0.0) return 1.0;
  double x = w / c;
  if (family == LshFamily::l1_stable) {
    return 2.0 * std::atan(x) / std::numbers::pi -
           std::log(1.0 + x * x) / (std::numbers::pi * x);
  }
  // Gaussian family: 1 - 2*Phi(-x) - 2/(sqrt(2 pi) x) (1 - exp(-x^2/2)).
  double phi_tail = 0.5 * std::erfc(x / std::numbers::sqrt2);
  return 1.0 - 2.0 * phi_tail -
         2.0 / (std::sqrt(2.0 * std::numbers::pi) * x) *
             (1.0 - std::exp(-x * x / 2.0));
}

LshParams derive_lsh_params(LshFamily family, double r, double beta, size_t m,
                            uint64_t seed, double target_recall) {
  if (!(r > 0.0)) throw ArgumentError("radius must be > 0");
  if (!(beta > 1.0)) throw ArgumentError("beta must exceed 1");
  if (m < 1) throw ArgumentError("need at least one stored vector");
  if (!(target_recall > 0.0 && target_recall < 1.0))
    throw ArgumentError("target recall must lie in (0, 1)");
  LshParams p;
  p.family = family;
  p.bucket_width = 4.0 * r;
  p.seed = seed;
  double p1 = collision_probability(family, r, p.bucket_width);
  double p2 = collision_probability(family, beta * r, p.bucket_width);
  double t = std::ceil(std::log(double(m)) / std::log(1.0 / p2));
  p.functions_per_table = static_cast<uint32_t>(std::max(1.0, t));
  double p1t = std::pow(p1, double(p.functions_per_table));
  double l = std::ceil(std::log(1.0 - target_recall) / std::log(1.0 - p1t));
  p.tables = static_cast<uint32_t>(std::max(1.0, l));
  return p;
}

uint64_t LshIndex::bucket_key(const Table& table,
                              const std::vector<double>& v) const {
  uint32_t t = params_.functions_per_table;
  std::vector<int64_t> hs(t);
  for (uint32_t j = 0; j < t; ++j) {
    double dot = table.offset[j];
    const double* row = table.proj.data() + size_t(j) * dim_;
    for (size_t i = 0; i < dim_; ++i) dot += row[i] * v[i];
    hs[j] = static_cast<int64_t>(std::floor(dot / params_.bucket_width));
  }
  return combine_hashes(hs);
}

LshIndex build_index(
    const std::vector<std::pair<uint32_t, std::vector<double>>>& vectors,
    const LshParams& params) {
  check_params(params);
  LshIndex index;
  index.params_ = params;
  if (!vectors.empty()) {
    index.dim_ = vectors.front().second.size();
    for (const auto& [id, v] : vectors)
      if (v.size() != index.dim_)
        throw ArgumentError("stored vectors have mixed dimensions");
  }

  Rng rng(params.seed);
  index.tables_.resize(params.tables);
  for (uint32_t ti = 0; ti < params.tables; ++ti) {
    auto& table = index.tables_[ti];
    Rng sub = rng.substream(ti);
    size_t rows = size_t(params.functions_per_table) * index.dim_;
    table.proj.resize(rows);
    for (auto& a : table.proj)
      a = params.family == LshFamily::l1_stable ? sub.cauchy() : sub.normal();
    table.offset.resize(params.functions_per_table);
    for (auto& b : table.offset) b = sub.uniform() * params.bucket_width;
  }

  index.ids_.reserve(vectors.size());
  index.vectors_.reserve(vectors.size());
  for (const auto& [id, v] : vectors) {
    uint32_t slot = static_cast<uint32_t>(index.ids_.size());
    index.ids_.push_back(id);
    index.vectors_.push_back(v);
    for (auto& table : index.tables_)
      table.buckets[index.bucket_key(table, v)].push_back(slot);
  }

  if (index.params_.max_probes == 0 && !vectors.empty()) {
    uint64_t total_entries = 0, total_buckets = 0;
    for (const auto& table : index.tables_) {
      total_buckets += table.buckets.size();
      for (const auto& [key, slots] : table.buckets)
        total_entries += slots.size();
    }
    uint64_t avg = std::max<uint64_t>(1, total_entries / std::max<uint64_t>(
                                             1, total_buckets));
    index.params_.max_probes =
        std::max<uint64_t>(16, 3 * uint64_t(index.params_.tables) * avg);
  }
  return index;
}

std::optional<uint32_t> ann_query(const LshIndex& index,
                                  const std::vector<double>& q, double r,
                                  double beta, uint64_t max_probes,
                                  AnnStats* stats) {
  if (!(beta > 1.0)) throw ArgumentError("beta must exceed 1");
  if (index.size() == 0) return std::nullopt;
  if (q.size() != index.dim())
    throw ArgumentError("query dimension does not match the index");
  if (max_probes == 0) max_probes = index.params().max_probes;

  AnnStats local;
  std::unordered_set<uint32_t> seen;
  for (const auto& table : index.tables()) {
    auto it = table.buckets.find(index.bucket_key(table, q));
    if (it == table.buckets.end()) continue;
    for (uint32_t slot : it->second) {
      if (local.probed_entries >= max_probes) {
        if (stats) *stats = local;
        return std::nullopt;
      }
      ++local.probed_entries;
      if (!seen.insert(slot).second) continue;
      ++local.candidates;
      double dist =
          vec_distance(index.params().family, index.vector_at(slot), q);
      if (dist < beta * r) {
        if (stats) *stats = local;
        return index.ids()[slot];
      }
    }
  }
  if (stats) *stats = local;
  return std::nullopt;
}

std::vector<uint32_t> range_query_all(const LshIndex& index,
                                      const std::vector<double>& q, double r,
                                      double beta) {
  if (!(beta > 1.0)) throw ArgumentError("beta must exceed 1");
  if (index.size() == 0) return {};
  if (q.size() != index.dim())
    throw ArgumentError("query dimension does not match the index");
  std::unordered_set<uint32_t> seen;
  std::vector<uint32_t> out;
  for (const auto& table : index.tables()) {
    auto it = table.buckets.find(index.bucket_key(table, q));
    if (it == table.buckets.end()) continue;
    for (uint32_t slot : it->second) {
      if (!seen.insert(slot).second) continue;
      double dist =
          vec_distance(index.params().family, index.vector_at(slot), q);
      if (dist < beta * r) out.push_back(index.ids()[slot]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<uint32_t, uint32_t>> join_pairs(
    const LshIndex& index_a,
    const std::vector<std::pair<uint32_t, std::vector<double>>>& vectors_b,
    double r, double beta, bool self_join) {
  std::vector<std::pair<uint32_t, uint32_t>> out;
  for (const auto& [id_b, v] : vectors_b) {
    for (uint32_t id_a : range_query_all(index_a, v, r, beta)) {
      if (self_join && id_a >= id_b) continue;
      out.emplace_back(id_a, id_b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void save_index(const LshIndex& index, const std::string& path) {
  auto out = io::open_out(path);
  io::write_magic(out, "QLX1");
  const auto& p = index.params_;
  io::write_le<uint8_t>(out, p.family == LshFamily::l1_stable ? 0 : 1);
  io::write_le<uint32_t>(out, p.tables);
  io::write_le<uint32_t>(out, p.functions_per_table);
  io::write_le<double>(out, p.bucket_width);
  io::write_le<uint64_t>(out, p.seed);
  io::write_le<uint64_t>(out, p.max_probes);
  io::write_le<uint64_t>(out, index.dim_);
  io::write_le<uint64_t>(out, index.ids_.size());
  for (uint32_t id : index.ids_) io::write_le<uint32_t>(out, id);
  for (const auto& v : index.vectors_)
    for (double x : v) io::write_le<double>(out, x);
  for (const auto& table : index.tables_) {
    for (double a : table.proj) io::write_le<double>(out, a);
    for (double b : table.offset) io::write_le<double>(out, b);
    std::vector<uint64_t> keys;
    keys.reserve(table.buckets.size());
    for (const auto& [key, slots] : table.buckets) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    io::write_le<uint64_t>(out, keys.size());
    for (uint64_t key : keys) {
      const auto& slots = table.buckets.at(key);
      io::write_le<uint64_t>(out, key);
      io::write_le<uint64_t>(out, slots.size());
      for (uint32_t slot : slots) io::write_le<uint32_t>(out, slot);
    }
  }
  if (!out) throw ArgumentError("failed writing index file: " + path);
}

LshIndex load_index(const std::string& path) {
  auto in = io::open_in(path);
  io::expect_magic(in, "QLX1", "LSH index");
  LshIndex index;
  auto& p = index.params_;
  p.family = io::read_le<uint8_t>(in) == 0 ? LshFamily::l1_stable
                                           : LshFamily::l2_stable;
  p.tables = io::read_le<uint32_t>(in);
  p.functions_per_table = io::read_le<uint32_t>(in);
  p.bucket_width = io::read_le<double>(in);
  p.seed = io::read_le<uint64_t>(in);
  p.max_probes = io::read_le<uint64_t>(in);
  check_params(p);
  index.dim_ = io::read_le<uint64_t>(in);
  uint64_t m = io::read_le<uint64_t>(in);
  index.ids_.resize(m);
  for (auto& id : index.ids_) id = io::read_le<uint32_t>(in);
  index.vectors_.assign(m, std::vector<double>(index.dim_));
  for (auto& v : index.vectors_)
    for (auto& x : v) x = io::read_le<double>(in);
  index.tables_.resize(p.tables);
  for (auto& table : index.tables_) {
    table.proj.resize(size_t(p.functions_per_table) * index.dim_);
    for (auto& a : table.proj) a = io::read_le<double>(in);
    table.offset.resize(p.functions_per_table);
    for (auto& b : table.offset) b = io::read_le<double>(in);
    uint64_t buckets = io::read_le<uint64_t>(in);
    for (uint64_t i = 0; i < buckets; ++i) {
      uint64_t key = io::read_le<uint64_t>(in);
      uint64_t size = io::read_le<uint64_t>(in);
      auto& slots = table.buckets[key];
      slots.resize(size);
      for (auto& slot : slots) slot = io::read_le<uint32_t>(in);
    }
  }
  return index;
}

}  // namespace qds
