#include "qds/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "qds/error.hpp"

namespace qds {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

uint64_t param_key(double eps, double beta) {
  return std::bit_cast<uint64_t>(eps) ^
         std::rotl(std::bit_cast<uint64_t>(beta), 17);
}

}  // namespace

Database::Database(SketchMeasurement measurement, CTauCalibration calibration,
                   EngineConfig config, uint64_t seed)
    : measurement_(std::move(measurement)),
      calibration_(std::move(calibration)),
      config_(config),
      seed_(seed) {
  if (config_.iota <= 0.0) throw ArgumentError("iota must be positive");
  if (config_.eps_hat_factor <= 0.0)
    throw ArgumentError("eps_hat factor must be positive");
  if (measurement_.k != config_.sketch_k)
    throw ArgumentError("config sketch_k disagrees with the measurement");
  if (config_.flavor == SketchFlavor::l1 &&
      (calibration_.d != measurement_.dim() || calibration_.k != measurement_.k))
    throw ArgumentError("calibration (d, k) does not match the measurement");
}

const StateRecord& Database::record(uint32_t id) const {
  for (const auto& r : records_)
    if (r.id == id) return r;
  throw ArgumentError("no record with id " + std::to_string(id));
}

uint32_t Database::ingest(const PureState& state,
                          std::map<std::string, std::string> metadata) {
  if (state.num_qubits() != measurement_.n)
    throw ArgumentError("state qubit count does not match the database");
  StateRecord rec;
  rec.id = next_id_++;
  rec.metadata = std::move(metadata);
  Rng sub = Rng(seed_).substream(rec.id);
  rec.sketch = build_sketch(state, measurement_, config_.flavor,
                            config_.sketch_samples, sub);
  if (config_.seed_rows > 0)
    rec.seed = build_seed_matrix(state, config_.seed_rows, sub,
                                 config_.threads);
  if (config_.store_states) rec.state = state;
  records_.push_back(std::move(rec));
  index_.reset();  // batch model: next ensure_index rebuilds
  return records_.back().id;
}

double Database::min_feasible_beta(double eps) const {
  if (eps <= 0.0 || eps > 1.0) throw ArgumentError("eps must lie in (0, 1]");
  return 1.0 + config_.iota + config_.eps_hat_factor;
}

double Database::sketch_scale() const {
  double d = double(measurement_.dim());
  if (config_.flavor == SketchFlavor::l1)
    return std::sqrt(d / double(measurement_.k)) * calibration_.c_tau;
  return std::sqrt(d / 2.0);
}

void Database::ensure_index(double eps, double beta) {
  double min_beta = min_feasible_beta(eps);
  if (beta <= min_beta)
    throw ArgumentError("beta = " + std::to_string(beta) +
                        " is infeasible; needs beta > " +
                        std::to_string(min_beta));
  if (index_ && index_eps_ == eps && index_beta_ == beta) return;

  double r_sketch = (1.0 + config_.iota) * eps / sketch_scale();
  double beta_nn = beta / min_beta;
  std::vector<std::pair<uint32_t, std::vector<double>>> vecs;
  vecs.reserve(records_.size());
  for (const auto& r : records_) {
    if (!r.sketch) throw PreconditionError("record " + std::to_string(r.id) +
                                           " has no sketch");
    vecs.emplace_back(r.id, r.sketch->probs);
  }
  LshFamily family = config_.flavor == SketchFlavor::l1 ? LshFamily::l1_stable
                                                        : LshFamily::l2_stable;
  uint64_t index_seed = Rng(seed_).substream(param_key(eps, beta)).next_u64();
  LshParams params =
      vecs.empty()
          ? LshParams{family, 1, 1, 4.0 * r_sketch, index_seed, 0}
          : derive_lsh_params(family, r_sketch, beta_nn, vecs.size(),
                              index_seed);
  index_ = build_index(vecs, params);
  index_eps_ = eps;
  index_beta_ = beta;
}

std::optional<uint32_t> Database::search(const PureState& q, double eps,
                                         double beta, Rng& rng,
                                         AnnStats* stats) {
  if (q.num_qubits() != measurement_.n)
    throw ArgumentError("query qubit count does not match the database");
  SketchVector qs = build_sketch(q, measurement_, config_.flavor,
                                 config_.sketch_samples, rng);
  return search_sketch(qs, eps, beta, stats);
}

std::optional<uint32_t> Database::search_sketch(const SketchVector& q,
                                                double eps, double beta,
                                                AnnStats* stats) {
  if (!(q.measurement_id == id_of(measurement_)))
    throw ArgumentError("query sketch was built under another measurement");
  ensure_index(eps, beta);
  double r_sketch = (1.0 + config_.iota) * eps / sketch_scale();
  double beta_nn = beta / min_feasible_beta(eps);
  return ann_query(*index_, q.probs, r_sketch, beta_nn, 0, stats);
}

std::vector<std::pair<uint32_t, uint32_t>> join(Database& x, const Database& y,
                                                double eps, double beta) {
  if (!(id_of(x.measurement()) == id_of(y.measurement())))
    throw ArgumentError("databases use different measurements");
  x.ensure_index(eps, beta);
  double r_sketch = (1.0 + x.config().iota) * eps / x.sketch_scale();
  double beta_nn = beta / x.min_feasible_beta(eps);
  std::vector<std::pair<uint32_t, std::vector<double>>> vecs;
  vecs.reserve(y.size());
  for (const auto& r : y.records()) {
    if (!r.sketch) throw PreconditionError("record " + std::to_string(r.id) +
                                           " has no sketch");
    vecs.emplace_back(r.id, r.sketch->probs);
  }
  return join_pairs(*x.index(), vecs, r_sketch, beta_nn, &x == &y);
}

double Database::union_bound_delta() const {
  // 1/m^2 keeps the union bound over m per-record estimates at 1/m; a
  // lone record would degenerate to delta = 1, so it is budgeted as two.
  double m = double(std::max<size_t>(records_.size(), 2));
  return 1.0 / (m * m);
}

void Database::require_seed_rows(const LocalObservable& m, double eps_unit,
                                 double delta) const {
  uint64_t need = required_samples(m.locality(), m.inf_norm(), eps_unit, delta,
                                   config_.shadow_mode);
  std::string deficient;
  for (const auto& r : records_) {
    bool ok = r.seed && r.seed->rows() >= need;
    if (!ok) deficient += (deficient.empty() ? "" : ", ") +
                          std::to_string(r.id);
  }
  if (!deficient.empty())
    throw PreconditionError(
        "records need seed matrices with at least " + std::to_string(need) +
        " rows for this query; deficient ids: " + deficient);
}

std::vector<double> Database::estimate_all(const LocalObservable& m,
                                           Rng& rng) const {
  std::vector<double> est(records_.size());
  for (size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (config_.shadow_mode == ShadowMode::cst) {
      est[i] = estimate_cst(*r.seed, m, config_.threads).value;
    } else {
      Rng sub = rng.substream(r.id);
      est[i] = estimate_qcqc(*r.seed, m, sub, config_.threads).value;
    }
  }
  return est;
}

std::vector<uint32_t> Database::select(const LocalObservable& m, double eta,
                                       double eps, Rng& rng) const {
  if (eps <= 0.0) throw ArgumentError("eps must be positive");
  if (records_.empty()) return {};
  double delta = union_bound_delta();
  require_seed_rows(m, eps / 3.0, delta);
  std::vector<double> est = estimate_all(m, rng);
  std::vector<uint32_t> out;
  for (size_t i = 0; i < records_.size(); ++i)
    if (est[i] >= eta - eps / 2.0) out.push_back(records_[i].id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<uint32_t> Database::select_equality(const LocalObservable& m,
                                                double eta, double eps,
                                                Rng& rng) const {
  if (eps <= 0.0) throw ArgumentError("eps must be positive");
  if (records_.empty()) return {};
  double delta = union_bound_delta();
  require_seed_rows(m, eps / 3.0, delta);
  // One estimate pass shared by both shifted selections, so the set
  // difference is the band eta - 3eps/2 <= est < eta + 3eps/2.
  std::vector<double> est = estimate_all(m, rng);
  std::vector<uint32_t> out;
  for (size_t i = 0; i < records_.size(); ++i)
    if (est[i] >= eta - 1.5 * eps && est[i] < eta + 1.5 * eps)
      out.push_back(records_[i].id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<uint32_t> Database::sort(const LocalObservable& m, double eps,
                                     Rng& rng) const {
  if (eps <= 0.0) throw ArgumentError("eps must be positive");
  if (records_.empty()) return {};
  double delta = union_bound_delta();
  require_seed_rows(m, eps / 2.0, delta);
  std::vector<double> est = estimate_all(m, rng);
  std::vector<size_t> order(records_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (est[a] != est[b]) return est[a] < est[b];
    return records_[a].id < records_[b].id;
  });
  std::vector<uint32_t> out;
  out.reserve(order.size());
  for (size_t i : order) out.push_back(records_[i].id);
  return out;
}

std::optional<uint32_t> Database::search_via_selection(const PureState& q,
                                                       double eps, double beta,
                                                       Rng& rng) const {
  int n = measurement_.n;
  if (q.num_qubits() != n)
    throw ArgumentError("query qubit count does not match the database");
  if (n > kMaxLocality)
    throw ResourceError(
        "the selection reduction needs n <= " + std::to_string(kMaxLocality) +
        " qubits; use search for larger registers");
  if (!(beta > 1.0)) throw ArgumentError("beta must exceed 1");
  if (eps <= 0.0) throw ArgumentError("eps must be positive");

  uint64_t d = q.dim();
  Eigen::MatrixXcd proj(d, d);
  for (uint64_t i = 0; i < d; ++i)
    for (uint64_t j = 0; j < d; ++j)
      proj(i, j) = q[i] * std::conj(q[j]);
  std::vector<int> support(n);
  for (int i = 0; i < n; ++i) support[i] = i;
  LocalObservable m({LocalTerm{support, proj}});

  for (const auto& r : records_)
    if (!r.seed)
      throw PreconditionError("record " + std::to_string(r.id) +
                              " has no seed matrix");
  std::vector<double> est = estimate_all(m, rng);
  std::optional<uint32_t> best;
  double best_dist = 0.0;
  for (size_t i = 0; i < records_.size(); ++i) {
    double fidelity = std::clamp(est[i], 0.0, 1.0);
    double dist = std::sqrt(1.0 - fidelity);
    if (dist <= beta * eps && (!best || dist < best_dist)) {
      best = records_[i].id;
      best_dist = dist;
    }
  }
  return best;
}

SwapTestResult swap_test_equality(const PureState& a, const PureState& b,
                                  double eps, double beta, double delta,
                                  Rng& rng, uint64_t trials_override) {
  if (a.num_qubits() != b.num_qubits())
    throw ArgumentError("swap test needs equal qubit counts");
  if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("eps must lie in (0, 1]");
  if (!(beta > 1.0)) throw ArgumentError("beta must exceed 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw ArgumentError("delta must lie in (0, 1)");

  double dist = trace_distance(a, b);
  double p_fail = dist * dist / 2.0;  // test rejects with probability D^2/2
  uint64_t trials =
      trials_override > 0
          ? trials_override
          : uint64_t(std::ceil(8.0 * std::log(1.0 / delta) / (eps * eps)));
  uint64_t failures = 0;
  for (uint64_t t = 0; t < trials; ++t)
    if (rng.uniform() < p_fail) ++failures;
  double fail_frac = double(failures) / double(trials);
  double threshold = (1.0 + beta * beta) * eps * eps / 4.0;

  SwapTestResult res;
  res.trials = trials;
  res.success_rate = 1.0 - fail_frac;
  res.verdict = fail_frac <= threshold ? EqualityVerdict::equal
                                       : EqualityVerdict::not_equal;
  return res;
}

namespace {

json config_to_json(const EngineConfig& c) {
  return json{{"iota", c.iota},
              {"eps_hat_factor", c.eps_hat_factor},
              {"flavor", c.flavor == SketchFlavor::l1 ? "l1" : "l2"},
              {"shadow_mode", c.shadow_mode == ShadowMode::cst ? "cst" : "qcqc"},
              {"sketch_k", c.sketch_k},
              {"sketch_exact", c.sketch_samples.exact},
              {"sketch_samples", c.sketch_samples.samples},
              {"seed_rows", c.seed_rows},
              {"store_states", c.store_states}};
}

EngineConfig config_from_json(const json& j) {
  EngineConfig c;
  c.iota = j.at("iota").get<double>();
  c.eps_hat_factor = j.at("eps_hat_factor").get<double>();
  c.flavor = j.at("flavor").get<std::string>() == "l2" ? SketchFlavor::l2
                                                       : SketchFlavor::l1;
  c.shadow_mode = j.at("shadow_mode").get<std::string>() == "qcqc"
                      ? ShadowMode::qcqc
                      : ShadowMode::cst;
  c.sketch_k = j.at("sketch_k").get<uint64_t>();
  c.sketch_samples.exact = j.at("sketch_exact").get<bool>();
  c.sketch_samples.samples = j.at("sketch_samples").get<uint64_t>();
  c.seed_rows = j.at("seed_rows").get<uint32_t>();
  c.store_states = j.at("store_states").get<bool>();
  return c;
}

}  // namespace

void save_database(const Database& db, const std::string& dir) {
  fs::create_directories(dir);
  fs::create_directories(fs::path(dir) / "states");
  fs::create_directories(fs::path(dir) / "sketches");
  fs::create_directories(fs::path(dir) / "seeds");

  save_measurement(db.measurement_, (fs::path(dir) / "measurement.qms").string());

  json manifest;
  manifest["n"] = db.measurement_.n;
  manifest["seed"] = db.seed_;
  manifest["next_id"] = db.next_id_;
  manifest["config"] = config_to_json(db.config_);
  manifest["calibration"] = {{"d", db.calibration_.d},
                             {"k", db.calibration_.k},
                             {"c_tau", db.calibration_.c_tau},
                             {"trials", db.calibration_.trials},
                             {"ci_halfwidth", db.calibration_.ci_halfwidth}};
  json records = json::array();
  for (const auto& r : db.records_) {
    json jr;
    jr["id"] = r.id;
    jr["metadata"] = r.metadata;
    jr["has_state"] = bool(r.state);
    jr["has_sketch"] = bool(r.sketch);
    jr["has_seed"] = bool(r.seed);
    records.push_back(std::move(jr));
    std::string id = std::to_string(r.id);
    if (r.state)
      save_state(*r.state, (fs::path(dir) / "states" / (id + ".qds")).string());
    if (r.sketch)
      save_sketch(*r.sketch,
                  (fs::path(dir) / "sketches" / (id + ".qsk")).string());
    if (r.seed)
      save_seed_matrix(*r.seed,
                       (fs::path(dir) / "seeds" / (id + ".qsh")).string());
  }
  manifest["records"] = std::move(records);
  if (db.index_) {
    manifest["index"] = {{"eps", db.index_eps_}, {"beta", db.index_beta_}};
    save_index(*db.index_, (fs::path(dir) / "index.qlx").string());
  }
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!out) throw ArgumentError("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

Database load_database(const std::string& dir, int cap) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw ArgumentError("no manifest.json in " + dir);
  json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded())
    throw ArgumentError("manifest.json is not valid JSON in " + dir);

  SketchMeasurement meas =
      load_measurement((fs::path(dir) / "measurement.qms").string(), cap);
  CTauCalibration cal;
  const auto& jc = manifest.at("calibration");
  cal.d = jc.at("d").get<uint64_t>();
  cal.k = jc.at("k").get<uint64_t>();
  cal.c_tau = jc.at("c_tau").get<double>();
  cal.trials = jc.at("trials").get<uint64_t>();
  cal.ci_halfwidth = jc.at("ci_halfwidth").get<double>();

  Database db(std::move(meas), cal, config_from_json(manifest.at("config")),
              manifest.at("seed").get<uint64_t>());
  db.next_id_ = manifest.at("next_id").get<uint32_t>();
  for (const auto& jr : manifest.at("records")) {
    StateRecord rec;
    rec.id = jr.at("id").get<uint32_t>();
    for (const auto& [key, val] : jr.at("metadata").items())
      rec.metadata[key] = val.get<std::string>();
    std::string id = std::to_string(rec.id);
    if (jr.at("has_state").get<bool>())
      rec.state =
          load_state((fs::path(dir) / "states" / (id + ".qds")).string(), cap);
    if (jr.at("has_sketch").get<bool>())
      rec.sketch =
          load_sketch((fs::path(dir) / "sketches" / (id + ".qsk")).string());
    if (jr.at("has_seed").get<bool>())
      rec.seed = load_seed_matrix(
          (fs::path(dir) / "seeds" / (id + ".qsh")).string());
    db.records_.push_back(std::move(rec));
  }
  if (manifest.contains("index")) {
    db.index_ = load_index((fs::path(dir) / "index.qlx").string());
    db.index_eps_ = manifest["index"].at("eps").get<double>();
    db.index_beta_ = manifest["index"].at("beta").get<double>();
  }
  return db;
}

}  // namespace qds
