// Command-line front door: builds state corpora, databases, sketches and
// seed matrices, runs the approximate operations, and benchmarks the
// estimators. Every subcommand prints a one-line JSON summary to stdout
// (human log goes to stderr) and is deterministic given its seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qds/clifford.hpp"
#include "qds/engine.hpp"
#include "qds/error.hpp"
#include "qds/lsh.hpp"
#include "qds/measurement.hpp"
#include "qds/observable.hpp"
#include "qds/oracle.hpp"
#include "qds/parallel.hpp"
#include "qds/rng.hpp"
#include "qds/shadow.hpp"
#include "qds/sketch.hpp"
#include "qds/statevector.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qds;

namespace {

// QDS_SEED wins over any --seed flag so CI can pin a whole run.
uint64_t resolve_seed(uint64_t flag_seed) {
  const char* env = std::getenv("QDS_SEED");
  if (env == nullptr || *env == '\0') return flag_seed;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == nullptr || *end != '\0') {
    throw ArgumentError(std::string("QDS_SEED is not a valid integer: ") +
                        env);
  }
  return static_cast<uint64_t>(v);
}

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

void log_line(const std::string& msg) { std::cerr << "[qds] " << msg << "\n"; }

// Shortest stable decimal form; used for every CSV cell so reruns are
// byte-identical.
std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<size_t>(
      std::llround(q * static_cast<double>(sorted.size() - 1)));
  return sorted[idx];
}

SketchFlavor parse_flavor(const std::string& s) {
  if (s == "l1") return SketchFlavor::l1;
  if (s == "l2") return SketchFlavor::l2;
  throw ArgumentError("unknown flavor: " + s);
}

MeasurementMode parse_mode(const std::string& s) {
  if (s == "clifford") return MeasurementMode::clifford;
  if (s == "pgm") return MeasurementMode::pgm;
  throw ArgumentError("unknown measurement mode: " + s);
}

ShadowMode parse_shadow_mode(const std::string& s) {
  if (s == "cst") return ShadowMode::cst;
  if (s == "qcqc") return ShadowMode::qcqc;
  throw ArgumentError("unknown shadow mode: " + s);
}

const char* flavor_name(SketchFlavor f) {
  return f == SketchFlavor::l1 ? "l1" : "l2";
}

const char* mode_name(MeasurementMode m) {
  return m == MeasurementMode::clifford ? "clifford" : "pgm";
}

json measurement_summary(const SketchMeasurement& m) {
  return json{{"mode", mode_name(m.mode)},
              {"n", m.n},
              {"k", m.k},
              {"seed", m.seed}};
}

std::vector<std::string> collect_state_files(
    const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> dir_files;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".qst")
          dir_files.push_back(e.path().string());
      }
      std::sort(dir_files.begin(), dir_files.end());
      files.insert(files.end(), dir_files.begin(), dir_files.end());
    } else if (fs::is_regular_file(in)) {
      files.push_back(in);
    } else {
      throw ArgumentError("input path does not exist: " + in);
    }
  }
  return files;
}

CTauCalibration calibration_for(const std::string& cache, uint64_t d,
                                uint64_t k) {
  if (!cache.empty() && fs::exists(cache)) {
    if (auto cal = cached_calibration(cache, d, k)) {
      log_line("using cached calibration c_tau=" + fmt_g(cal->c_tau));
      return *cal;
    }
  }
  return default_calibration(d, k);
}

struct CsvWriter {
  explicit CsvWriter(const std::string& path, const std::string& header)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ArgumentError("cannot open output file: " + path);
    out_ << header << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  int n = 4;
  uint32_t count = 1;
  uint64_t seed = 1;
  std::string out;
  int64_t planted = -1;
  double planted_distance = 0.05;
  std::string query_out;
};

int run_gen(const GenOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  fs::create_directories(o.out);
  Rng rng(seed);
  std::vector<PureState> states;
  states.reserve(o.count);
  json files = json::array();
  for (uint32_t i = 0; i < o.count; ++i) {
    states.push_back(random_haar_state(o.n, rng));
    char name[32];
    std::snprintf(name, sizeof(name), "state_%05u.qst", i);
    const std::string path = (fs::path(o.out) / name).string();
    save_state(states.back(), path);
    files.push_back(path);
  }
  json summary{{"command", "gen"}, {"ok", true},      {"seed", seed},
               {"n", o.n},         {"count", o.count}, {"out", o.out}};
  if (o.planted >= 0) {
    if (static_cast<uint64_t>(o.planted) >= o.count)
      throw ArgumentError("--planted index is outside the generated corpus");
    const PureState q =
        planted_near(states[static_cast<size_t>(o.planted)],
                     o.planted_distance, rng);
    // Default lands next to the corpus directory, not inside it, so a later
    // ingest of the directory does not swallow the query.
    const std::string qpath =
        o.query_out.empty() ? o.out + "_query.qst" : o.query_out;
    save_state(q, qpath);
    summary["planted"] = o.planted;
    summary["planted_distance"] = o.planted_distance;
    summary["query"] = qpath;
  }
  log_line("wrote " + std::to_string(o.count) + " states to " + o.out);
  emit(summary);
  return 0;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOpts {
  std::string db;
  std::vector<std::string> inputs;
  uint64_t seed = 1;
  int n = 0;
  uint64_t k = 64;
  std::string flavor = "l1";
  std::string mode = "clifford";
  uint64_t samples = 0;
  uint32_t seed_rows = 0;
  std::string shadow = "cst";
  double iota = 0.01;
  double eps_hat_factor = 0.01;
  bool no_store_states = false;
  int threads = 0;
  std::string cache;
};

int run_ingest(const IngestOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  std::optional<Database> db;
  if (fs::exists(fs::path(o.db) / "manifest.json")) {
    db.emplace(load_database(o.db));
    log_line("opened database with " + std::to_string(db->size()) +
             " records");
  } else {
    if (o.n <= 0)
      throw ArgumentError("--n is required when creating a new database");
    EngineConfig cfg;
    cfg.iota = o.iota;
    cfg.eps_hat_factor = o.eps_hat_factor;
    cfg.flavor = parse_flavor(o.flavor);
    cfg.shadow_mode = parse_shadow_mode(o.shadow);
    cfg.sketch_k = o.k;
    cfg.sketch_samples = o.samples == 0 ? SampleSpec::exact_mode()
                                        : SampleSpec::empirical(o.samples);
    cfg.seed_rows = o.seed_rows;
    cfg.store_states = !o.no_store_states;
    cfg.threads = o.threads;
    Rng rng(seed);
    SketchMeasurement m =
        parse_mode(o.mode) == MeasurementMode::clifford
            ? build_clifford_measurement(o.n, o.k, rng)
            : build_pgm_measurement(uint64_t{1} << o.n, o.k, rng);
    CTauCalibration cal = calibration_for(o.cache, m.dim(), o.k);
    db.emplace(std::move(m), cal, cfg, seed);
    log_line("created database for n=" + std::to_string(o.n));
  }
  const auto files = collect_state_files(o.inputs);
  for (const auto& f : files) {
    PureState s = load_state(f);
    db->ingest(s, {{"source", fs::path(f).filename().string()}});
  }
  save_database(*db, o.db);
  emit(json{{"command", "ingest"},
            {"ok", true},
            {"seed", db->seed()},
            {"db", o.db},
            {"n", db->num_qubits()},
            {"ingested", files.size()},
            {"total", db->size()}});
  return 0;
}

// ---------------------------------------------------------------------------
// index

struct IndexOpts {
  std::string db;
  double eps = 0.1;
  double beta = 4.0;
};

int run_index(const IndexOpts& o) {
  Database db = load_database(o.db);
  db.ensure_index(o.eps, o.beta);
  save_database(db, o.db);
  const LshParams& p = db.index()->params();
  emit(json{{"command", "index"},
            {"ok", true},
            {"seed", db.seed()},
            {"db", o.db},
            {"eps", o.eps},
            {"beta", o.beta},
            {"tables", p.tables},
            {"functions_per_table", p.functions_per_table},
            {"bucket_width", p.bucket_width},
            {"max_probes", p.max_probes},
            {"size", db.size()}});
  return 0;
}

// ---------------------------------------------------------------------------
// sketch

struct SketchOpts {
  std::string in;
  std::string out;
  std::string measurement_in;
  std::string measurement_out;
  uint64_t k = 64;
  std::string flavor = "l1";
  std::string mode = "clifford";
  uint64_t samples = 0;
  uint64_t seed = 1;
};

int run_sketch(const SketchOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  PureState state = load_state(o.in);
  Rng rng(seed);
  SketchMeasurement m =
      !o.measurement_in.empty()
          ? load_measurement(o.measurement_in)
          : (parse_mode(o.mode) == MeasurementMode::clifford
                 ? build_clifford_measurement(state.num_qubits(), o.k, rng)
                 : build_pgm_measurement(state.dim(), o.k, rng));
  const SampleSpec spec = o.samples == 0 ? SampleSpec::exact_mode()
                                         : SampleSpec::empirical(o.samples);
  SketchVector v = build_sketch(state, m, parse_flavor(o.flavor), spec, rng);
  json summary{{"command", "sketch"},
               {"ok", true},
               {"seed", seed},
               {"k", v.k},
               {"flavor", flavor_name(v.flavor)},
               {"samples", v.samples},
               {"measurement", measurement_summary(m)}};
  if (!o.out.empty()) {
    save_sketch(v, o.out);
    summary["out"] = o.out;
  }
  if (!o.measurement_out.empty()) {
    save_measurement(m, o.measurement_out);
    summary["measurement_out"] = o.measurement_out;
  }
  emit(summary);
  return 0;
}

// ---------------------------------------------------------------------------
// shadow build / estimate

struct ShadowBuildOpts {
  std::string in;
  std::string out;
  uint32_t rows = 0;
  uint64_t seed = 1;
  int threads = 0;
};

int run_shadow_build(const ShadowBuildOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  PureState state = load_state(o.in);
  Rng rng(seed);
  SeedMatrix sm = build_seed_matrix(state, o.rows, rng, o.threads);
  save_seed_matrix(sm, o.out);
  emit(json{{"command", "shadow.build"},
            {"ok", true},
            {"seed", seed},
            {"rows", sm.rows()},
            {"n", sm.n()},
            {"out", o.out}});
  return 0;
}

struct ShadowEstimateOpts {
  std::string seeds;
  std::string observable;
  std::string mode = "cst";
  uint64_t seed = 1;
  int threads = 0;
};

int run_shadow_estimate(const ShadowEstimateOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  SeedMatrix sm = load_seed_matrix(o.seeds);
  LocalObservable m = load_observable(o.observable);
  ShadowEstimate est;
  if (parse_shadow_mode(o.mode) == ShadowMode::cst) {
    est = estimate_cst(sm, m, o.threads);
  } else {
    Rng rng(seed);
    est = estimate_qcqc(sm, m, rng, o.threads);
  }
  emit(json{{"command", "shadow.estimate"},
            {"ok", true},
            {"seed", seed},
            {"mode", o.mode},
            {"value", est.value},
            {"std_error", est.std_error},
            {"rows_used", est.rows_used}});
  return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchOpts {
  std::string db;
  std::string query;
  double eps = 0.1;
  double beta = 4.0;
  uint64_t seed = 1;
  bool via_selection = false;
};

int run_search(const SearchOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  Database db = load_database(o.db);
  PureState q = load_state(o.query);
  Rng rng(seed);
  std::optional<uint32_t> id;
  AnnStats stats;
  if (o.via_selection) {
    id = db.search_via_selection(q, o.eps, o.beta, rng);
  } else {
    id = db.search(q, o.eps, o.beta, rng, &stats);
  }
  json summary{{"command", "search"},
               {"ok", true},
               {"seed", seed},
               {"eps", o.eps},
               {"beta", o.beta},
               {"found", id.has_value()},
               {"candidates", stats.candidates},
               {"probed_entries", stats.probed_entries}};
  if (id) summary["id"] = *id;
  log_line(id ? "hit: id " + std::to_string(*id) : "no id within the bound");
  emit(summary);
  return 0;
}

// ---------------------------------------------------------------------------
// join

struct JoinOpts {
  std::string db_x;
  std::string db_y;
  double eps = 0.1;
  double beta = 4.0;
};

int run_join(const JoinOpts& o) {
  Database x = load_database(o.db_x);
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  if (o.db_y.empty() || fs::equivalent(fs::path(o.db_y), fs::path(o.db_x))) {
    pairs = join(x, x, o.eps, o.beta);
  } else {
    Database y = load_database(o.db_y);
    pairs = join(x, y, o.eps, o.beta);
  }
  json jp = json::array();
  for (const auto& [a, b] : pairs) jp.push_back(json::array({a, b}));
  emit(json{{"command", "join"},
            {"ok", true},
            {"seed", x.seed()},
            {"eps", o.eps},
            {"beta", o.beta},
            {"count", pairs.size()},
            {"pairs", jp}});
  return 0;
}

// ---------------------------------------------------------------------------
// eqtest

struct EqtestOpts {
  std::string a;
  std::string b;
  double eps = 0.1;
  double beta = 4.0;
  std::string method = "sketch";
  uint64_t k = 64;
  std::string flavor = "l1";
  std::string mode = "clifford";
  uint64_t samples = 0;
  double iota = 0.01;
  double delta = 0.05;
  double eps_hat = 0.001;
  uint64_t trials = 0;
  uint64_t seed = 1;
  std::string cache;
};

int run_eqtest(const EqtestOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  PureState a = load_state(o.a);
  PureState b = load_state(o.b);
  Rng rng(seed);
  json summary{{"command", "eqtest"}, {"ok", true},   {"seed", seed},
               {"method", o.method},  {"eps", o.eps}, {"beta", o.beta}};
  EqualityVerdict verdict;
  if (o.method == "swap") {
    SwapTestResult r =
        swap_test_equality(a, b, o.eps, o.beta, o.delta, rng, o.trials);
    verdict = r.verdict;
    summary["trials"] = r.trials;
    summary["success_rate"] = r.success_rate;
    summary["consumes_fresh_copies"] = r.consumes_fresh_copies;
  } else if (o.method == "sketch") {
    if (a.num_qubits() != b.num_qubits())
      throw ArgumentError("states have different qubit counts");
    SketchMeasurement m =
        parse_mode(o.mode) == MeasurementMode::clifford
            ? build_clifford_measurement(a.num_qubits(), o.k, rng)
            : build_pgm_measurement(a.dim(), o.k, rng);
    const SketchFlavor flavor = parse_flavor(o.flavor);
    const SampleSpec spec = o.samples == 0
                                ? SampleSpec::exact_mode()
                                : SampleSpec::empirical(o.samples);
    SketchVector sa = build_sketch(a, m, flavor, spec, rng);
    SketchVector sb = build_sketch(b, m, flavor, spec, rng);
    SketchParams params;
    params.iota = o.iota;
    params.delta = o.delta;
    params.eps_hat = o.eps_hat;
    CTauCalibration cal = calibration_for(o.cache, m.dim(), o.k);
    verdict = equality_test(sa, sb, o.eps, o.beta, params, cal);
    summary["estimate"] = flavor == SketchFlavor::l1
                              ? estimate_D_l1(sa, sb, cal)
                              : estimate_D_l2(sa, sb);
    summary["threshold"] = (1.0 + o.beta) * o.eps / 2.0;
  } else {
    throw ArgumentError("unknown method: " + o.method);
  }
  summary["verdict"] =
      verdict == EqualityVerdict::equal ? "equal" : "not_equal";
  emit(summary);
  return 0;
}

// ---------------------------------------------------------------------------
// select / sort

struct SelectOpts {
  std::string db;
  std::string observable;
  double eta = 0.0;
  double eps = 0.1;
  uint64_t seed = 1;
  bool equality = false;
};

int run_select(const SelectOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  Database db = load_database(o.db);
  LocalObservable m = load_observable(o.observable);
  Rng rng(seed);
  std::vector<uint32_t> ids = o.equality
                                  ? db.select_equality(m, o.eta, o.eps, rng)
                                  : db.select(m, o.eta, o.eps, rng);
  emit(json{{"command", "select"},
            {"ok", true},
            {"seed", seed},
            {"eta", o.eta},
            {"eps", o.eps},
            {"equality", o.equality},
            {"count", ids.size()},
            {"ids", ids}});
  return 0;
}

struct SortOpts {
  std::string db;
  std::string observable;
  double eps = 0.1;
  uint64_t seed = 1;
};

int run_sort(const SortOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  Database db = load_database(o.db);
  LocalObservable m = load_observable(o.observable);
  Rng rng(seed);
  std::vector<uint32_t> ids = db.sort(m, o.eps, rng);
  emit(json{{"command", "sort"},
            {"ok", true},
            {"seed", seed},
            {"eps", o.eps},
            {"ids", ids}});
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOpts {
  uint64_t d = 0;
  uint64_t k = 0;
  uint64_t trials = 2000;
  uint64_t seed = 1;
  int threads = 0;
  std::string cache;
};

int run_calibrate(const CalibrateOpts& o) {
  const uint64_t seed = resolve_seed(o.seed);
  Rng rng(seed);
  CTauCalibration cal = calibrate_c_tau(o.d, o.k, o.trials, rng, o.threads);
  json summary{{"command", "calibrate"},
               {"ok", true},
               {"seed", seed},
               {"d", cal.d},
               {"k", cal.k},
               {"trials", cal.trials},
               {"c_tau", cal.c_tau},
               {"ci_halfwidth", cal.ci_halfwidth}};
  if (!o.cache.empty()) {
    store_calibration(o.cache, cal);
    summary["cache"] = o.cache;
  }
  emit(summary);
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchCommon {
  std::string format = "csv";
  std::string out = "qds_bench.csv";
  uint64_t seed = 1;
  int threads = 0;
};

// Appends rows either to a CSV file or into the summary, per --format.
void finish_bench(const BenchCommon& c, json& summary,
                  const std::string& header,
                  const std::vector<std::vector<std::string>>& rows) {
  if (c.format == "json") {
    json jr = json::array();
    for (const auto& r : rows) {
      json cells = json::array();
      for (const auto& cell : r) cells.push_back(cell);
      jr.push_back(cells);
    }
    summary["columns"] = header;
    summary["data"] = jr;
  } else if (c.format == "csv") {
    CsvWriter w(c.out, header);
    for (const auto& r : rows) w.row(r);
    summary["out"] = c.out;
  } else {
    throw ArgumentError("unknown format: " + c.format);
  }
}

struct BenchDistortionOpts {
  BenchCommon common;
  uint64_t d = 1024;
  uint64_t k = 64;
  uint64_t trials = 500;
  std::string flavor = "l1";
  uint64_t samples = 0;
  std::string cache;
};

int run_bench_distortion(const BenchDistortionOpts& o) {
  const uint64_t seed = resolve_seed(o.common.seed);
  if (o.d < 2 || (o.d & (o.d - 1)) != 0)
    throw ArgumentError("--d must be a power of two (one bin per basis "
                        "direction of an n-qubit register)");
  const int n = std::bit_width(o.d) - 1;
  const SketchFlavor flavor = parse_flavor(o.flavor);
  const SampleSpec spec = o.samples == 0 ? SampleSpec::exact_mode()
                                         : SampleSpec::empirical(o.samples);
  const CTauCalibration cal = calibration_for(o.cache, o.d, o.k);
  Rng root(seed);
  std::vector<double> ds(o.trials), ests(o.trials);
  parallel_for(o.trials, o.common.threads, [&](uint64_t t) {
    Rng local = root.substream(t);
    SketchMeasurement m = build_clifford_measurement(n, o.k, local);
    PureState a = random_haar_state(n, local);
    PureState b = random_haar_state(n, local);
    while (trace_distance(a, b) < 0.05) b = random_haar_state(n, local);
    SketchVector sa = build_sketch(a, m, flavor, spec, local);
    SketchVector sb = build_sketch(b, m, flavor, spec, local);
    ds[t] = trace_distance(a, b);
    ests[t] = flavor == SketchFlavor::l1 ? estimate_D_l1(sa, sb, cal)
                                         : estimate_D_l2(sa, sb);
  });
  std::vector<std::vector<std::string>> rows;
  std::vector<double> ratios(o.trials);
  uint64_t in_band = 0;
  for (uint64_t t = 0; t < o.trials; ++t) {
    ratios[t] = ests[t] / ds[t];
    if (ratios[t] >= 0.65 && ratios[t] <= 1.35) ++in_band;
    rows.push_back({std::to_string(t), std::to_string(o.d),
                    std::to_string(o.k), o.flavor, fmt_g(ds[t]),
                    fmt_g(ests[t]), fmt_g(ratios[t])});
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(o.trials);
  json summary{{"command", "bench.distortion"},
               {"ok", true},
               {"seed", seed},
               {"d", o.d},
               {"k", o.k},
               {"trials", o.trials},
               {"flavor", o.flavor},
               {"mean_ratio", mean},
               {"p05", percentile(sorted, 0.05)},
               {"p50", percentile(sorted, 0.50)},
               {"p95", percentile(sorted, 0.95)},
               {"band_fraction",
                static_cast<double>(in_band) / static_cast<double>(o.trials)}};
  finish_bench(o.common, summary, "trial,d,k,flavor,D,estimate,ratio", rows);
  emit(summary);
  return 0;
}

struct BenchMomentsOpts {
  BenchCommon common;
  int n = 4;
  uint64_t k = 4;
  uint64_t trials = 100000;
};

int run_bench_moments(const BenchMomentsOpts& o) {
  const uint64_t seed = resolve_seed(o.common.seed);
  Rng rng(seed);
  MomentStats stats =
      validate_design_moments(o.n, o.k, o.trials, rng, o.common.threads);
  const double wvar = estimate_w_variance(o.n, o.trials, rng, o.common.threads);
  const double d = static_cast<double>(uint64_t{1} << o.n);
  struct Row {
    const char* metric;
    double est, target;
  };
  const Row table[] = {
      {"second_moment", stats.est_second, 1.0 / d},
      {"fourth_moment", stats.est_fourth, 2.0 / (d * (d + 1.0))},
      {"cross_moment", stats.est_cross, 1.0 / (d * (d + 1.0))},
      {"w_variance", wvar, 2.0 * d / (d + 1.0)},
  };
  std::vector<std::vector<std::string>> rows;
  json metrics;
  for (const Row& r : table) {
    const double rel = std::abs(r.est - r.target) / r.target;
    rows.push_back({r.metric, fmt_g(r.est), fmt_g(r.target), fmt_g(rel)});
    metrics[r.metric] = json{{"estimate", r.est},
                             {"target", r.target},
                             {"rel_error", rel}};
  }
  json summary{{"command", "bench.moments"}, {"ok", true},
               {"seed", seed},               {"n", o.n},
               {"k", o.k},                   {"trials", o.trials},
               {"metrics", metrics}};
  finish_bench(o.common, summary, "metric,estimate,target,rel_error", rows);
  emit(summary);
  return 0;
}

struct BenchPlantedOpts {
  BenchCommon common;
  uint64_t m = 1000;
  int n = 10;
  uint64_t k = 64;
  double eps = 0.1;
  double beta = 4.0;
  uint64_t queries = 100;
  double planted_distance = 0.03;
};

int run_bench_planted(const BenchPlantedOpts& o) {
  const uint64_t seed = resolve_seed(o.common.seed);
  Rng rng(seed);
  EngineConfig cfg;
  cfg.sketch_k = o.k;
  cfg.threads = o.common.threads;
  SketchMeasurement meas = build_clifford_measurement(o.n, o.k, rng);
  CTauCalibration cal = default_calibration(meas.dim(), o.k);
  Database db(std::move(meas), cal, cfg, rng.next_u64());
  std::vector<PureState> states;
  states.reserve(o.m);
  for (uint64_t i = 0; i < o.m; ++i) {
    states.push_back(random_haar_state(o.n, rng));
    db.ingest(states.back());
  }
  db.ensure_index(o.eps, o.beta);
  std::vector<std::vector<std::string>> rows;
  uint64_t hits = 0, violations = 0, candidate_sum = 0;
  for (uint64_t q = 0; q < o.queries; ++q) {
    const auto target = static_cast<uint32_t>(rng.below(o.m));
    PureState query = planted_near(states[target], o.planted_distance, rng);
    AnnStats stats;
    std::optional<uint32_t> id = db.search(query, o.eps, o.beta, rng, &stats);
    const bool hit = id && *id == target;
    if (hit) ++hits;
    double true_d = -1.0;
    if (id) {
      true_d = trace_distance(states[*id], query);
      if (true_d > o.beta * o.eps) ++violations;
    }
    candidate_sum += stats.candidates;
    rows.push_back({std::to_string(q), std::to_string(target),
                    id ? std::to_string(*id) : "-1", hit ? "1" : "0",
                    fmt_g(true_d), std::to_string(stats.candidates),
                    std::to_string(stats.probed_entries)});
  }
  json summary{
      {"command", "bench.planted"},
      {"ok", true},
      {"seed", seed},
      {"m", o.m},
      {"n", o.n},
      {"eps", o.eps},
      {"beta", o.beta},
      {"queries", o.queries},
      {"recall", static_cast<double>(hits) / static_cast<double>(o.queries)},
      {"soundness_violations", violations},
      {"mean_candidates", static_cast<double>(candidate_sum) /
                              static_cast<double>(o.queries)}};
  finish_bench(o.common, summary,
               "query,target,returned,hit,true_D,candidates,probed_entries",
               rows);
  emit(summary);
  return 0;
}

struct BenchSwapOpts {
  BenchCommon common;
  int n = 4;
  std::string pair = "orthogonal";  // orthogonal | identical | planted
  double distance = 0.1;
  uint64_t trials = 100000;
  double eps = 0.1;
  double beta = 4.0;
  double delta = 0.05;
};

int run_bench_swap(const BenchSwapOpts& o) {
  const uint64_t seed = resolve_seed(o.common.seed);
  Rng rng(seed);
  PureState a = random_haar_state(o.n, rng);
  PureState b = a;
  if (o.pair == "orthogonal") {
    b = planted_near(a, 1.0, rng);
  } else if (o.pair == "planted") {
    b = planted_near(a, o.distance, rng);
  } else if (o.pair != "identical") {
    throw ArgumentError("unknown pair kind: " + o.pair);
  }
  SwapTestResult r =
      swap_test_equality(a, b, o.eps, o.beta, o.delta, rng, o.trials);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({o.pair, std::to_string(o.n), std::to_string(r.trials),
                  fmt_g(r.success_rate),
                  r.verdict == EqualityVerdict::equal ? "equal"
                                                      : "not_equal"});
  json summary{{"command", "bench.swap"},
               {"ok", true},
               {"seed", seed},
               {"n", o.n},
               {"pair", o.pair},
               {"trials", r.trials},
               {"success_rate", r.success_rate},
               {"verdict", r.verdict == EqualityVerdict::equal
                               ? "equal"
                               : "not_equal"}};
  finish_bench(o.common, summary, "pair,n,trials,success_rate,verdict", rows);
  emit(summary);
  return 0;
}

void add_bench_common(CLI::App* sub, BenchCommon& c) {
  sub->add_option("--format", c.format, "Row output: csv (file) or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "CSV output path");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--threads", c.threads, "Worker threads (0 = cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketches and approximate database operations over simulated "
               "pure states"};
  app.require_subcommand(1);

  auto gen = std::make_shared<GenOpts>();
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate random state files");
  gen_cmd->add_option("--n", gen->n, "Qubit count")->required();
  gen_cmd->add_option("--count", gen->count, "Number of states")->required();
  gen_cmd->add_option("--seed", gen->seed, "Random seed");
  gen_cmd->add_option("--out", gen->out, "Output directory")->required();
  gen_cmd->add_option("--planted", gen->planted,
                      "Also write a query near this state index");
  gen_cmd->add_option("--planted-distance", gen->planted_distance,
                      "Trace distance of the planted query");
  gen_cmd->add_option("--query-out", gen->query_out,
                      "Planted query path (default <out>_query.qst)");

  auto ingest = std::make_shared<IngestOpts>();
  CLI::App* ingest_cmd =
      app.add_subcommand("ingest", "Create or extend a database");
  ingest_cmd->add_option("--db", ingest->db, "Database directory")->required();
  ingest_cmd->add_option("--in", ingest->inputs,
                         "State files or directories of .qst files")
      ->required();
  ingest_cmd->add_option("--seed", ingest->seed, "Database seed (create only)");
  ingest_cmd->add_option("--n", ingest->n, "Qubit count (create only)");
  ingest_cmd->add_option("--k", ingest->k, "Sketch bins (create only)");
  ingest_cmd->add_option("--flavor", ingest->flavor, "Sketch flavor l1|l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  ingest_cmd->add_option("--mode", ingest->mode, "Measurement clifford|pgm")
      ->check(CLI::IsMember({"clifford", "pgm"}));
  ingest_cmd->add_option("--samples", ingest->samples,
                         "Sketch samples per state (0 = exact)");
  ingest_cmd->add_option("--seed-rows", ingest->seed_rows,
                         "Seed-matrix rows per record");
  ingest_cmd->add_option("--shadow", ingest->shadow, "Shadow mode cst|qcqc")
      ->check(CLI::IsMember({"cst", "qcqc"}));
  ingest_cmd->add_option("--iota", ingest->iota, "Sketch distortion budget");
  ingest_cmd->add_option("--eps-hat-factor", ingest->eps_hat_factor,
                         "eps_hat as a fraction of eps");
  ingest_cmd->add_flag("--no-store-states", ingest->no_store_states,
                       "Drop raw vectors after sketching");
  ingest_cmd->add_option("--threads", ingest->threads, "Worker threads");
  ingest_cmd->add_option("--cache", ingest->cache, "Calibration cache file");

  auto index = std::make_shared<IndexOpts>();
  CLI::App* index_cmd =
      app.add_subcommand("index", "Build the ANN index for (eps, beta)");
  index_cmd->add_option("--db", index->db, "Database directory")->required();
  index_cmd->add_option("--eps", index->eps, "Distance threshold")->required();
  index_cmd->add_option("--beta", index->beta, "Promise-gap factor")
      ->required();

  auto sketch = std::make_shared<SketchOpts>();
  CLI::App* sketch_cmd =
      app.add_subcommand("sketch", "Sketch a single state file");
  sketch_cmd->add_option("--in", sketch->in, "State file")->required();
  sketch_cmd->add_option("--out", sketch->out, "Sketch output file");
  sketch_cmd->add_option("--measurement", sketch->measurement_in,
                         "Reuse a saved measurement file");
  sketch_cmd->add_option("--measurement-out", sketch->measurement_out,
                         "Save the measurement for reuse");
  sketch_cmd->add_option("--k", sketch->k, "Outcome bins");
  sketch_cmd->add_option("--flavor", sketch->flavor, "l1|l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  sketch_cmd->add_option("--mode", sketch->mode, "clifford|pgm")
      ->check(CLI::IsMember({"clifford", "pgm"}));
  sketch_cmd->add_option("--samples", sketch->samples,
                         "Measurement shots (0 = exact)");
  sketch_cmd->add_option("--seed", sketch->seed, "Random seed");

  CLI::App* shadow_cmd =
      app.add_subcommand("shadow", "Seed matrices and shadow estimates");
  shadow_cmd->require_subcommand(1);
  auto sb = std::make_shared<ShadowBuildOpts>();
  CLI::App* sb_cmd =
      shadow_cmd->add_subcommand("build", "Record a seed matrix for a state");
  sb_cmd->add_option("--in", sb->in, "State file")->required();
  sb_cmd->add_option("--rows", sb->rows, "Rows (one per simulated copy)")
      ->required();
  sb_cmd->add_option("--out", sb->out, "Seed matrix output file")->required();
  sb_cmd->add_option("--seed", sb->seed, "Random seed");
  sb_cmd->add_option("--threads", sb->threads, "Worker threads");
  auto se = std::make_shared<ShadowEstimateOpts>();
  CLI::App* se_cmd = shadow_cmd->add_subcommand(
      "estimate", "Estimate an observable from a seed matrix");
  se_cmd->add_option("--seeds", se->seeds, "Seed matrix file")->required();
  se_cmd->add_option("--observable", se->observable, "Observable file")
      ->required();
  se_cmd->add_option("--mode", se->mode, "cst|qcqc")
      ->check(CLI::IsMember({"cst", "qcqc"}));
  se_cmd->add_option("--seed", se->seed, "Random seed (qcqc resampling)");
  se_cmd->add_option("--threads", se->threads, "Worker threads");

  auto search = std::make_shared<SearchOpts>();
  CLI::App* search_cmd =
      app.add_subcommand("search", "Approximate nearest-state query");
  search_cmd->add_option("--db", search->db, "Database directory")->required();
  search_cmd->add_option("--query", search->query, "Query state file")
      ->required();
  search_cmd->add_option("--eps", search->eps, "Distance threshold")
      ->required();
  search_cmd->add_option("--beta", search->beta, "Promise-gap factor")
      ->required();
  search_cmd->add_option("--seed", search->seed, "Random seed");
  search_cmd->add_flag("--via-selection", search->via_selection,
                       "Use the shadow-based selection reduction");

  auto join_o = std::make_shared<JoinOpts>();
  CLI::App* join_cmd =
      app.add_subcommand("join", "Approximate distance join of two databases");
  join_cmd->add_option("--db-x", join_o->db_x, "Left database")->required();
  join_cmd->add_option("--db-y", join_o->db_y,
                       "Right database (default: self-join)");
  join_cmd->add_option("--eps", join_o->eps, "Distance threshold")->required();
  join_cmd->add_option("--beta", join_o->beta, "Promise-gap factor")
      ->required();

  auto eq = std::make_shared<EqtestOpts>();
  CLI::App* eq_cmd =
      app.add_subcommand("eqtest", "Approximate equality of two states");
  eq_cmd->add_option("--a", eq->a, "First state file")->required();
  eq_cmd->add_option("--b", eq->b, "Second state file")->required();
  eq_cmd->add_option("--eps", eq->eps, "Distance threshold")->required();
  eq_cmd->add_option("--beta", eq->beta, "Promise-gap factor")->required();
  eq_cmd->add_option("--method", eq->method, "sketch|swap")
      ->check(CLI::IsMember({"sketch", "swap"}));
  eq_cmd->add_option("--k", eq->k, "Outcome bins (sketch method)");
  eq_cmd->add_option("--flavor", eq->flavor, "l1|l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  eq_cmd->add_option("--mode", eq->mode, "clifford|pgm")
      ->check(CLI::IsMember({"clifford", "pgm"}));
  eq_cmd->add_option("--samples", eq->samples, "Shots per sketch (0 = exact)");
  eq_cmd->add_option("--iota", eq->iota, "Sketch distortion budget");
  eq_cmd->add_option("--delta", eq->delta, "Failure probability");
  eq_cmd->add_option("--eps-hat", eq->eps_hat, "Additive estimate error");
  eq_cmd->add_option("--trials", eq->trials,
                     "Swap-test repetitions (0 = derived)");
  eq_cmd->add_option("--seed", eq->seed, "Random seed");
  eq_cmd->add_option("--cache", eq->cache, "Calibration cache file");

  auto sel = std::make_shared<SelectOpts>();
  CLI::App* sel_cmd =
      app.add_subcommand("select", "Select records by estimated expectation");
  sel_cmd->add_option("--db", sel->db, "Database directory")->required();
  sel_cmd->add_option("--observable", sel->observable, "Observable file")
      ->required();
  sel_cmd->add_option("--eta", sel->eta, "Expectation threshold")->required();
  sel_cmd->add_option("--eps", sel->eps, "Additive tolerance")->required();
  sel_cmd->add_option("--seed", sel->seed, "Random seed");
  sel_cmd->add_flag("--equality", sel->equality,
                    "Band selection around eta instead of at-least");

  auto sort_o = std::make_shared<SortOpts>();
  CLI::App* sort_cmd =
      app.add_subcommand("sort", "Sort records by estimated expectation");
  sort_cmd->add_option("--db", sort_o->db, "Database directory")->required();
  sort_cmd->add_option("--observable", sort_o->observable, "Observable file")
      ->required();
  sort_cmd->add_option("--eps", sort_o->eps, "Adjacent-pair tolerance")
      ->required();
  sort_cmd->add_option("--seed", sort_o->seed, "Random seed");

  auto cal = std::make_shared<CalibrateOpts>();
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "Monte Carlo calibration of the l1 scale constant");
  cal_cmd->add_option("--d", cal->d, "State dimension (power of two)")
      ->required();
  cal_cmd->add_option("--k", cal->k, "Outcome bins")->required();
  cal_cmd->add_option("--trials", cal->trials, "Calibration draws");
  cal_cmd->add_option("--seed", cal->seed, "Random seed");
  cal_cmd->add_option("--threads", cal->threads, "Worker threads");
  cal_cmd->add_option("--cache", cal->cache, "Calibration cache to update");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Estimator benchmarks with CSV output");
  bench_cmd->require_subcommand(1);
  auto bd = std::make_shared<BenchDistortionOpts>();
  CLI::App* bd_cmd = bench_cmd->add_subcommand(
      "distortion", "Sketch-estimate vs exact distance ratios");
  add_bench_common(bd_cmd, bd->common);
  bd_cmd->add_option("--d", bd->d, "State dimension (power of two)");
  bd_cmd->add_option("--k", bd->k, "Outcome bins");
  bd_cmd->add_option("--trials", bd->trials, "Measurement/pair draws");
  bd_cmd->add_option("--flavor", bd->flavor, "l1|l2")
      ->check(CLI::IsMember({"l1", "l2"}));
  bd_cmd->add_option("--samples", bd->samples, "Shots per sketch (0 = exact)");
  bd_cmd->add_option("--cache", bd->cache, "Calibration cache file");
  auto bm = std::make_shared<BenchMomentsOpts>();
  CLI::App* bm_cmd = bench_cmd->add_subcommand(
      "moments", "Sampled-column moments vs closed forms");
  add_bench_common(bm_cmd, bm->common);
  bm_cmd->add_option("--n", bm->n, "Qubit count");
  bm_cmd->add_option("--k", bm->k, "Outcome bins");
  bm_cmd->add_option("--trials", bm->trials, "Sampled columns");
  auto bp = std::make_shared<BenchPlantedOpts>();
  CLI::App* bp_cmd = bench_cmd->add_subcommand(
      "planted", "Recall/soundness on a planted-neighbor corpus");
  add_bench_common(bp_cmd, bp->common);
  bp_cmd->add_option("--m", bp->m, "Corpus size");
  bp_cmd->add_option("--n", bp->n, "Qubit count");
  bp_cmd->add_option("--k", bp->k, "Outcome bins");
  bp_cmd->add_option("--eps", bp->eps, "Distance threshold");
  bp_cmd->add_option("--beta", bp->beta, "Promise-gap factor");
  bp_cmd->add_option("--queries", bp->queries, "Query count");
  bp_cmd->add_option("--planted-distance", bp->planted_distance,
                     "Query distance to its target");
  auto bs = std::make_shared<BenchSwapOpts>();
  CLI::App* bs_cmd =
      bench_cmd->add_subcommand("swap", "Swap-test acceptance frequencies");
  add_bench_common(bs_cmd, bs->common);
  bs_cmd->add_option("--n", bs->n, "Qubit count");
  bs_cmd->add_option("--pair", bs->pair, "orthogonal|identical|planted")
      ->check(CLI::IsMember({"orthogonal", "identical", "planted"}));
  bs_cmd->add_option("--distance", bs->distance,
                     "Pair distance for kind=planted");
  bs_cmd->add_option("--trials", bs->trials, "Swap repetitions");
  bs_cmd->add_option("--eps", bs->eps, "Distance threshold");
  bs_cmd->add_option("--beta", bs->beta, "Promise-gap factor");
  bs_cmd->add_option("--delta", bs->delta, "Failure probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(*gen);
    if (ingest_cmd->parsed()) return run_ingest(*ingest);
    if (index_cmd->parsed()) return run_index(*index);
    if (sketch_cmd->parsed()) return run_sketch(*sketch);
    if (shadow_cmd->parsed()) {
      if (sb_cmd->parsed()) return run_shadow_build(*sb);
      if (se_cmd->parsed()) return run_shadow_estimate(*se);
    }
    if (search_cmd->parsed()) return run_search(*search);
    if (join_cmd->parsed()) return run_join(*join_o);
    if (eq_cmd->parsed()) return run_eqtest(*eq);
    if (sel_cmd->parsed()) return run_select(*sel);
    if (sort_cmd->parsed()) return run_sort(*sort_o);
    if (cal_cmd->parsed()) return run_calibrate(*cal);
    if (bench_cmd->parsed()) {
      if (bd_cmd->parsed()) return run_bench_distortion(*bd);
      if (bm_cmd->parsed()) return run_bench_moments(*bm);
      if (bp_cmd->parsed()) return run_bench_planted(*bp);
      if (bs_cmd->parsed()) return run_bench_swap(*bs);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 3;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
