#include "qds/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "qds/error.hpp"
#include "qds/io.hpp"
#include "qds/parallel.hpp"

namespace qds {

namespace {

using json = nlohmann::json;

void check_comparable(const SketchVector& a, const SketchVector& b,
                      SketchFlavor flavor) {
  if (!(a.measurement_id == b.measurement_id))
    throw ArgumentError(
        "sketches come from different measurements and are incomparable");
  if (a.flavor != flavor || b.flavor != flavor)
    throw ArgumentError("sketch flavor does not match the estimator");
  if (a.k != b.k || a.d != b.d)
    throw ArgumentError("sketch shapes differ");
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double clamp_estimate(double est) {
  return std::clamp(est, 0.0, 1.0 + kEstimateSlack);
}

}  // namespace

MeasurementId id_of(const SketchMeasurement& m) {
  return MeasurementId{m.mode, m.n, m.k, m.seed};
}

void SketchParams::validate() const {
  if (iota <= 0.0) throw ArgumentError("iota must be positive");
  if (delta <= 0.0 || delta >= 1.0)
    throw ArgumentError("delta must lie in (0, 1)");
  if (c_design <= 0.0) throw ArgumentError("c_design must be positive");
  if (eps_hat <= 0.0) throw ArgumentError("eps_hat must be positive");
  if (!samples.exact && samples.samples == 0)
    throw ArgumentError("empirical mode needs a positive sample count");
}

uint64_t SketchParams::derive_k() const {
  validate();
  double raw = c_design * std::log(1.0 / delta) / (iota * iota);
  auto rounded = static_cast<uint64_t>(std::ceil(raw));
  if (rounded < 2) rounded = 2;
  return std::bit_ceil(rounded);
}

uint64_t samples_rule_basic(uint64_t d, double eps_hat, double c_s) {
  if (eps_hat <= 0.0) throw ArgumentError("eps_hat must be positive");
  if (c_s <= 0.0) throw ArgumentError("c_s must be positive");
  return static_cast<uint64_t>(
      std::ceil(c_s * double(d) / (eps_hat * eps_hat)));
}

uint64_t samples_rule_delta(uint64_t d, double eps_hat, double delta,
                            double c_s) {
  if (delta <= 0.0 || delta >= 1.0)
    throw ArgumentError("delta must lie in (0, 1)");
  return static_cast<uint64_t>(
      std::ceil(double(samples_rule_basic(d, eps_hat, c_s)) *
                std::log(1.0 / delta)));
}

uint64_t default_samples(uint64_t d, double eps_hat, double delta, double c_s) {
  return std::max(samples_rule_basic(d, eps_hat, c_s),
                  samples_rule_delta(d, eps_hat, delta, c_s));
}

SketchVector build_sketch(const PureState& state, const SketchMeasurement& m,
                          SketchFlavor flavor, const SampleSpec& spec,
                          Rng& rng) {
  if (!spec.exact && spec.samples == 0)
    throw ArgumentError("empirical sketch needs a positive sample count");
  SketchVector v;
  v.flavor = flavor;
  v.k = m.k;
  v.d = m.dim();
  v.measurement_id = id_of(m);
  std::vector<double> exact = exact_outcome_distribution(state, m);
  if (spec.exact) {
    v.samples = 0;
    v.probs = std::move(exact);
    return v;
  }
  v.samples = spec.samples;
  std::vector<double> cdf(exact.size());
  double acc = 0.0;
  for (size_t i = 0; i < exact.size(); ++i) {
    acc += exact[i];
    cdf[i] = acc;
  }
  std::vector<uint64_t> counts(m.k, 0);
  for (uint64_t s = 0; s < spec.samples; ++s) {
    double u = rng.uniform() * acc;
    size_t i = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (i >= counts.size()) i = counts.size() - 1;
    ++counts[i];
  }
  v.probs.resize(m.k);
  for (uint64_t i = 0; i < m.k; ++i)
    v.probs[i] = double(counts[i]) / double(spec.samples);
  return v;
}

CTauCalibration default_calibration(uint64_t d, uint64_t k) {
  return CTauCalibration{d, k, kDefaultCTau, 0, 0.0};
}

CTauCalibration calibrate_c_tau(uint64_t d, uint64_t k, uint64_t trials,
                                Rng& rng, int threads) {
  if (trials < 100)
    throw ArgumentError("calibration needs at least 100 trials");
  if (!std::has_single_bit(d) || !std::has_single_bit(k) || k > d || k < 2)
    throw ArgumentError("calibration needs powers of two with 2 <= k <= d");
  int n = std::bit_width(d) - 1;
  std::vector<double> ratio(trials, 0.0);
  uint64_t base = rng.next_u64();
  Rng root(base);
  if (threads <= 0) threads = int(default_thread_count());
  parallel_for(trials, unsigned(threads), [&](size_t i) {
    Rng sub = root.substream(i);
    SketchMeasurement m = build_clifford_measurement(n, k, sub);
    for (;;) {
      PureState a = random_haar_state(n, sub);
      PureState b = random_haar_state(n, sub);
      double dist = trace_distance(a, b);
      if (dist < 0.05) continue;  // degenerate pair; resample
      auto pa = exact_outcome_distribution(a, m);
      auto pb = exact_outcome_distribution(b, m);
      ratio[i] = std::sqrt(double(d) / double(k)) * l1_distance(pa, pb) / dist;
      break;
    }
  });
  double mean = 0.0;
  for (double r : ratio) mean += r;
  mean /= double(trials);
  double ss = 0.0;
  for (double r : ratio) ss += (r - mean) * (r - mean);
  double sd = std::sqrt(ss / double(trials - 1));
  double mean_hw = 1.96 * sd / std::sqrt(double(trials));

  CTauCalibration cal;
  cal.d = d;
  cal.k = k;
  cal.c_tau = 1.0 / mean;
  cal.trials = trials;
  cal.ci_halfwidth = mean_hw / (mean * mean);  // delta method on 1/mean
  if (cal.c_tau <= 0.4 || cal.c_tau >= 2.5)
    throw PreconditionError("calibrated c_tau " + std::to_string(cal.c_tau) +
                            " fell outside the sanity band (0.4, 2.5)");
  return cal;
}

double estimate_D_l1(const SketchVector& a, const SketchVector& b,
                     const CTauCalibration& cal) {
  check_comparable(a, b, SketchFlavor::l1);
  double scale = std::sqrt(double(a.d) / double(a.k)) * cal.c_tau;
  return clamp_estimate(scale * l1_distance(a.probs, b.probs));
}

double estimate_D_l2(const SketchVector& a, const SketchVector& b) {
  check_comparable(a, b, SketchFlavor::l2);
  double scale = std::sqrt(double(a.d) / 2.0);
  return clamp_estimate(scale * l2_distance(a.probs, b.probs));
}

EqualityVerdict equality_test(const SketchVector& a, const SketchVector& b,
                              double eps, double beta,
                              const SketchParams& params,
                              const CTauCalibration& cal) {
  params.validate();
  if (eps <= 0.0 || eps > 1.0) throw ArgumentError("eps must lie in (0, 1]");
  double min_beta = 1.0 + params.iota + params.eps_hat / eps;
  if (beta <= min_beta)
    throw ArgumentError("beta = " + std::to_string(beta) +
                        " is infeasible; needs beta > " +
                        std::to_string(min_beta));
  double est = a.flavor == SketchFlavor::l1 ? estimate_D_l1(a, b, cal)
                                            : estimate_D_l2(a, b);
  return est <= (1.0 + beta) * eps / 2.0 ? EqualityVerdict::equal
                                         : EqualityVerdict::not_equal;
}

void save_sketch(const SketchVector& v, const std::string& path) {
  auto out = io::open_out(path);
  io::write_magic(out, "QSK1");
  io::write_le<uint8_t>(out, v.flavor == SketchFlavor::l1 ? 0 : 1);
  io::write_le<uint32_t>(out, static_cast<uint32_t>(v.k));
  io::write_le<uint64_t>(out, v.d);
  io::write_le<uint64_t>(out, v.samples);
  io::write_le<uint8_t>(
      out, v.measurement_id.mode == MeasurementMode::clifford ? 0 : 1);
  io::write_le<int32_t>(out, v.measurement_id.n);
  io::write_le<uint64_t>(out, v.measurement_id.k);
  io::write_le<uint64_t>(out, v.measurement_id.seed);
  for (double p : v.probs) io::write_le<double>(out, p);
  if (!out) throw ArgumentError("failed writing sketch file: " + path);
}

SketchVector load_sketch(const std::string& path) {
  auto in = io::open_in(path);
  io::expect_magic(in, "QSK1", "sketch");
  SketchVector v;
  v.flavor = io::read_le<uint8_t>(in) == 0 ? SketchFlavor::l1 : SketchFlavor::l2;
  v.k = io::read_le<uint32_t>(in);
  v.d = io::read_le<uint64_t>(in);
  v.samples = io::read_le<uint64_t>(in);
  v.measurement_id.mode = io::read_le<uint8_t>(in) == 0
                              ? MeasurementMode::clifford
                              : MeasurementMode::pgm;
  v.measurement_id.n = io::read_le<int32_t>(in);
  v.measurement_id.k = io::read_le<uint64_t>(in);
  v.measurement_id.seed = io::read_le<uint64_t>(in);
  if (v.k == 0 || v.k > (uint64_t{1} << 32))
    throw ArgumentError("sketch file has bad k");
  v.probs.resize(v.k);
  for (uint64_t i = 0; i < v.k; ++i) v.probs[i] = io::read_le<double>(in);
  return v;
}

std::optional<CTauCalibration> cached_calibration(const std::string& path,
                                                  uint64_t d, uint64_t k) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("entries"))
    return std::nullopt;
  for (const auto& e : doc["entries"]) {
    if (e.value("d", uint64_t{0}) == d && e.value("k", uint64_t{0}) == k) {
      CTauCalibration cal;
      cal.d = d;
      cal.k = k;
      cal.c_tau = e.value("c_tau", kDefaultCTau);
      cal.trials = e.value("trials", uint64_t{0});
      cal.ci_halfwidth = e.value("ci_halfwidth", 0.0);
      return cal;
    }
  }
  return std::nullopt;
}

void store_calibration(const std::string& path, const CTauCalibration& cal) {
  json doc;
  {
    std::ifstream in(path);
    if (in) {
      json existing = json::parse(in, nullptr, false);
      if (!existing.is_discarded() && existing.is_object()) doc = existing;
    }
  }
  if (!doc.contains("entries") || !doc["entries"].is_array())
    doc["entries"] = json::array();
  json entry{{"d", cal.d},
             {"k", cal.k},
             {"c_tau", cal.c_tau},
             {"trials", cal.trials},
             {"ci_halfwidth", cal.ci_halfwidth}};
  bool replaced = false;
  for (auto& e : doc["entries"]) {
    if (e.value("d", uint64_t{0}) == cal.d &&
        e.value("k", uint64_t{0}) == cal.k) {
      e = entry;
      replaced = true;
      break;
    }
  }
  if (!replaced) doc["entries"].push_back(entry);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ArgumentError("cannot open calibration cache: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace qds
