#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qds/error.hpp"
#include "qds/rng.hpp"
#include "qds/statevector.hpp"

#include "support.hpp"

using namespace qds;

namespace {
const double kR = 1.0 / std::sqrt(2.0);
}

TEST_CASE("state construction rejects bad shapes and norms") {
  CHECK_THROWS_AS(PureState(2, std::vector<cplx>(3, 0.0)), ArgumentError);
  std::vector<cplx> not_unit(4, 0.0);
  not_unit[0] = 0.9;
  CHECK_THROWS_AS(PureState(2, not_unit), ArgumentError);
  std::vector<cplx> slightly_off(2, 0.0);
  slightly_off[0] = std::sqrt(1.0 + 0.5e-9);  // inside the 1e-9 tolerance
  CHECK_NOTHROW(PureState(1, slightly_off));
}

TEST_CASE("basis states are unit vectors at the right index") {
  PureState s = PureState::basis(3, 5);
  CHECK(s.dim() == 8);
  for (uint64_t i = 0; i < 8; ++i) {
    CHECK(std::abs(s[i] - (i == 5 ? cplx(1.0) : cplx(0.0))) == 0.0);
  }
  CHECK_THROWS_AS(PureState::basis(2, 4), ArgumentError);
}

TEST_CASE("single-qubit gates act on the most significant bit for qubit 0") {
  // H on qubit 0 of |00> spreads amplitude over indices 0 and 2.
  PureState s = apply_gate(PureState::basis(2, 0), Gate::h(0));
  CHECK(std::abs(s[0] - cplx(kR)) < 1e-15);
  CHECK(std::abs(s[1]) == 0.0);
  CHECK(std::abs(s[2] - cplx(kR)) < 1e-15);
  CHECK(std::abs(s[3]) == 0.0);

  // H on qubit 1 spreads over indices 0 and 1.
  PureState t = apply_gate(PureState::basis(2, 0), Gate::h(1));
  CHECK(std::abs(t[0] - cplx(kR)) < 1e-15);
  CHECK(std::abs(t[1] - cplx(kR)) < 1e-15);
}

TEST_CASE("phase and flip gates match their matrices") {
  PureState one = PureState::basis(1, 1);
  CHECK(std::abs(apply_gate(one, Gate::s(0))[1] - cplx(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(apply_gate(one, Gate::sdg(0))[1] - cplx(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(apply_gate(one, Gate::x(0))[0] - cplx(1.0)) < 1e-15);
  CHECK(std::abs(apply_gate(one, Gate::z(0))[1] - cplx(-1.0)) < 1e-15);
  CHECK(std::abs(apply_gate(one, Gate::y(0))[0] - cplx(0.0, -1.0)) < 1e-15);
}

TEST_CASE("cnot flips the target conditioned on the control") {
  // |10> -> |11> under CNOT(0, 1): control qubit 0 is set.
  PureState s = apply_gate(PureState::basis(2, 2), Gate::cnot(0, 1));
  CHECK(std::abs(s[3] - cplx(1.0)) < 1e-15);
  // |01> is untouched.
  PureState t = apply_gate(PureState::basis(2, 1), Gate::cnot(0, 1));
  CHECK(std::abs(t[1] - cplx(1.0)) < 1e-15);
}

TEST_CASE("generic gates must be unitary") {
  std::array<cplx, 4> not_unitary{1.0, 0.0, 0.0, 0.5};
  CHECK_THROWS_AS(Gate::generic(0, not_unitary), ArgumentError);
  std::array<cplx, 4> yy{0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0};
  CHECK_NOTHROW(Gate::generic(0, yy));
}

TEST_CASE("trace distance endpoints and symmetry") {
  PureState a = PureState::basis(2, 0);
  PureState b = PureState::basis(2, 3);
  CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));

  PureState plus = apply_gate(PureState::basis(1, 0), Gate::h(0));
  CHECK(trace_distance(PureState::basis(1, 0), plus) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  Rng rng(11);
  PureState x = random_haar_state(3, rng);
  PureState y = random_haar_state(3, rng);
  CHECK(trace_distance(x, y) == doctest::Approx(trace_distance(y, x)));
}

TEST_CASE("trace distance ignores global phase") {
  Rng rng(5);
  PureState x = random_haar_state(3, rng);
  std::vector<cplx> rotated = x.amplitudes();
  const cplx phase = std::polar(1.0, 0.7);
  for (auto& a : rotated) a *= phase;
  PureState y(3, rotated);
  CHECK(trace_distance(x, y) < 1e-7);
}

TEST_CASE("haar states are unit norm with uniform mean weight") {
  Rng rng(42);
  double sum_p0 = 0.0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    PureState s = random_haar_state(3, rng);
    double norm2 = 0.0;
    for (uint64_t i = 0; i < s.dim(); ++i) norm2 += std::norm(s[i]);
    CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-9));
    sum_p0 += std::norm(s[0]);
  }
  // E |amp_0|^2 = 1/8.
  CHECK(sum_p0 / trials == doctest::Approx(0.125).epsilon(0.05));
}

TEST_CASE("qubit caps produce resource errors") {
  Rng rng(1);
  CHECK_THROWS_AS(random_haar_state(kDefaultQubitCap + 1, rng),
                  ResourceError);
}

TEST_CASE("measurement frequencies follow the Born rule") {
  std::vector<cplx> amps{std::sqrt(0.25), std::sqrt(0.75)};
  PureState s(1, amps);
  Rng rng(7);
  auto counts = measure_computational(s, 100000, rng);
  REQUIRE(counts.size() == 2);
  CHECK(counts[0] + counts[1] == 100000);
  CHECK(double(counts[1]) / 100000 == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("born sampling covers the full distribution") {
  std::vector<cplx> amps{0.5, 0.5, 0.5, 0.5};
  Rng rng(13);
  std::vector<uint64_t> counts(4, 0);
  for (int t = 0; t < 40000; ++t) ++counts[born_sample(amps, rng)];
  for (uint64_t c : counts)
    CHECK(double(c) / 40000 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("sampling is reproducible from the seed") {
  Rng a(99), b(99);
  PureState s = random_haar_state(4, a);
  PureState t = random_haar_state(4, b);
  for (uint64_t i = 0; i < s.dim(); ++i) CHECK(s[i] == t[i]);
  auto sa = measure_computational(s, 100, a);
  auto sb = measure_computational(t, 100, b);
  CHECK(sa == sb);
}

TEST_CASE("state files round trip exactly") {
  testutil::TempDir dir;
  Rng rng(3);
  PureState s = random_haar_state(5, rng);
  const std::string path = dir.str("state.qst");
  save_state(s, path);
  PureState loaded = load_state(path);
  CHECK(loaded.num_qubits() == 5);
  for (uint64_t i = 0; i < s.dim(); ++i) CHECK(s[i] == loaded[i]);

  // Truncated file fails loudly.
  std::string bytes = testutil::read_file(path);
  testutil::write_file(path, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_state(path), ArgumentError);

  // Wrong magic fails loudly.
  bytes[0] = 'X';
  testutil::write_file(path, bytes);
  CHECK_THROWS_AS(load_state(path), ArgumentError);
}
