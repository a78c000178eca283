#include <cmath>
#include <numbers>
#include <vector>

#include "bitraj/biprob.hpp"
#include "bitraj/errors.hpp"
#include "bitraj/phenomenology.hpp"
#include "bitraj/random.hpp"
#include "bitraj/witnesses.hpp"
#include "doctest.h"

using namespace bitraj;
using namespace bitraj::witness;

namespace {

const double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kSchemaError;
}

struct Commuting {
  QuantumSystem sys;
  InitializationEvent init;
  MeasurementSchedule schedule;
};

Commuting commuting() {
  const std::vector<double> h{0.3, 1.1, -0.4};
  QuantumSystem sys(ComplexMatrix::diagonal(h));
  const std::vector<double> v{2.0, 0.0, 1.0};
  const auto obs = observable_from_matrix(sys, ComplexMatrix::diagonal(v), "D");
  const std::vector<double> rho{0.5, 0.2, 0.3};
  auto init = InitializationEvent::from_density(sys, 0.0, ComplexMatrix::diagonal(rho));
  MeasurementSchedule s(0.0, {{0.5, obs}, {1.0, obs}, {1.7, obs}});
  return {sys, init, s};
}

}  // namespace

TEST_CASE("report verdicts") {
  CHECK(make_report("a", 1e-11, 1e-10, CheckKind::kEquality).passed);
  CHECK(!make_report("a", 1e-9, 1e-10, CheckKind::kEquality).passed);
  CHECK(make_report("b", 0.5, 0.01, CheckKind::kViolation).passed);
  CHECK(!make_report("b", 0.001, 0.01, CheckKind::kViolation).passed);
  CHECK(check_kind_name(CheckKind::kViolation) == "violation");
}

TEST_CASE("causality") {
  const auto w = two_slit();
  const auto r = causality_experiment(w.sys, w.init, w.schedule);
  CHECK(r.passed);
  CHECK(r.deviation <= 1e-12);
  const auto c = commuting();
  CHECK(causality_experiment(c.sys, c.init, c.schedule).deviation <= 1e-12);

  InstanceGenerator gen(31);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.0);
  const MeasurementSchedule s(0.0, {{0.2, gen.fine_observable(3, "A")},
                                    {0.9, gen.coarse_observable(3, 2, "B")},
                                    {1.4, gen.fine_observable(3, "C")}});
  CHECK(causality_experiment(sys, init, s).deviation <= 1e-10);
  const MeasurementSchedule one(0.0, {{1.0, qubit_z()}});
  CHECK(code_of([&] { causality_experiment(w.sys, w.init, one); }) == ErrorCode::kInvalidSchedule);
}

TEST_CASE("inconsistency") {
  const auto w = two_slit();
  const auto r = inconsistency_witness(w.sys, w.init, w.schedule, 1);
  CHECK(r.deviation == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.passed);
  const auto c = commuting();
  CHECK(inconsistency_witness(c.sys, c.init, c.schedule, 2).deviation <= 1e-12);
  CHECK(!inconsistency_witness(c.sys, c.init, c.schedule, 2).passed);
  CHECK(code_of([&] { inconsistency_witness(w.sys, w.init, w.schedule, 2); }) == ErrorCode::kPositionOutOfRange);

  InstanceGenerator gen(32);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.0);
  const MeasurementSchedule s(0.0, {{0.5, gen.fine_observable(3, "A")}, {1.0, gen.fine_observable(3, "B")}});
  CHECK(inconsistency_witness(sys, init, s, 1).deviation > 0.01);
}

TEST_CASE("Markov chains") {
  const QuantumSystem rabi(pauli_x() * cd(kPi / 2));
  const auto z = qubit_z();
  const auto init = InitializationEvent::pure(rabi, 0.0, z, 1);
  const MeasurementSchedule two(0.0, {{0.3, z}, {0.7, z}});
  CHECK(markov_experiment(rabi, init, two).deviation <= 1e-12);
  const MeasurementSchedule three(0.0, {{0.3, z}, {0.7, z}, {1.1, z}});
  CHECK(markov_experiment(rabi, init, three).deviation <= 1e-10);

  InstanceGenerator gen(33);
  const QuantumSystem sys(gen.hermitian(4));
  const auto k = gen.fine_observable(4, "K");
  const auto i4 = InitializationEvent::pure(sys, 0.0, k, 2);
  const MeasurementSchedule four(0.0, {{0.2, gen.fine_observable(4, "A")},
                                       {0.5, gen.fine_observable(4, "B")},
                                       {0.9, gen.fine_observable(4, "C")},
                                       {1.6, gen.fine_observable(4, "D")}});
  CHECK(markov_experiment(sys, i4, four).deviation <= 1e-10);
  const MeasurementSchedule coarse(0.0, {{0.5, gen.coarse_observable(4, 2, "X")}});
  CHECK(code_of([&] { markov_experiment(sys, i4, coarse); }) == ErrorCode::kNotFineGrained);
}

TEST_CASE("uncertainty correlations") {
  const QuantumSystem free(ComplexMatrix::zeros(2, 2));
  const auto zz = uncertainty_correlation(free, qubit_z(), qubit_z(), 0.0);
  CHECK(zz[0][0] == doctest::Approx(1.0));
  CHECK(std::abs(zz[0][1]) <= 1e-14);
  for (const auto& row : uncertainty_correlation(free, qubit_z(), qubit_x(), 0.0))
    for (double c : row) CHECK(c == doctest::Approx(0.5));

  InstanceGenerator gen(34);
  const QuantumSystem sys(gen.hermitian(3));
  const auto k = gen.fine_observable(3, "K"), l = gen.fine_observable(3, "L");
  const auto c0 = uncertainty_correlation(sys, k, l, 0.0);
  const auto c5 = uncertainty_correlation(sys, k, l, 5.3);
  const auto ct = uncertainty_correlation(sys, l, k, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      row += c0[i][j];
      col += c0[j][i];
      CHECK(std::abs(c0[i][j] - c5[i][j]) <= 1e-10);
      CHECK(std::abs(c0[i][j] - ct[j][i]) <= 1e-12);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(col == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("Zeno survival") {
  const auto w = zeno_qubit();
  const auto z = qubit_z();
  CHECK(std::abs(zeno_experiment(w.sys, z, 1, 1.0, 1)) <= 1e-12);
  CHECK(zeno_experiment(w.sys, z, 1, 1.0, 2) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(zeno_experiment(w.sys, z, 1, 1.0, 100) - 0.97563) <= 1e-4);
  double prev = -1.0;
  for (std::size_t n = 1; n <= 256; n *= 2) {
    const double s = zeno_experiment(w.sys, z, 1, 1.0, n);
    CHECK(s == doctest::Approx(std::pow(std::cos(kPi / (2.0 * n)), 2.0 * n)).epsilon(1e-10));
    CHECK(s >= prev);
    if (n >= 50) CHECK(1.0 - s <= kPi * kPi / (4.0 * n) + 1e-3);
    prev = s;
  }
  const QuantumSystem frozen(ComplexMatrix::zeros(2, 2));
  for (std::size_t n : {1u, 3u, 17u}) CHECK(zeno_experiment(frozen, z, 0, 1.0, n) == 1.0);
}

TEST_CASE("coarse-grained placement") {
  const auto w = two_slit();
  const auto blur = Resolution::full_blur(w.schedule.entry(0).observable);
  const auto d = coarse_grain_placement_experiment(w.sys, w.init, w.schedule, 1, blur);
  REQUIRE(d.interior_dev.has_value());
  CHECK(*d.interior_dev == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.terminal_dev <= 1e-12);

  const auto c = commuting();
  const auto cb = Resolution(c.schedule.entry(1).observable, {{"lo", {0, 1}}, {"hi", {2}}});
  const auto cd_ = coarse_grain_placement_experiment(c.sys, c.init, c.schedule, 2, cb);
  CHECK(cd_.terminal_dev <= 1e-12);
  CHECK(*cd_.interior_dev <= 1e-12);
  CHECK(code_of([&] { coarse_grain_placement_experiment(w.sys, w.init, w.schedule, 3, blur); }) ==
        ErrorCode::kPositionOutOfRange);
}

TEST_CASE("static picture") {
  const auto w = two_slit();
  CHECK(statics_equivalence(w.sys, w.init, qubit_x(), 1.0).deviation <= 1e-12);
  const auto z = zeno_qubit();
  CHECK(statics_equivalence(z.sys, z.init, qubit_z(), 1.0).passed);
  InstanceGenerator gen(35);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.2);
  CHECK(statics_equivalence(sys, init, gen.coarse_observable(3, 2, "K"), 1.7).deviation <= 1e-12);
}

TEST_CASE("short-time expansion") {
  const auto z = zeno_qubit();
  const auto r = short_time_expansion(z.sys, qubit_z(), 1, 0.0, 1e-3);
  CHECK(r.passed);
  REQUIRE(r.value.has_value());
  CHECK(*r.value == doctest::Approx(kPi * kPi / 4));
}
