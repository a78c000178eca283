#include <cmath>
#include <numbers>
#include <vector>

#include "bitraj/biprob.hpp"
#include "bitraj/errors.hpp"
#include "bitraj/master.hpp"
#include "bitraj/random.hpp"
#include "bitraj/witnesses.hpp"
#include "doctest.h"

using namespace bitraj;
using namespace bitraj::witness;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kSchemaError;
}

}  // namespace

TEST_CASE("generator basis") {
  const auto b2 = generator_basis(2);
  REQUIRE(b2.generators.size() == 3);
  CHECK(max_abs_diff(b2.generators[0], pauli_x()) <= 1e-15);
  CHECK(max_abs_diff(b2.generators[1], pauli_y()) <= 1e-15);
  CHECK(max_abs_diff(b2.generators[2], pauli_z()) <= 1e-15);
  for (std::size_t d : {2u, 3u, 4u, 5u}) {
    const auto b = generator_basis(d);
    REQUIRE(b.generators.size() == d * d - 1);
    for (std::size_t l = 0; l < b.generators.size(); ++l) {
      CHECK(std::abs(b.generators[l].trace()) <= 1e-12);
      CHECK(hermiticity_defect(b.generators[l]) <= 1e-12);
      for (std::size_t m = 0; m < b.generators.size(); ++m)
        CHECK(std::abs(trace_of_product(b.generators[l], b.generators[m]) - (l == m ? 2.0 : 0.0)) <= 1e-12);
    }
  }
  CHECK(code_of([] { generator_basis(1); }) == ErrorCode::kBadDimension);
}

TEST_CASE("coordinates to unitaries") {
  const auto b2 = generator_basis(2);
  CHECK(max_abs_diff(coords_to_unitary(b2, {0, 0, 0}), ComplexMatrix::identity(2)) <= 1e-14);
  const double h = std::numbers::pi / 2;
  CHECK(max_abs_diff(coords_to_unitary(b2, {h, 0, 0}), pauli_x() * cd(0, 1)) <= 1e-12);
  InstanceGenerator gen(51);
  const auto b3 = generator_basis(3);
  std::vector<double> phi(8);
  for (auto& p : phi) p = gen.normal();
  CHECK(unitarity_defect(coords_to_unitary(b3, phi)) <= 1e-12);
  CHECK(code_of([&] { coords_to_unitary(b3, {1.0}); }) == ErrorCode::kLengthMismatch);
}

TEST_CASE("observables to coordinates") {
  const auto b2 = generator_basis(2);
  const auto z = observable_to_coords(b2, qubit_z());
  CHECK(round_trip_residual(b2, qubit_z(), z) <= 1e-12);
  const auto u = coords_to_unitary(b2, z.phi);
  CHECK(std::abs(u(0, 1)) <= 1e-12);

  const auto x = observable_to_coords(b2, qubit_x());
  CHECK(round_trip_residual(b2, qubit_x(), x) <= 1e-9);

  InstanceGenerator gen(52);
  const auto b3 = generator_basis(3);
  const auto f = gen.fine_observable(3, "F");
  CHECK(round_trip_residual(b3, f, observable_to_coords(b3, f)) <= 1e-9);
  const auto c = gen.coarse_observable(4, 2, "C");
  const auto b4 = generator_basis(4);
  CHECK(round_trip_residual(b4, c, observable_to_coords(b4, c)) <= 1e-9);
}

TEST_CASE("system bi-probabilities") {
  const QuantumSystem sys(ComplexMatrix::zeros(2, 2));
  const auto b2 = generator_basis(2);
  const std::vector<SpaceTimeCoordinate> same(3, SpaceTimeCoordinate{0.4, {0.3, -0.2, 0.9}});
  CHECK(std::abs(system_biprob(sys, b2, same, {1, 1}, {1, 1}, 1, 1) - 1.0) <= 1e-12);
  CHECK(std::abs(system_biprob(sys, b2, same, {1, 1}, {1, 1}, 0, 0)) <= 1e-12);

  // Z frame at tau_0, X frame at t=1, Z frame at t=2.
  const auto zc = observable_to_coords(b2, qubit_z());
  const auto xc = observable_to_coords(b2, qubit_x());
  const std::vector<SpaceTimeCoordinate> frames{{0.0, zc.phi}, {1.0, xc.phi}, {2.0, zc.phi}};
  const auto w = two_slit();
  for (std::size_t xp = 0; xp < 2; ++xp)
    for (std::size_t xm = 0; xm < 2; ++xm) {
      const std::size_t e0 = 1;
      std::size_t ep = 0, em = 0, ez = 0;
      for (std::size_t eta = 0; eta < 2; ++eta) {
        if (xc.index_map[eta] == xp) ep = eta;
        if (xc.index_map[eta] == xm) em = eta;
        if (zc.index_map[eta] == 0) ez = eta;
      }
      std::size_t e0z = 0;
      for (std::size_t eta = 0; eta < 2; ++eta)
        if (zc.index_map[eta] == e0) e0z = eta;
      const cd s = system_biprob(sys, b2, frames, {ez, ep}, {ez, em}, e0z, e0z);
      CHECK(std::abs(s - biprob(w.sys, w.init, w.schedule, {0, xp}, {0, xm})) <= 1e-12);
    }

  InstanceGenerator gen(53);
  const QuantumSystem s3(gen.hermitian(3));
  const auto b3 = generator_basis(3);
  std::vector<SpaceTimeCoordinate> coords;
  for (double t : {0.0, 0.5, 1.2}) {
    std::vector<double> phi(8);
    for (auto& p : phi) p = gen.normal();
    coords.push_back({t, phi});
  }
  cd total = 0.0;
  for (std::size_t e0 = 0; e0 < 3; ++e0)
    for (std::size_t a = 0; a < 9; ++a)
      for (std::size_t b = 0; b < 9; ++b)
        total += system_biprob(s3, b3, coords, {a / 3, a % 3}, {b / 3, b % 3}, e0, e0);
  // Q1 with a maximally mixed reference start: trace of the identity over 3.
  CHECK(std::abs(total / 3.0 - 1.0) <= 1e-10);
  CHECK(code_of([&] { system_biprob(s3, b3, coords, {0, 5}, {0, 0}, 0, 0); }) == ErrorCode::kIndexOutOfRange);
}

TEST_CASE("decomposition into reference-basis bi-probabilities") {
  const auto w = two_slit();
  CHECK(decomposition_check(w.sys, w.init, w.schedule, {0, 1}, {0, 0}) <= 1e-12);
  const MeasurementSchedule one(0.0, {{1.0, qubit_x()}});
  CHECK(decomposition_check(w.sys, w.init, one, {1}, {1}) <= 1e-12);

  InstanceGenerator gen(54);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.0);
  const MeasurementSchedule s(0.0, {{0.4, gen.coarse_observable(3, 2, "A")}, {1.0, gen.fine_observable(3, "B")}});
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t m = 0; m < 2; ++m) CHECK(decomposition_check(sys, init, s, {a, p}, {a, m}) <= 1e-10);
}

TEST_CASE("multi-time correlations") {
  InstanceGenerator gen(55);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.0);
  const auto f = gen.hermitian(3);
  const cd expect = trace_of_product(heisenberg_projector(sys, observable_from_matrix(sys, f), 0, 0.0), f) * 0.0 +
                    trace_of_product(evolution(sys, 0.7, 0.0).adjoint() * f * evolution(sys, 0.7, 0.0), init.metric());
  CHECK(std::abs(multitime_correlation(sys, init, {0.7}, {f}, {1}, {}) - expect) <= 1e-12);

  const auto w = two_slit();
  CHECK(std::abs(multitime_correlation(w.sys, w.init, {1.0}, {pauli_x()}, {1}, {1}) - 1.0) <= 1e-12);

  const std::vector<double> times{0.3, 0.8, 1.5};
  const std::vector<ComplexMatrix> ops{gen.hermitian(3), gen.hermitian(3), gen.hermitian(3)};
  const std::vector<std::vector<std::size_t>> sets{{}, {1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}, {1, 2, 3}};
  for (const auto& ip : sets)
    for (const auto& im : sets)
      CHECK(std::abs(multitime_correlation(sys, init, times, ops, ip, im) -
                     multitime_correlation_moments(sys, init, times, ops, ip, im)) <= 1e-10);

  // Projectors with an empty minus set give the measurement link.
  const auto a = gen.fine_observable(3, "A"), b = gen.fine_observable(3, "B");
  const MeasurementSchedule s(0.0, {{0.3, a}, {0.8, b}});
  const cd corr = multitime_correlation(sys, init, {0.3, 0.8}, {a.projector(2), b.projector(1)}, {1, 2}, {1, 2});
  CHECK(std::abs(corr - probability(sys, init, s, {1, 2})) <= 1e-12);
  CHECK(code_of([&] { multitime_correlation(sys, init, times, ops, {4}, {}); }) == ErrorCode::kBadSplit);
}

TEST_CASE("classical limit") {
  const QuantumSystem zsys(pauli_z());
  const std::vector<double> p{0.3, 0.7};
  const auto init = InitializationEvent::from_density(zsys, 0.0, ComplexMatrix::diagonal(p));
  const auto c = classical_limit_witness(zsys, init, qubit_z(), {0.5, 1.0, 1.5});
  CHECK(c.offdiag_mass <= 1e-12);
  CHECK(c.consistency_dev <= 1e-12);

  const auto w = two_slit();
  const auto q = classical_limit_witness(w.sys, w.init, w.schedule);
  CHECK(q.offdiag_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.consistency_dev == doctest::Approx(0.5).epsilon(1e-12));

  InstanceGenerator gen(56);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> h{gen.normal(), gen.normal(), gen.normal()};
    const QuantumSystem diag(ComplexMatrix::diagonal(h));
    const auto rho = gen.weights(3);
    const auto in = InitializationEvent::from_density(diag, 0.0, ComplexMatrix::diagonal(rho));
    const std::vector<double> vals{0, 1, 2};
    const auto obs = observable_from_matrix(diag, ComplexMatrix::diagonal(vals));
    const auto r = classical_limit_witness(diag, in, obs, {0.2, 0.9, 1.3});
    if (r.offdiag_mass == 0.0 || r.offdiag_mass <= 1e-14) CHECK(r.consistency_dev <= 1e-10);
  }
}

TEST_CASE("stationarity") {
  InstanceGenerator gen(57);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.0);
  const MeasurementSchedule s(0.0, {{0.4, gen.fine_observable(3, "A")}, {1.0, gen.coarse_observable(3, 2, "B")}});
  CHECK(stationarity_shift_deviation(sys, init, s, 2.7) <= 1e-10);
}
