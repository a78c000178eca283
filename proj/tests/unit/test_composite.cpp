#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bitraj/biprob.hpp"
#include "bitraj/composite.hpp"
#include "bitraj/errors.hpp"
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

QuantumSystem zero2() { return QuantumSystem(ComplexMatrix::zeros(2, 2)); }

ComplexMatrix plus_state() { return ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}; }

std::vector<std::pair<Sequence, Sequence>> stored_pairs(const MeasurementSchedule& s) {
  std::vector<std::pair<Sequence, Sequence>> out;
  const std::size_t n = s.size();
  std::vector<Sequence> seqs{{}};
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Sequence> next;
    for (const auto& q : seqs)
      for (std::size_t f = 0; f < s.entry(n - 1 - j).observable.size(); ++f) {
        auto r = q;
        r.push_back(f);
        next.push_back(r);
      }
    seqs = next;
  }
  for (const auto& p : seqs)
    for (const auto& m : seqs)
      if (p.front() == m.front()) out.emplace_back(p, m);
  return out;
}

}  // namespace

TEST_CASE("composition") {
  InstanceGenerator gen(41);
  const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(3));
  const auto free = compose(a, b, 0.0, gen.hermitian(2), gen.hermitian(3));
  auto sums = std::vector<double>{};
  for (double x : a.spectrum().values)
    for (double y : b.spectrum().values) sums.push_back(x + y);
  std::sort(sums.begin(), sums.end());
  const auto& ev = free.total().spectrum().values;
  for (std::size_t i = 0; i < sums.size(); ++i) CHECK(ev[i] == doctest::Approx(sums[i]));

  const auto zz = compose(zero2(), zero2(), 1.0, pauli_z(), pauli_z());
  const std::vector<double> want{1, -1, -1, 1};
  CHECK(max_abs_diff(zz.total().hamiltonian(), ComplexMatrix::diagonal(want)) <= 1e-14);

  const auto coupled = compose(a, b, 1.3, gen.hermitian(2), gen.hermitian(3));
  CHECK(hermiticity_defect(coupled.total().hamiltonian()) <= 1e-14);
  CHECK(code_of([&] { compose(a, b, 1.0, gen.hermitian(3), gen.hermitian(3)); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([&] { compose(a, b, 1.0, ComplexMatrix{{0, 1}, {0, 0}}, gen.hermitian(3)); }) ==
        ErrorCode::kNotHermitian);
}

TEST_CASE("factorization of independent systems") {
  InstanceGenerator gen(42);
  const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(2));
  const auto comp = compose(a, b, 0.0, pauli_z(), pauli_z());
  const auto ia = gen.initialization(a, 0.0), ib = gen.initialization(b, 0.0);
  const MeasurementSchedule one_a(0.0, {{0.6, gen.fine_observable(2, "A")}});
  const MeasurementSchedule one_b(0.0, {{0.6, gen.fine_observable(2, "B")}});
  CHECK(factorization_check(comp, ia, ib, one_a, one_b) <= 1e-12);
  const MeasurementSchedule sa(0.0, {{0.4, gen.fine_observable(2, "A1")}, {1.1, gen.fine_observable(2, "A2")}});
  const MeasurementSchedule sb(0.0, {{0.4, gen.fine_observable(2, "B1")}, {1.1, gen.fine_observable(2, "B2")}});
  CHECK(factorization_check(comp, ia, ib, sa, sb) <= 1e-10);

  const auto coupled = compose(a, b, 0.5, pauli_z(), pauli_z());
  CHECK(code_of([&] { factorization_check(coupled, ia, ib, sa, sb); }) == ErrorCode::kCouplingNonzero);

  // Bell state
  ComplexMatrix bell(4, 4);
  for (std::size_t i : {0u, 3u})
    for (std::size_t j : {0u, 3u}) bell(i, j) = 0.5;
  const auto half = ComplexMatrix::identity(2) * cd(0.5);
  const auto r = factorization_deviation(comp, bell, half, half, one_a, one_b);
  CHECK(!r.applicable);
}

TEST_CASE("moments identity examples") {
  const auto q = zero2();
  const std::vector<double> t1{1.0};
  CHECK(moments_identity_check(q, pauli_z(), plus_state(), t1, {1}, {}) <= 1e-12);
  const auto f = moment_forms(q, plus_state(), t1, {pauli_z()}, {1}, {});
  CHECK(std::abs(f.direct) <= 1e-12);
  const auto g = moment_forms(q, plus_state(), t1, {pauli_z()}, {1}, {1});
  CHECK(std::abs(g.direct - 1.0) <= 1e-12);
  CHECK(std::abs(g.path_sum - 1.0) <= 1e-12);
  const auto e = moment_forms(q, plus_state(), t1, {pauli_z()}, {}, {});
  CHECK(std::abs(e.direct - 1.0) <= 1e-12);
  CHECK(code_of([&] { moment_forms(q, plus_state(), t1, {pauli_z()}, {2}, {}); }) == ErrorCode::kBadSplit);
  CHECK(code_of([&] { moment_forms(q, plus_state(), {1.0, 2.0}, {pauli_z(), pauli_z()}, {1, 1}, {}); }) ==
        ErrorCode::kBadSplit);
}

TEST_CASE("reduced bi-probabilities") {
  InstanceGenerator gen(43);
  const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(2));
  const auto ia = gen.initialization(a, 0.0), ib = gen.initialization(b, 0.0);
  const MeasurementSchedule s(0.0, {{0.5, qubit_x()}, {1.0, qubit_x()}});
  const auto free = compose(a, b, 0.0, pauli_z(), pauli_z());
  for (const auto& [p, m] : stored_pairs(s))
    CHECK(std::abs(reduced_biprob_exact(free, ia, ib, s, p, m) - biprob(a, ia, s, p, m)) <= 1e-12);

  // Dephasing: coupling suppresses interference terms.
  const auto za = InitializationEvent::pure(zero2(), 0.0, qubit_z(), 1);
  const auto xb = InitializationEvent::pure(zero2(), 0.0, qubit_x(), 1);
  const auto off = compose(zero2(), zero2(), 0.0, pauli_z(), pauli_z());
  const auto on = compose(zero2(), zero2(), 1.0, pauli_z(), pauli_z());
  const auto xa = InitializationEvent::pure(zero2(), 0.0, qubit_x(), 1);
  const MeasurementSchedule zx(0.0, {{0.5, qubit_z()}, {1.0, qubit_x()}});
  const Sequence fp{1, 1}, fm{1, 0};
  CHECK(std::abs(reduced_biprob_exact(on, xa, xb, zx, fp, fm)) <
        std::abs(reduced_biprob_exact(off, xa, xb, zx, fp, fm)) - 0.1);
  CHECK(std::abs(reduced_biprob_exact(off, xa, xb, zx, fp, fm)) == doctest::Approx(0.25));
  double diag = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) diag += reduced_biprob_exact(on, za, xb, s, {i, j}, {i, j}).real();
  CHECK(diag == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid weights are normalized") {
  const auto w = dephasing();
  const auto grid = make_grid(w.comp, 0.0, 1.0, 5);
  CHECK(grid.times.size() == 5);
  CHECK(grid.times.front() == doctest::Approx(0.1));
  const auto table = grid_weights(w.comp, w.init_b.reference_metric(), grid);
  CHECK(std::abs(table.total() - 1.0) <= 1e-9);
}

TEST_CASE("surrogate path sums") {
  const auto w = dephasing();
  const auto pairs = stored_pairs(w.schedule_a);

  SUBCASE("decoupled pair is exact at any m") {
    const auto free = compose(w.comp.sys_a(), w.comp.sys_b(), 0.0, pauli_z(), pauli_z());
    for (const auto& [p, m] : pairs)
      CHECK(std::abs(surrogate_biprob(free, w.init_a, w.init_b, w.schedule_a, p, m, 2) -
                     reduced_biprob_exact(free, w.init_a, w.init_b, w.schedule_a, p, m)) <= 1e-12);
  }
  SUBCASE("commuting drive is exact at one step per interval") {
    const auto c = commuting_drive();
    for (const auto& [p, m] : stored_pairs(c.schedule_a))
      CHECK(std::abs(surrogate_biprob(c.comp, c.init_a, c.init_b, c.schedule_a, p, m, 2) -
                     reduced_biprob_exact(c.comp, c.init_a, c.init_b, c.schedule_a, p, m)) <= 1e-12);
  }
  SUBCASE("enumeration and transfer agree") {
    for (const auto& [p, m] : pairs) {
      const cd e = surrogate_biprob(w.comp, w.init_a, w.init_b, w.schedule_a, p, m, 4, PathSumRoute::kEnumerate);
      const cd t = surrogate_biprob(w.comp, w.init_a, w.init_b, w.schedule_a, p, m, 4, PathSumRoute::kTransfer);
      CHECK(std::abs(e - t) <= 1e-12);
    }
  }
  SUBCASE("first-order convergence") {
    double prev = 0.0;
    for (std::size_t m : {8u, 16u, 32u, 64u}) {
      double err = 0.0;
      for (const auto& [p, q] : pairs)
        err = std::max(err, std::abs(surrogate_biprob(w.comp, w.init_a, w.init_b, w.schedule_a, p, q, m) -
                                     reduced_biprob_exact(w.comp, w.init_a, w.init_b, w.schedule_a, p, q)));
      if (prev > 0.0) {
        CHECK(err / prev >= 0.4);
        CHECK(err / prev <= 0.6);
      }
      prev = err;
    }
  }
  SUBCASE("errors") {
    const auto& [p, m] = pairs.front();
    CHECK(code_of([&] { surrogate_biprob(w.comp, w.init_a, w.init_b, w.schedule_a, p, m, 3); }) ==
          ErrorCode::kGridMisaligned);
    CHECK(code_of([&] {
            surrogate_biprob(w.comp, w.init_a, w.init_b, w.schedule_a, p, m, 16, PathSumRoute::kEnumerate);
          }) == ErrorCode::kPathCapExceeded);
  }
}

TEST_CASE("classical drive") {
  // [V_B, H_B] = 0 and rho_B an eigenprojector of V_B: a single B path survives.
  const QuantumSystem a(pauli_x() * cd(0.8));
  const QuantumSystem b(pauli_z() * cd(0.5));
  const auto comp = compose(a, b, 0.7, pauli_z(), pauli_z());
  const auto ia = InitializationEvent::pure(a, 0.0, qubit_z(), 1);
  const auto ib = InitializationEvent::pure(b, 0.0, qubit_z(), 1);
  const MeasurementSchedule s(0.0, {{0.5, qubit_x()}, {1.0, qubit_z()}});
  for (const auto& [p, m] : stored_pairs(s)) {
    const cd path = surrogate_biprob(comp, ia, ib, s, p, m, 8);
    const cd closed = driven_closed_biprob(comp, [](double) { return 1.0; }, ia, s, p, m, 8);
    CHECK(std::abs(path - closed) <= 1e-10);
  }
}

TEST_CASE("dynamical maps") {
  const auto w = dephasing();
  const auto& rho_b = w.init_b.reference_metric();

  const auto t0 = dynamical_map_exact(w.comp, rho_b, 0.0);
  CHECK(max_abs_diff(t0, ComplexMatrix::identity(4)) <= 1e-12);

  const auto free = compose(w.comp.sys_a(), w.comp.sys_b(), 0.0, pauli_z(), pauli_z());
  const auto u = expm_hermitian_phase(w.comp.sys_a().hamiltonian(), 0.9);
  InstanceGenerator gen(44);
  const auto x = gen.density(2);
  CHECK(max_abs_diff(apply_superop(dynamical_map_exact(free, rho_b, 0.9), x), u * x * u.adjoint()) <= 1e-12);
  CHECK(max_abs_diff(dynamical_map_path_sum(free, rho_b, 0.9, 3), dynamical_map_exact(free, rho_b, 0.9)) <= 1e-12);

  const auto exact = dynamical_map_exact(w.comp, rho_b, 1.0);
  const auto chk = choi_cptp_check(exact);
  CHECK(chk.min_choi_eig >= -1e-10);
  CHECK(chk.trace_dev <= 1e-12);

  const auto c = commuting_drive();
  const auto& rc = c.init_b.reference_metric();
  CHECK(max_abs_diff(dynamical_map_path_sum(c.comp, rc, 1.0, 1), dynamical_map_exact(c.comp, rc, 1.0)) <= 1e-12);

  double prev = 0.0;
  for (std::size_t m : {8u, 16u, 32u, 64u}) {
    const double err = max_abs_diff(dynamical_map_path_sum(w.comp, rho_b, 1.0, m), exact);
    if (prev > 0.0) {
      CHECK(err / prev >= 0.4);
      CHECK(err / prev <= 0.6);
    }
    prev = err;
  }
  CHECK(max_abs_diff(dynamical_map_path_sum(w.comp, rho_b, 1.0, 3, PathSumRoute::kEnumerate),
                     dynamical_map_path_sum(w.comp, rho_b, 1.0, 3, PathSumRoute::kTransfer)) <= 1e-12);
  CHECK(code_of([&] { dynamical_map_exact(w.comp, ComplexMatrix{{2, 0}, {0, -1}}, 1.0); }) == ErrorCode::kInvalidState);
}

TEST_CASE("Choi checks") {
  const auto id = choi_cptp_check(ComplexMatrix::identity(9));
  CHECK(std::abs(id.min_choi_eig) <= 1e-12);
  CHECK(id.trace_dev <= 1e-14);
  const auto choi = choi_matrix(ComplexMatrix::identity(9));
  const auto ev = eig_hermitian(choi).values;
  CHECK(ev.back() == doctest::Approx(3.0));

  InstanceGenerator gen(45);
  const auto u = gen.unitary(2);
  ComplexMatrix s(4, 4);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) {
      ComplexMatrix e(2, 2);
      e(k, l) = 1.0;
      const auto img = u * e * u.adjoint();
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) s(i * 2 + j, k * 2 + l) = img(i, j);
    }
  std::size_t rank = 0;
  for (double v : eig_hermitian(choi_matrix(s)).values)
    if (v > 1e-10) ++rank;
  CHECK(rank == 1);

  CHECK(choi_cptp_check(transpose_map(2)).min_choi_eig <= -0.5);
  CHECK(code_of([&] { choi_matrix(ComplexMatrix::identity(5)); }) == ErrorCode::kBadDimension);
}

TEST_CASE("convergence CSV") {
  const auto rows = convergence_table({8, 16}, [](std::size_t m) { return 1.0 / static_cast<double>(m); });
  REQUIRE(rows.size() == 2);
  CHECK(!rows[0].ratio_vs_previous);
  CHECK(*rows[1].ratio_vs_previous == doctest::Approx(0.5));
  std::ostringstream os;
  write_convergence_csv(os, rows);
  CHECK(os.str().rfind("m,abs_error,ratio_vs_previous\n", 0) == 0);
}
