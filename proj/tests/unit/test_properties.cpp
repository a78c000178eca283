// Seeded random instances checked against independent Schrodinger-picture sums.

#include <algorithm>
#include <cmath>
#include <vector>

#include "bitraj/biprob.hpp"
#include "bitraj/composite.hpp"
#include "bitraj/master.hpp"
#include "bitraj/phenomenology.hpp"
#include "bitraj/random.hpp"
#include "doctest.h"

using namespace bitraj;

namespace {

MeasurementSchedule random_schedule(InstanceGenerator& gen, std::size_t d, std::size_t n) {
  std::vector<MeasurementSchedule::Entry> entries;
  double t = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    t += gen.uniform(0.2, 1.5);
    const bool coarse = d > 2 && j % 2 == 1;
    entries.push_back({t, coarse ? gen.coarse_observable(d, d - 1, "C") : gen.fine_observable(d, "F")});
  }
  return MeasurementSchedule(0.0, std::move(entries));
}

// Evolve rho from t0 through every deployment, sandwiching with P+ on the left
// and P- on the right; sequences are latest-first.
cd schrodinger_biprob(const QuantumSystem& sys, const ComplexMatrix& rho_t0, const MeasurementSchedule& s,
                      const Sequence& fp, const Sequence& fm) {
  ComplexMatrix x = rho_t0;
  double t = s.t0();
  const std::size_t n = s.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto u = evolution(sys, s.entry(j).time, t);
    t = s.entry(j).time;
    const auto& obs = s.entry(j).observable;
    x = obs.projector(fp[n - 1 - j]) * (u * x * u.adjoint()) * obs.projector(fm[n - 1 - j]);
  }
  return x.trace();
}

// Schrodinger state at t0 from the Heisenberg metric.
ComplexMatrix state_at(const QuantumSystem& sys, const ComplexMatrix& metric, double t0) {
  const auto u = evolution(sys, t0, 0.0);
  return u * metric * u.adjoint();
}

}  // namespace

TEST_CASE("table invariants on random instances") {
  InstanceGenerator gen(2024);
  for (std::size_t d : {2u, 3u, 4u}) {
    for (std::size_t n = 1; n <= 4; ++n) {
      CAPTURE(d);
      CAPTURE(n);
      const QuantumSystem sys(gen.hermitian(d));
      const auto init = gen.initialization(sys, 0.0);
      const auto s = random_schedule(gen, d, n);
      const BiProbabilityTable table(sys, init.metric(), s);
      const auto inv = table_invariants(table);
      CHECK(inv.normalization <= 1e-10);
      CHECK(inv.measurement_link <= 1e-12);
      CHECK(inv.diagonal_imag <= 1e-12);
      CHECK(inv.hermitian_pairing <= 1e-12);
      const auto g = check_positivity(table);
      CHECK(g.min_eigenvalue >= -1e-10);
      CHECK(std::abs(g.trace - 1.0) <= 1e-10);

      // Independent oracle on every stored value.
      const auto rho = state_at(sys, init.metric(), s.t0());
      double worst = 0.0;
      table.for_each([&](std::size_t p, std::size_t m, cd q) {
        const auto& pr = table.projectors();
        worst = std::max(worst, std::abs(q - schrodinger_biprob(sys, rho, s, pr.decode(p), pr.decode(m))));
      });
      CHECK(worst <= 1e-12);

      // Summing out the last deployment gives the shorter table.
      if (n >= 2) {
        const BiProbabilityTable shorter(sys, init.metric(), s.prefix(n - 1));
        const auto& pr = table.projectors();
        double q2 = 0.0;
        for (std::size_t p = 0; p < shorter.sequence_count(); ++p)
          for (std::size_t m = 0; m < shorter.sequence_count(); ++m) {
            const Sequence sp = shorter.projectors().decode(p), sm = shorter.projectors().decode(m);
            cd sum = 0.0;
            for (std::size_t f = 0; f < pr.radix().back(); ++f) {
              Sequence lp{f}, lm{f};
              lp.insert(lp.end(), sp.begin(), sp.end());
              lm.insert(lm.end(), sm.begin(), sm.end());
              sum += table.value(lp, lm);
            }
            q2 = std::max(q2, std::abs(sum - shorter.at(p, m)));
          }
        CHECK(q2 <= 1e-10);
        for (std::size_t j = 1; j < n; ++j) CHECK(check_bi_consistency(table, j) <= 1e-10);
        CHECK(causality_experiment(sys, init, s).passed);
      }

      std::vector<std::optional<Resolution>> res;
      for (const auto& e : s.entries()) res.emplace_back(gen.resolution(e.observable));
      CHECK(check_additivity(sys, init, s, res) <= 1e-10);
    }
  }
}

TEST_CASE("factorization on random decoupled pairs") {
  InstanceGenerator gen(77);
  for (int i = 0; i < 10; ++i) {
    const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(i % 2 ? 3 : 2));
    const auto comp = compose(a, b, 0.0, gen.hermitian(2), gen.hermitian(b.dim()));
    const auto ia = gen.initialization(a, 0.0), ib = gen.initialization(b, 0.0);
    const MeasurementSchedule sa(0.0, {{0.5, gen.fine_observable(2, "A")}, {1.3, gen.fine_observable(2, "A")}});
    const MeasurementSchedule sb(0.0, {{0.5, gen.fine_observable(b.dim(), "B")}, {1.3, gen.fine_observable(b.dim(), "B")}});
    CHECK(factorization_check(comp, ia, ib, sa, sb) <= 1e-10);
  }
}

TEST_CASE("moments identity over every split") {
  InstanceGenerator gen(78);
  for (std::size_t db : {2u, 3u}) {
    const QuantumSystem b(gen.hermitian(db));
    const auto vb = gen.hermitian(db);
    const auto rho = gen.density(db);
    const std::vector<double> times{0.3, 0.9, 1.6};
    for (std::size_t mp = 0; mp < 8; ++mp)
      for (std::size_t mm = 0; mm < 8; ++mm) {
        std::vector<std::size_t> ip, im;
        for (std::size_t j = 0; j < 3; ++j) {
          if (mp >> j & 1) ip.push_back(j + 1);
          if (mm >> j & 1) im.push_back(j + 1);
        }
        CHECK(moments_identity_check(b, vb, rho, times, ip, im) <= 1e-10);
      }
  }
}

TEST_CASE("dynamical maps of random couplings are CPTP") {
  InstanceGenerator gen(79);
  for (int i = 0; i < 10; ++i) {
    const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(2));
    const auto comp = compose(a, b, gen.uniform(-2.0, 2.0), gen.hermitian(2), gen.hermitian(2));
    const auto c = choi_cptp_check(dynamical_map_exact(comp, gen.density(2), gen.uniform(0.0, 2.0)));
    CHECK(c.trace_dev <= 1e-10);
    CHECK(c.min_choi_eig >= -1e-9);
  }
}

TEST_CASE("coordinate bi-probabilities on random frames") {
  InstanceGenerator gen(80);
  for (std::size_t d : {2u, 3u}) {
    const QuantumSystem sys(gen.hermitian(d));
    const auto basis = generator_basis(d);
    std::vector<SpaceTimeCoordinate> coords;
    double t = 0.0;
    for (int j = 0; j < 3; ++j) {
      std::vector<double> phi(d * d - 1);
      for (auto& p : phi) p = gen.normal();
      coords.push_back({t, phi});
      t += gen.uniform(0.2, 1.0);
    }
    // Table over (eta_2, eta_1) with a fixed eta_0.
    const std::size_t count = d * d;
    ComplexMatrix gram(count, count);
    cd total = 0.0;
    for (std::size_t p = 0; p < count; ++p)
      for (std::size_t m = 0; m < count; ++m) {
        const Sequence ep{p / d, p % d}, em{m / d, m % d};
        const cd q = system_biprob(sys, basis, coords, ep, em, 0, 0);
        gram(p, m) = q;
        total += q;
        if (ep[0] != em[0]) CHECK(std::abs(q) <= 1e-12);
      }
    CHECK(std::abs(total - 1.0) <= 1e-10);
    CHECK(min_eigenvalue(gram) >= -1e-10);
    // Interior double marginal.
    for (std::size_t a = 0; a < d; ++a) {
      cd sum = 0.0;
      for (std::size_t x = 0; x < d; ++x)
        for (std::size_t y = 0; y < d; ++y) sum += system_biprob(sys, basis, coords, {a, x}, {a, y}, 0, 0);
      const std::vector<SpaceTimeCoordinate> two{coords[0], coords[2]};
      CHECK(std::abs(sum - system_biprob(sys, basis, two, {a}, {a}, 0, 0)) <= 1e-10);
    }
  }
}

TEST_CASE("coordinate round trip and decomposition") {
  InstanceGenerator gen(81);
  for (std::size_t d : {2u, 3u, 4u}) {
    const auto basis = generator_basis(d);
    const auto f = gen.fine_observable(d, "F");
    CHECK(round_trip_residual(basis, f, observable_to_coords(basis, f)) <= 1e-9);
    const auto c = gen.coarse_observable(d, d - 1, "C");
    CHECK(round_trip_residual(basis, c, observable_to_coords(basis, c)) <= 1e-9);

    const QuantumSystem sys(gen.hermitian(d));
    const auto init = gen.initialization(sys, 0.0);
    const auto s = random_schedule(gen, d, 2);
    const ScheduleProjectors pr(sys, s);
    for (std::size_t p = 0; p < pr.sequence_count(); ++p)
      for (std::size_t m = 0; m < pr.sequence_count(); ++m) {
        const Sequence sp = pr.decode(p), sm = pr.decode(m);
        if (sp[0] != sm[0]) continue;
        CHECK(decomposition_check(sys, init, s, sp, sm) <= 1e-10);
      }
    CHECK(stationarity_shift_deviation(sys, init, s, gen.uniform(-2.0, 2.0)) <= 1e-10);
  }
}

TEST_CASE("conditionals normalize") {
  InstanceGenerator gen(82);
  const QuantumSystem sys(gen.hermitian(3));
  const auto init = gen.initialization(sys, 0.0);
  const auto s = random_schedule(gen, 3, 2);
  const auto next = gen.fine_observable(3, "N");
  const ScheduleProjectors pr(sys, s);
  for (std::size_t p = 0; p < pr.sequence_count(); ++p) {
    const Sequence f = pr.decode(p);
    if (probability(sys, init, s, f) <= kConditionalFloor) continue;
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double c = conditional(sys, init, s, f, {3.5, next}, k);
      CHECK(c >= -1e-12);
      CHECK(c <= 1.0 + 1e-10);
      sum += c;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
  }
}
