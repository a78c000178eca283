#include "bitraj/master.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bitraj/composite.hpp"
#include "bitraj/errors.hpp"
#include "bitraj/phenomenology.hpp"

namespace bitraj {

namespace {

ComplexMatrix from_eigen(const Eigen::MatrixXcd& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

// Outcome order: ascending value, then ascending index.
std::vector<std::size_t> outcome_order(const Observable& obs) {
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& v = obs.values();
  const bool numeric = std::all_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); });
  if (numeric) std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *v[a] < *v[b]; });
  return order;
}

ComplexMatrix reference_projector(std::size_t d, std::size_t eta) {
  ComplexMatrix p(d, d);
  p(eta, eta) = 1.0;
  return p;
}

std::vector<std::vector<std::size_t>> preimages(const CoordinateObservable& c, std::size_t outcomes) {
  std::vector<std::vector<std::size_t>> out(outcomes);
  for (std::size_t eta = 0; eta < c.index_map.size(); ++eta) out[c.index_map[eta]].push_back(eta);
  return out;
}

// Calls visit(seq) for every sequence with seq[i] drawn from choices[i].
template <typename Visit>
void for_each_choice(const std::vector<const std::vector<std::size_t>*>& choices, Visit&& visit) {
  Sequence seq(choices.size(), 0);
  for (const auto* c : choices)
    if (c->empty()) return;
  std::vector<std::size_t> cursor(choices.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < choices.size(); ++i) seq[i] = (*choices[i])[cursor[i]];
    visit(seq);
    std::size_t i = 0;
    while (i < choices.size() && ++cursor[i] == choices[i]->size()) cursor[i++] = 0;
    if (i == choices.size()) return;
  }
}

}  // namespace

GeneratorBasis generator_basis(std::size_t d) {
  if (d < 2) throw Error(ErrorCode::kBadDimension, "generator basis needs d >= 2");
  GeneratorBasis b;
  b.dim = d;
  const cd i(0.0, 1.0);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j + 1; k < d; ++k) {
      ComplexMatrix s(d, d), a(d, d);
      s(j, k) = 1.0;
      s(k, j) = 1.0;
      a(j, k) = -i;
      a(k, j) = i;
      b.generators.push_back(std::move(s));
      b.generators.push_back(std::move(a));
    }
  for (std::size_t l = 1; l < d; ++l) {
    ComplexMatrix h(d, d);
    const double scale = std::sqrt(2.0 / (static_cast<double>(l) * static_cast<double>(l + 1)));
    for (std::size_t j = 0; j < l; ++j) h(j, j) = scale;
    h(l, l) = -scale * static_cast<double>(l);
    b.generators.push_back(std::move(h));
  }
  return b;
}

ComplexMatrix coords_to_unitary(const GeneratorBasis& basis, const std::vector<double>& phi) {
  if (phi.size() != basis.generators.size()) {
    std::ostringstream os;
    os << "phi has " << phi.size() << " entries, basis has " << basis.generators.size();
    throw Error(ErrorCode::kLengthMismatch, os.str());
  }
  ComplexMatrix h(basis.dim, basis.dim);
  for (std::size_t l = 0; l < phi.size(); ++l)
    if (phi[l] != 0.0) h.add_scaled(phi[l], basis.generators[l]);
  return expm_hermitian_phase(h, -1.0);
}

CoordinateObservable observable_to_coords(const GeneratorBasis& basis, const Observable& obs) {
  const std::size_t d = basis.dim;
  if (obs.dim() != d) throw Error(ErrorCode::kDimensionMismatch, "observable does not match the generator basis");
  CoordinateObservable out;
  Eigen::MatrixXcd v(d, d);
  Eigen::Index col = 0;
  for (std::size_t f : outcome_order(obs)) {
    const HermitianEigen e = eig_hermitian(obs.projector(f));
    for (std::size_t c = 0; c < d; ++c) {
      if (e.values[c] < 0.5) continue;
      if (col == static_cast<Eigen::Index>(d)) throw Error(ErrorCode::kInvalidObservable, "projector ranks exceed d");
      for (std::size_t r = 0; r < d; ++r) v(static_cast<Eigen::Index>(r), col) = e.vectors(r, c);
      out.index_map.push_back(f);
      ++col;
    }
  }
  if (col != static_cast<Eigen::Index>(d)) throw Error(ErrorCode::kInvalidObservable, "projector ranks do not sum to d");

  // Each column takes the free reference index where it has the most weight, so
  // observables diagonal in the reference basis map to V = 1.
  {
    std::vector<bool> taken(d, false);
    Eigen::MatrixXcd placed(d, d);
    std::vector<std::size_t> map(d);
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(d); ++c) {
      std::size_t best = d;
      for (std::size_t r = 0; r < d; ++r) {
        if (taken[r]) continue;
        if (best == d || std::abs(v(static_cast<Eigen::Index>(r), c)) >
                             std::abs(v(static_cast<Eigen::Index>(best), c)) * (1.0 + 1e-12))
          best = r;
      }
      taken[best] = true;
      placed.col(static_cast<Eigen::Index>(best)) = v.col(c);
      map[best] = out.index_map[static_cast<std::size_t>(c)];
    }
    v = placed;
    out.index_map = map;
  }

  // Column phase gauge, then strip the determinant phase so that V is in SU(d).
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > std::abs(v(best, c)) * (1.0 + 1e-12)) best = r;
    v.col(c) *= std::conj(v(best, c)) / std::abs(v(best, c));
  }
  const double theta = std::arg(v.determinant()) / static_cast<double>(d);
  v *= std::polar(1.0, -theta);

  // V = Q T Q^dagger with T diagonal for a unitary; log V = i Q diag(arg T) Q^dagger.
  const Eigen::ComplexSchur<Eigen::MatrixXcd> schur(v);
  const Eigen::MatrixXcd& q = schur.matrixU();
  Eigen::VectorXcd angles(d);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k) angles(k) = std::arg(schur.matrixT()(k, k));
  const Eigen::MatrixXcd a = q * angles.asDiagonal() * q.adjoint();
  const ComplexMatrix gen = from_eigen(0.5 * (a + a.adjoint()));
  for (const auto& t : basis.generators) out.phi.push_back(0.5 * trace_of_product(gen, t).real());
  return out;
}

double round_trip_residual(const GeneratorBasis& basis, const Observable& obs, const CoordinateObservable& coords) {
  const std::size_t d = basis.dim;
  const ComplexMatrix u = coords_to_unitary(basis, coords.phi);
  std::vector<ComplexMatrix> grouped(obs.size(), ComplexMatrix(d, d));
  for (std::size_t eta = 0; eta < d; ++eta)
    grouped.at(coords.index_map.at(eta)) += ComplexMatrix::outer(u.column(eta));
  double res = 0.0;
  for (std::size_t f = 0; f < obs.size(); ++f) res = std::max(res, max_abs_diff(grouped[f], obs.projector(f)));
  return res;
}

ComplexMatrix coordinate_projector(const QuantumSystem& sys, const GeneratorBasis& basis,
                                   const SpaceTimeCoordinate& coord, std::size_t eta) {
  if (eta >= basis.dim) {
    std::ostringstream os;
    os << "index " << eta << " not in [0, " << basis.dim << ")";
    throw Error(ErrorCode::kIndexOutOfRange, os.str());
  }
  if (sys.dim() != basis.dim) throw Error(ErrorCode::kDimensionMismatch, "system does not match the generator basis");
  const ComplexMatrix w = coords_to_unitary(basis, coord.phi);
  const ComplexMatrix p = w * reference_projector(basis.dim, eta) * w.adjoint();
  if (coord.t == 0.0) return p;
  const ComplexMatrix u = evolution(sys, coord.t, 0.0);
  return u.adjoint() * p * u;
}

cd system_biprob(const QuantumSystem& sys, const GeneratorBasis& basis, const std::vector<SpaceTimeCoordinate>& coords,
                 const Sequence& eta_plus, const Sequence& eta_minus, std::size_t eta0_plus,
                 std::size_t eta0_minus) {
  if (coords.empty()) throw Error(ErrorCode::kLengthMismatch, "coordinate list needs tau_0");
  const std::size_t n = coords.size() - 1;
  if (eta_plus.size() != n || eta_minus.size() != n)
    throw Error(ErrorCode::kLengthMismatch, "index sequences must have one entry per coordinate after tau_0");
  ComplexMatrix a_plus = coordinate_projector(sys, basis, coords[0], eta0_plus);
  ComplexMatrix a_minus = coordinate_projector(sys, basis, coords[0], eta0_minus);
  for (std::size_t j = 1; j <= n; ++j) {
    a_plus = coordinate_projector(sys, basis, coords[j], eta_plus[n - j]) * a_plus;
    a_minus = coordinate_projector(sys, basis, coords[j], eta_minus[n - j]) * a_minus;
  }
  // tr[A+ A-^dagger] with A- = P_n ... P_0 built from the minus indices.
  return trace_with_adjoint(a_plus, a_minus);
}

double decomposition_check(const QuantumSystem& sys, const InitializationEvent& init,
                           const MeasurementSchedule& schedule, const Sequence& f_plus, const Sequence& f_minus) {
  const cd lhs = biprob(sys, init, schedule, f_plus, f_minus);
  const std::size_t n = schedule.size();
  const GeneratorBasis basis = generator_basis(sys.dim());

  std::vector<SpaceTimeCoordinate> coords(n + 1);
  std::vector<std::vector<std::vector<std::size_t>>> pre(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Observable& obs = schedule.entry(j).observable;
    const CoordinateObservable c = observable_to_coords(basis, obs);
    coords[j + 1] = {schedule.entry(j).time, c.phi};
    pre[j] = preimages(c, obs.size());
  }
  // Latest-first choice lists for the plus and minus branches.
  std::vector<const std::vector<std::size_t>*> choose_plus(n), choose_minus(n);
  for (std::size_t i = 0; i < n; ++i) {
    choose_plus[i] = &pre[n - 1 - i].at(f_plus.at(i));
    choose_minus[i] = &pre[n - 1 - i].at(f_minus.at(i));
  }

  cd rhs = 0.0;
  for (const auto& comp : init.components()) {
    const CoordinateObservable c0 = observable_to_coords(basis, comp.observable);
    coords[0] = {init.time(), c0.phi};
    for (std::size_t eta0 = 0; eta0 < c0.index_map.size(); ++eta0) {
      if (c0.index_map[eta0] != comp.outcome) continue;
      for_each_choice(choose_plus, [&](const Sequence& ep) {
        for_each_choice(choose_minus, [&](const Sequence& em) {
          rhs += comp.weight * system_biprob(sys, basis, coords, ep, em, eta0, eta0);
        });
      });
    }
  }
  return std::abs(lhs - rhs);
}

cd multitime_correlation(const QuantumSystem& sys, const InitializationEvent& init, const std::vector<double>& times,
                         const std::vector<ComplexMatrix>& operators, const std::vector<std::size_t>& i_plus,
                         const std::vector<std::size_t>& i_minus) {
  return moment_forms(sys, init.metric(), times, operators, i_plus, i_minus).direct;
}

cd multitime_correlation_moments(const QuantumSystem& sys, const InitializationEvent& init,
                                 const std::vector<double>& times, const std::vector<ComplexMatrix>& operators,
                                 const std::vector<std::size_t>& i_plus, const std::vector<std::size_t>& i_minus) {
  return moment_forms(sys, init.metric(), times, operators, i_plus, i_minus).path_sum;
}

ClassicalLimit classical_limit_witness(const QuantumSystem& sys, const InitializationEvent& init,
                                       const MeasurementSchedule& schedule) {
  ClassicalLimit out;
  const BiProbabilityTable table(sys, init.metric(), schedule);
  table.for_each([&](std::size_t p, std::size_t m, cd value) {
    if (p != m) out.offdiag_mass += std::abs(value);
  });
  for (std::size_t j = 1; j < schedule.size(); ++j)
    out.consistency_dev =
        std::max(out.consistency_dev, marginalization_deviation(sys, init.metric(), schedule, j));
  return out;
}

ClassicalLimit classical_limit_witness(const QuantumSystem& sys, const InitializationEvent& init,
                                       const Observable& obs, const std::vector<double>& times) {
  std::vector<MeasurementSchedule::Entry> entries;
  for (double t : times) entries.push_back({t, obs});
  return classical_limit_witness(sys, init, MeasurementSchedule(init.time(), std::move(entries)));
}

double stationarity_shift_deviation(const QuantumSystem& sys, const InitializationEvent& init,
                                    const MeasurementSchedule& schedule, double dt) {
  const BiProbabilityTable q(sys, init.metric(), schedule);
  const InitializationEvent shifted_init(sys, init.time() + dt, init.components());
  const BiProbabilityTable q_shift(sys, shifted_init.metric(), schedule.shifted(dt));
  double dev = 0.0;
  q.for_each([&](std::size_t p, std::size_t m, cd value) { dev = std::max(dev, std::abs(value - q_shift.at(p, m))); });
  return dev;
}

}  // namespace bitraj
