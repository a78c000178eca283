#pragma once

// Observables as points of the unitary group: every device is a rotation
// exp(i T.phi) of the reference basis, so all bi-probabilities decompose into
// bi-probabilities of reference-basis projectors at space-time coordinates.

#include <cstddef>
#include <vector>

#include "bitraj/biprob.hpp"
#include "bitraj/matrix.hpp"
#include "bitraj/system.hpp"

namespace bitraj {

// Generalized Gell-Mann matrices with tr(T_l T_m) = 2 delta_lm. For each pair
// j < k the symmetric then the antisymmetric generator; the diagonal ones last.
struct GeneratorBasis {
  std::size_t dim = 0;
  std::vector<ComplexMatrix> generators;
};

GeneratorBasis generator_basis(std::size_t d);

struct SpaceTimeCoordinate {
  double t = 0.0;
  std::vector<double> phi;
};

// exp(i sum_l phi_l T_l)
ComplexMatrix coords_to_unitary(const GeneratorBasis& basis, const std::vector<double>& phi);

struct CoordinateObservable {
  std::vector<double> phi;
  // Reference index eta -> outcome index of the represented observable.
  std::vector<std::size_t> index_map;
};

CoordinateObservable observable_to_coords(const GeneratorBasis& basis, const Observable& obs);

// max over outcomes of || sum_{eta -> f} U|eta><eta|U^dagger - P(f) ||_max
double round_trip_residual(const GeneratorBasis& basis, const Observable& obs, const CoordinateObservable& coords);

// e^{iHt} e^{iT.phi} |eta><eta| e^{-iT.phi} e^{-iHt}
ComplexMatrix coordinate_projector(const QuantumSystem& sys, const GeneratorBasis& basis,
                                   const SpaceTimeCoordinate& coord, std::size_t eta);

// tr[(prod_{j=n..0} P_{tau_j}(eta+_j)) (prod_{j=0..n} P_{tau_j}(eta-_j))].
// coords[0] is tau_0; eta_plus and eta_minus are latest-first over tau_1..tau_n.
cd system_biprob(const QuantumSystem& sys, const GeneratorBasis& basis, const std::vector<SpaceTimeCoordinate>& coords,
                 const Sequence& eta_plus, const Sequence& eta_minus, std::size_t eta0_plus,
                 std::size_t eta0_minus);

// |biprob - sum over index-map preimages of system bi-probabilities weighted by
// the initialization|.
double decomposition_check(const QuantumSystem& sys, const InitializationEvent& init,
                           const MeasurementSchedule& schedule, const Sequence& f_plus, const Sequence& f_minus);

// tr[T{prod_{I+} F_j(t_j)} rho T{prod_{I-} F_k(t_k)}^dagger] in the Heisenberg picture.
cd multitime_correlation(const QuantumSystem& sys, const InitializationEvent& init, const std::vector<double>& times,
                         const std::vector<ComplexMatrix>& operators, const std::vector<std::size_t>& i_plus,
                         const std::vector<std::size_t>& i_minus);
// Same quantity from eigenvalue products and bi-probabilities.
cd multitime_correlation_moments(const QuantumSystem& sys, const InitializationEvent& init,
                                 const std::vector<double>& times, const std::vector<ComplexMatrix>& operators,
                                 const std::vector<std::size_t>& i_plus, const std::vector<std::size_t>& i_minus);

struct ClassicalLimit {
  // sum over f+ != f- of |Q(f+, f-)|
  double offdiag_mass = 0.0;
  // max interior-marginalization deviation
  double consistency_dev = 0.0;
};

ClassicalLimit classical_limit_witness(const QuantumSystem& sys, const InitializationEvent& init,
                                       const MeasurementSchedule& schedule);
ClassicalLimit classical_limit_witness(const QuantumSystem& sys, const InitializationEvent& init,
                                       const Observable& obs, const std::vector<double>& times);

// max |Q - Q'| where Q' shifts the initialization and every deployment by dt.
double stationarity_shift_deviation(const QuantumSystem& sys, const InitializationEvent& init,
                                    const MeasurementSchedule& schedule, double dt);

}  // namespace bitraj
