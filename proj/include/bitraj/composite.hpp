#pragma once

// Two coupled systems A and B with H_AB = H_A x 1 + 1 x H_B + lambda V_A x V_B.
// Reduced bi-probabilities of A-only schedules are evaluated exactly on A x B
// and as a sum over discretized bi-trajectories of the coupling operator V_B,
// where each B path drives A through H_A + lambda v_B(b(s)) V_A.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "bitraj/biprob.hpp"
#include "bitraj/matrix.hpp"
#include "bitraj/system.hpp"

namespace bitraj {

class CompositeSystem {
 public:
  CompositeSystem(QuantumSystem sys_a, QuantumSystem sys_b, double coupling, ComplexMatrix v_a, ComplexMatrix v_b);

  const QuantumSystem& sys_a() const noexcept { return sys_a_; }
  const QuantumSystem& sys_b() const noexcept { return sys_b_; }
  double coupling() const noexcept { return coupling_; }
  const ComplexMatrix& v_a() const noexcept { return v_a_; }
  const ComplexMatrix& v_b() const noexcept { return v_b_; }
  const QuantumSystem& total() const noexcept { return total_; }
  std::size_t dim_a() const noexcept { return sys_a_.dim(); }
  std::size_t dim_b() const noexcept { return sys_b_.dim(); }

  // Spectral device of V_B; its distinct eigenvalues form the path alphabet.
  const Observable& v_b_observable() const noexcept { return v_b_observable_; }
  std::vector<double> v_b_eigenvalues() const;

 private:
  QuantumSystem sys_a_;
  QuantumSystem sys_b_;
  double coupling_;
  ComplexMatrix v_a_;
  ComplexMatrix v_b_;
  QuantumSystem total_;
  Observable v_b_observable_;
};

CompositeSystem compose(const QuantumSystem& sys_a, const QuantumSystem& sys_b, double coupling,
                        const ComplexMatrix& v_a, const ComplexMatrix& v_b);

// P x 1_B for every projector.
Observable lift_to_a(const Observable& obs, std::size_t dim_b);
// Outcome (a, b) at index a * |B| + b with projector P_a x P_b.
Observable product_observable(const Observable& obs_a, const Observable& obs_b);

// Heisenberg metric on A x B of the product of the reference states at init_a.time().
ComplexMatrix product_metric(const CompositeSystem& comp, const InitializationEvent& init_a,
                             const InitializationEvent& init_b);

struct FactorizationResult {
  double deviation = 0.0;
  // False when rho_AB is not the product of its marginals.
  bool applicable = true;
};

// max |Q_AB(a+ b+, a- b-) - Q_A(a+, a-) Q_B(b+, b-)| for schedules of equal times,
// with A and B evolved by their own Hamiltonians and the joint metric given.
FactorizationResult factorization_deviation(const CompositeSystem& comp, const ComplexMatrix& metric_ab,
                                            const ComplexMatrix& metric_a, const ComplexMatrix& metric_b,
                                            const MeasurementSchedule& schedule_a,
                                            const MeasurementSchedule& schedule_b);

// Q3 on a decoupled pair; throws CouplingNonzero unless lambda == 0.
double factorization_check(const CompositeSystem& comp, const InitializationEvent& init_a,
                           const InitializationEvent& init_b, const MeasurementSchedule& schedule_a,
                           const MeasurementSchedule& schedule_b);

struct MomentForms {
  // tr[T{prod_{I+} F_j(t_j)} rho T{prod_{I-} F_k(t_k)}^dagger]
  cd direct;
  // Eigenvalue products weighted by the bi-probabilities of the spectral devices.
  cd path_sum;
};

// Index sets are 1-based positions into the strictly increasing times; they
// may overlap and need not cover every position. Throws BadSplit on indices out
// of range or repeated within one set.
MomentForms moment_forms(const QuantumSystem& sys, const ComplexMatrix& metric, const std::vector<double>& times,
                         const std::vector<ComplexMatrix>& operators, const std::vector<std::size_t>& i_plus,
                         const std::vector<std::size_t>& i_minus);

// |tr[T{prod_{I+} V_B(s)} rho_B T{prod_{I-} V_B(s)}^dagger] - sum over b+- of
// eigenvalue products times Q_B(b+, b-)|. Index sets are 1-based positions into
// the increasing times.
double moments_identity_check(const QuantumSystem& sys_b, const ComplexMatrix& v_b, const ComplexMatrix& rho_b,
                              const std::vector<double>& times, const std::vector<std::size_t>& i_plus,
                              const std::vector<std::size_t>& i_minus);
double moments_identity_check(const CompositeSystem& comp, const ComplexMatrix& rho_b,
                              const std::vector<double>& times, const std::vector<std::size_t>& i_plus,
                              const std::vector<std::size_t>& i_minus);

// Full composite trace with A projectors lifted as P x 1_B.
cd reduced_biprob_exact(const CompositeSystem& comp, const InitializationEvent& init_a,
                        const InitializationEvent& init_b, const MeasurementSchedule& schedule_a,
                        const Sequence& f_plus, const Sequence& f_minus);

inline constexpr std::size_t kDefaultPathCap = 10'000'000;

// Uniform grid of m steps over [t0, t_end] with midpoint sample times.
struct BiTrajectoryGrid {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<double> times;  // s_k = t0 + (k - 1/2) step
  std::vector<double> eigenvalues;  // v_B alphabet
};

BiTrajectoryGrid make_grid(const CompositeSystem& comp, double t0, double t_end, std::size_t m);

// Discrete bi-probabilities of the B paths: Q_B over the V_B device deployed at
// the grid times, relative to the reference state rho_b at t0.
BiProbabilityTable grid_weights(const CompositeSystem& comp, const ComplexMatrix& rho_b, const BiTrajectoryGrid& grid,
                                std::size_t path_cap = kDefaultPathCap);

enum class PathSumRoute {
  // Lexicographic enumeration of (b+, b-) with compensated summation.
  kEnumerate,
  // The same finite sum contracted step by step on A x B.
  kTransfer,
};

// Per-step driven propagator exp(-i dt lambda v V_A) exp(-i dt H_A).
ComplexMatrix drive_step(const CompositeSystem& comp, double v, double dt);

cd surrogate_biprob(const CompositeSystem& comp, const InitializationEvent& init_a,
                    const InitializationEvent& init_b, const MeasurementSchedule& schedule_a,
                    const Sequence& f_plus, const Sequence& f_minus, std::size_t grid_steps,
                    PathSumRoute route = PathSumRoute::kTransfer, std::size_t path_cap = kDefaultPathCap);

// Closed A evolution under H_A + lambda v(s) V_A with the same discretization.
cd driven_closed_biprob(const CompositeSystem& comp, const std::function<double(double)>& drive,
                        const InitializationEvent& init_a, const MeasurementSchedule& schedule_a,
                        const Sequence& f_plus, const Sequence& f_minus, std::size_t grid_steps);

// Superoperators use S[i d + j][k d + l] = Lambda(E_kl)_ij.
ComplexMatrix dynamical_map_exact(const CompositeSystem& comp, const ComplexMatrix& rho_b, double t);
ComplexMatrix dynamical_map_path_sum(const CompositeSystem& comp, const ComplexMatrix& rho_b, double t,
                                     std::size_t grid_steps, PathSumRoute route = PathSumRoute::kTransfer,
                                     std::size_t path_cap = kDefaultPathCap);

// Choi = sum_kl E_kl x Lambda(E_kl).
ComplexMatrix choi_matrix(const ComplexMatrix& superop);

struct ChoiCheck {
  double min_choi_eig = 0.0;
  double trace_dev = 0.0;
};
ChoiCheck choi_cptp_check(const ComplexMatrix& superop);

ComplexMatrix apply_superop(const ComplexMatrix& superop, const ComplexMatrix& x);

struct ConvergenceRow {
  std::size_t m = 0;
  double abs_error = 0.0;
  std::optional<double> ratio_vs_previous;
};

std::vector<ConvergenceRow> convergence_table(const std::vector<std::size_t>& steps,
                                              const std::function<double(std::size_t)>& error_at);
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

}  // namespace bitraj
