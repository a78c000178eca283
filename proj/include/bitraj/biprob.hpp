#pragma once

// Multi-time probabilities and complex bi-probabilities of measurement
// schedules, the Gram ("Gudder") metric of a bi-probability table, and the
// checks of its defining properties.
//
// Outcome sequences are index tuples written latest-first: seq[0] is the
// outcome of the last deployment (time t_n), seq.back() of the first (t_1).
// Positions passed to the marginalization checks are 1-based in time order,
// so position j refers to the deployment at t_j.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "bitraj/matrix.hpp"
#include "bitraj/system.hpp"

namespace bitraj {

using Sequence = std::vector<std::size_t>;

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;
inline constexpr double kConditionalFloor = 1e-14;

// Heisenberg-picture projectors of every schedule position, cached.
class ScheduleProjectors {
 public:
  ScheduleProjectors(const QuantumSystem& sys, const MeasurementSchedule& schedule);

  std::size_t length() const noexcept { return by_position_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  // Outcome counts in time order.
  const std::vector<std::size_t>& radix() const noexcept { return radix_; }
  std::size_t sequence_count() const noexcept { return sequence_count_; }

  const ComplexMatrix& at(std::size_t position, std::size_t outcome) const;

  // P_n(f_n) ... P_1(f_1)
  ComplexMatrix chain(const Sequence& f) const;

  // Flat index, latest-first mixed radix, and its inverse.
  std::size_t encode(const Sequence& f) const;
  Sequence decode(std::size_t index) const;

  void validate(const Sequence& f) const;

 private:
  std::size_t dim_;
  std::vector<std::vector<ComplexMatrix>> by_position_;
  std::vector<std::size_t> radix_;
  std::size_t sequence_count_;
};

// tr[(prod_{j=n..1} P(f+_j)) rho (prod_{j=1..n} P(f-_j))]; exact 0 when the
// latest outcomes differ.
cd biprob(const QuantumSystem& sys, const InitializationEvent& init, const MeasurementSchedule& schedule,
          const Sequence& f_plus, const Sequence& f_minus);
cd biprob(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
          const Sequence& f_plus, const Sequence& f_minus);

double probability(const QuantumSystem& sys, const InitializationEvent& init, const MeasurementSchedule& schedule,
                   const Sequence& f);
double probability(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
                   const Sequence& f);

// Diagonal of the table for every sequence, indexed by ScheduleProjectors::encode.
std::vector<double> all_probabilities(const QuantumSystem& sys, const ComplexMatrix& metric,
                                      const MeasurementSchedule& schedule);

struct NextDeployment {
  double time;
  Observable observable;
};

// P(prefix then f_next) / P(prefix)
double conditional(const QuantumSystem& sys, const InitializationEvent& init,
                   const MeasurementSchedule& schedule_prefix, const Sequence& f_prefix,
                   const NextDeployment& next, std::size_t f_next);

// P_n ... P_1 rho P_1 ... P_n
ComplexMatrix pseudo_metric(const QuantumSystem& sys, const InitializationEvent& init,
                            const MeasurementSchedule& schedule, const Sequence& f);

// (prod P)^dagger (prod P); generally not a projector.
ComplexMatrix effect_operator(const QuantumSystem& sys, const MeasurementSchedule& schedule, const Sequence& f);

class BiProbabilityTable {
 public:
  BiProbabilityTable(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
                     std::size_t enumeration_cap = kDefaultEnumerationCap);

  const QuantumSystem& system() const noexcept { return system_; }
  const ComplexMatrix& metric() const noexcept { return metric_; }
  const MeasurementSchedule& schedule() const noexcept { return schedule_; }
  const ScheduleProjectors& projectors() const noexcept { return projectors_; }

  std::size_t sequence_count() const noexcept { return projectors_.sequence_count(); }
  std::size_t stored_pairs() const noexcept;

  // Value at flat sequence indices; 0 for causality-violating pairs.
  cd at(std::size_t plus_index, std::size_t minus_index) const;
  cd value(const Sequence& f_plus, const Sequence& f_minus) const;
  bool stored(std::size_t plus_index, std::size_t minus_index) const;

  // Visits stored pairs in key order (plus index, then minus index).
  void for_each(const std::function<void(std::size_t, std::size_t, cd)>& visit) const;

  cd total() const;

  // f_plus_n..f_plus_1, f_minus_n..f_minus_1, re, im
  void write_csv(std::ostream& os) const;

 private:
  std::size_t block_of(std::size_t index) const;
  std::size_t offset_in_block(std::size_t index) const;

  QuantumSystem system_;
  ComplexMatrix metric_;
  MeasurementSchedule schedule_;
  ScheduleProjectors projectors_;
  std::size_t block_size_;
  std::vector<ComplexMatrix> blocks_;  // one per latest outcome
};

BiProbabilityTable full_table(const QuantumSystem& sys, const InitializationEvent& init,
                              const MeasurementSchedule& schedule,
                              std::size_t enumeration_cap = kDefaultEnumerationCap);

// Q5: max |sum_{f_j+, f_j-} Q - Q'| against the table without position j.
double check_bi_consistency(const BiProbabilityTable& table, std::size_t position);

struct GudderMetric {
  std::vector<Sequence> basis_index;
  ComplexMatrix gram;
  std::size_t rank = 0;
  ComplexMatrix null_basis;  // orthonormal columns spanning the kernel
  double min_eigenvalue = 0.0;
  double trace = 0.0;
};

inline constexpr double kRankTolerance = 1e-10;

// Q4: Gram operator over the sequence basis; throws NotPSD when the smallest
// eigenvalue is below -psd_tolerance.
GudderMetric check_positivity(const BiProbabilityTable& table, double psd_tolerance = Tolerances::kPsd);

// Q8: coarse-device table vs cellwise sums of the fine table.
double check_additivity(const QuantumSystem& sys, const InitializationEvent& init,
                        const MeasurementSchedule& schedule,
                        const std::vector<std::optional<Resolution>>& resolutions);
double check_additivity(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
                        const std::vector<std::optional<Resolution>>& resolutions);

// Deviations of the table invariants Q1, Q2 (0 by construction), Q7 and the
// Hermitian pairing.
struct TableInvariants {
  double normalization = 0.0;
  double measurement_link = 0.0;
  double diagonal_imag = 0.0;
  double hermitian_pairing = 0.0;
};
TableInvariants table_invariants(const BiProbabilityTable& table);

}  // namespace bitraj
