#pragma once

// Numerical counterparts of the sequential-measurement observations:
// causality, inconsistency, Markovianity, uncertainty relations, Zeno
// survival, coarse-grained placement and the static picture.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bitraj/system.hpp"

namespace bitraj {

enum class CheckKind { kEquality, kViolation };

struct ExperimentReport {
  std::string name;
  double deviation = 0.0;
  double threshold = 0.0;
  CheckKind kind = CheckKind::kEquality;
  bool passed = false;
  std::optional<double> value;
  std::vector<std::pair<std::string, double>> witness;
};

ExperimentReport make_report(std::string name, double deviation, double threshold, CheckKind kind);
std::string_view check_kind_name(CheckKind kind);

inline constexpr double kEqualityThreshold = 1e-10;
inline constexpr double kViolationThreshold = 0.01;

// max |sum_{f_j} P(f) - P(f without j)| for 1-based time position j in [1, n].
double marginalization_deviation(const QuantumSystem& sys, const ComplexMatrix& metric,
                                 const MeasurementSchedule& schedule, std::size_t position);

ExperimentReport causality_experiment(const QuantumSystem& sys, const InitializationEvent& init,
                                      const MeasurementSchedule& schedule, double threshold = kEqualityThreshold);

ExperimentReport inconsistency_witness(const QuantumSystem& sys, const InitializationEvent& init,
                                       const MeasurementSchedule& schedule, std::size_t position,
                                       double threshold = kViolationThreshold);

ExperimentReport markov_experiment(const QuantumSystem& sys, const InitializationEvent& init,
                                   const MeasurementSchedule& fine_schedule, double threshold = kEqualityThreshold);

// C[k][l] = |<Psi^K_t(k)|Psi^L_t(l)>|^2
std::vector<std::vector<double>> uncertainty_correlation(const QuantumSystem& sys, const Observable& k_obs,
                                                         const Observable& l_obs, double t);

// prod_{j<n} P^{K|K}(k0 at s_j + t/n | k0 at s_j), s_j = j t / n
double zeno_experiment(const QuantumSystem& sys, const Observable& k_obs, std::size_t k0, double total_t,
                       std::size_t n);

struct PlacementDeviation {
  // Device at the end of the (truncated) schedule; 0 up to roundoff.
  double terminal_dev = 0.0;
  // Device mid-sequence; absent when the position is already the last one.
  std::optional<double> interior_dev;
};

// Coarse-grained device vs the cell sum of the fine device at position j; the
// terminal deviation places the same device last by truncating the schedule
// after position j.
PlacementDeviation coarse_grain_placement_experiment(const QuantumSystem& sys, const InitializationEvent& init,
                                                     const MeasurementSchedule& schedule, std::size_t position,
                                                     const Resolution& res);

// K read out at t vs the synthetic device whose reference projectors are
// P^K_{t - t0}, read out right after initialization.
ExperimentReport statics_equivalence(const QuantumSystem& sys, const InitializationEvent& init,
                                     const Observable& k_obs, double t, double threshold = 1e-12);

// (1 - P^{K|K}_{t+dt|t}(k|k)) / dt^2 relative to the survival variance.
ExperimentReport short_time_expansion(const QuantumSystem& sys, const Observable& k_obs, std::size_t k, double t,
                                      double dt, double rel_threshold = 0.01);

}  // namespace bitraj
