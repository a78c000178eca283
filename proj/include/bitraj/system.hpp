#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bitraj/matrix.hpp"

namespace bitraj {

// Hilbert-space dimension plus a constant Hermitian Hamiltonian (hbar = 1).
class QuantumSystem {
 public:
  explicit QuantumSystem(const ComplexMatrix& hamiltonian);

  std::size_t dim() const noexcept { return hamiltonian_.rows(); }
  const ComplexMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  const HermitianEigen& spectrum() const noexcept { return spectrum_; }

 private:
  ComplexMatrix hamiltonian_;
  HermitianEigen spectrum_;
};

// exp(-i (t - t_prime) H)
ComplexMatrix evolution(const QuantumSystem& sys, double t, double t_prime);

// A measuring device: outcomes with complete, orthogonal projectors at t = 0.
// Fine outcomes carry a numeric value; coarse-grained outcomes carry only a
// label.
class Observable {
 public:
  Observable(std::string name, std::vector<double> values, std::vector<ComplexMatrix> projectors);
  Observable(std::string name, std::vector<std::string> labels,
             std::vector<std::optional<double>> values, std::vector<ComplexMatrix> projectors);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return projectors_.front().rows(); }
  std::size_t size() const noexcept { return projectors_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::optional<double>>& values() const noexcept { return values_; }
  const std::vector<ComplexMatrix>& projectors() const noexcept { return projectors_; }
  const ComplexMatrix& projector(std::size_t outcome) const;
  bool fine_grained() const noexcept { return fine_grained_; }

  // Throws UnknownOutcome.
  std::size_t index_of(const std::string& label) const;
  std::size_t index_of_value(double value) const;

  // Unit vector spanning a rank-1 projector; throws NotFineGrained.
  std::vector<cd> ray(std::size_t outcome) const;

  // sum_f f P(f); requires numeric values on every outcome.
  ComplexMatrix as_matrix() const;

 private:
  void validate();

  std::string name_;
  std::vector<std::string> labels_;
  std::vector<std::optional<double>> values_;
  std::vector<ComplexMatrix> projectors_;
  bool fine_grained_ = false;
};

std::string format_outcome_value(double v);

// Partition of a parent observable's outcomes into labelled cells.
class Resolution {
 public:
  struct Cell {
    std::string label;
    std::vector<std::size_t> members;  // parent outcome indices
  };

  Resolution(const Observable& parent, std::vector<Cell> cells);

  static Resolution trivial(const Observable& parent);
  static Resolution full_blur(const Observable& parent, std::string label = "any");

  const std::string& parent_name() const noexcept { return parent_name_; }
  const std::vector<std::string>& parent_labels() const noexcept { return parent_labels_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  // Cell index holding each parent outcome.
  const std::vector<std::size_t>& cell_of() const noexcept { return cell_of_; }

 private:
  std::string parent_name_;
  std::vector<std::string> parent_labels_;
  std::vector<Cell> cells_;
  std::vector<std::size_t> cell_of_;
};

Observable coarse_grain(const Observable& obs, const Resolution& res);

// Resolution of `obs` equal to applying `first` and then `second` (whose
// parent is coarse_grain(obs, first)).
Resolution compose(const Observable& obs, const Resolution& first, const Resolution& second);

Observable observable_from_matrix(const QuantumSystem& sys, const ComplexMatrix& m,
                                  std::string name = "spectral");

// U_t^dagger P_0(f) U_t
ComplexMatrix heisenberg_projector(const QuantumSystem& sys, const Observable& obs,
                                   std::size_t outcome, double t);
std::vector<ComplexMatrix> heisenberg_projectors(const QuantumSystem& sys, const Observable& obs,
                                                 double t);

// <H^2> - <H>^2 in the range of P_t(k); obs must be fine-grained.
double survival_variance(const QuantumSystem& sys, const Observable& obs, std::size_t outcome,
                         double t);

// Initialization by a perfectly fine-grained device at time t0; the metric is
// sum_K,k p^K(k) P^K_{t0}(k).
class InitializationEvent {
 public:
  struct Component {
    Observable observable;
    std::size_t outcome;
    double weight;
  };

  InitializationEvent(const QuantumSystem& sys, double time, std::vector<Component> components);

  // Pure initialization in outcome `outcome` of `obs`.
  static InitializationEvent pure(const QuantumSystem& sys, double time, const Observable& obs,
                                  std::size_t outcome);
  // Decomposes a reference-time density matrix into its eigenbasis device.
  static InitializationEvent from_density(const QuantumSystem& sys, double time,
                                          const ComplexMatrix& rho);

  double time() const noexcept { return time_; }
  const std::vector<Component>& components() const noexcept { return components_; }
  const ComplexMatrix& metric() const noexcept { return metric_; }
  // Same weights, all projectors at t = 0 (no Heisenberg transport).
  const ComplexMatrix& reference_metric() const noexcept { return reference_metric_; }

 private:
  double time_;
  std::vector<Component> components_;
  ComplexMatrix metric_;
  ComplexMatrix reference_metric_;
};

class MeasurementSchedule {
 public:
  struct Entry {
    double time;
    Observable observable;
  };

  MeasurementSchedule(double t0, std::vector<Entry> entries);

  double t0() const noexcept { return t0_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const Entry& entry(std::size_t i) const { return entries_.at(i); }

  // Schedule without position `skip` (0-based, time order).
  MeasurementSchedule without(std::size_t skip) const;
  MeasurementSchedule prefix(std::size_t len) const;
  MeasurementSchedule with_observable(std::size_t pos, Observable obs) const;
  MeasurementSchedule shifted(double dt) const;

 private:
  double t0_;
  std::vector<Entry> entries_;
};

}  // namespace bitraj
