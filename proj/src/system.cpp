#include "bitraj/system.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bitraj/errors.hpp"

namespace bitraj {

QuantumSystem::QuantumSystem(const ComplexMatrix& hamiltonian)
    : hamiltonian_(require_hermitian(hamiltonian)), spectrum_(eig_hermitian(hamiltonian_)) {
  if (hamiltonian_.rows() < 2) throw Error(ErrorCode::kBadDimension, "system dimension must be >= 2");
}

ComplexMatrix evolution(const QuantumSystem& sys, double t, double t_prime) {
  const HermitianEigen& e = sys.spectrum();
  const double dt = t - t_prime;
  ComplexMatrix vd = e.vectors;
  for (std::size_t j = 0; j < sys.dim(); ++j) {
    const cd phase = std::polar(1.0, -dt * e.values[j]);
    for (std::size_t r = 0; r < sys.dim(); ++r) vd(r, j) *= phase;
  }
  return vd * e.vectors.adjoint();
}

std::string format_outcome_value(double v) {
  // 12 significant digits keep labels of computed spectra readable.
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  std::string out(buf, res.ptr);
  return out == "-0" ? "0" : out;
}

Observable::Observable(std::string name, std::vector<double> values,
                       std::vector<ComplexMatrix> projectors)
    : name_(std::move(name)), projectors_(std::move(projectors)) {
  for (double v : values) {
    labels_.push_back(format_outcome_value(v));
    values_.emplace_back(v);
  }
  validate();
}

Observable::Observable(std::string name, std::vector<std::string> labels,
                       std::vector<std::optional<double>> values,
                       std::vector<ComplexMatrix> projectors)
    : name_(std::move(name)),
      labels_(std::move(labels)),
      values_(std::move(values)),
      projectors_(std::move(projectors)) {
  validate();
}

void Observable::validate() {
  if (projectors_.empty()) throw Error(ErrorCode::kInvalidObservable, name_ + ": no outcomes");
  if (labels_.size() != projectors_.size() || values_.size() != projectors_.size())
    throw Error(ErrorCode::kInvalidObservable, name_ + ": outcome/projector count mismatch");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j])
        throw Error(ErrorCode::kInvalidObservable, name_ + ": duplicate outcome " + labels_[i]);

  const std::size_t d = projectors_.front().rows();
  ComplexMatrix total(d, d);
  fine_grained_ = true;
  for (auto& p : projectors_) {
    if (p.rows() != d || p.cols() != d)
      throw Error(ErrorCode::kDimensionMismatch, name_ + ": projector dimensions differ");
    p = require_hermitian(p);
    if (max_abs_diff(p * p, p) > Tolerances::kProjector)
      throw Error(ErrorCode::kInvalidObservable, name_ + ": projector is not idempotent");
    total += p;
    if (std::abs(p.trace().real() - 1.0) > Tolerances::kProjector) fine_grained_ = false;
  }
  if (max_abs_diff(total, ComplexMatrix::identity(d)) > Tolerances::kProjector)
    throw Error(ErrorCode::kInvalidObservable, name_ + ": projectors are not complete");
  for (std::size_t i = 0; i < projectors_.size(); ++i)
    for (std::size_t j = i + 1; j < projectors_.size(); ++j)
      if ((projectors_[i] * projectors_[j]).max_abs() > Tolerances::kProjector)
        throw Error(ErrorCode::kInvalidObservable, name_ + ": projectors are not orthogonal");
}

const ComplexMatrix& Observable::projector(std::size_t outcome) const {
  if (outcome >= projectors_.size()) {
    std::ostringstream os;
    os << name_ << ": outcome index " << outcome << " out of range";
    throw Error(ErrorCode::kUnknownOutcome, os.str());
  }
  return projectors_[outcome];
}

std::size_t Observable::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(ErrorCode::kUnknownOutcome, name_ + ": no outcome " + label);
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t Observable::index_of_value(double value) const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] && std::abs(*values_[i] - value) <= 1e-12 * (1.0 + std::abs(value))) return i;
  throw Error(ErrorCode::kUnknownOutcome, name_ + ": no outcome with value " + format_outcome_value(value));
}

std::vector<cd> Observable::ray(std::size_t outcome) const {
  const ComplexMatrix& p = projector(outcome);
  if (std::abs(p.trace().real() - 1.0) > Tolerances::kProjector)
    throw Error(ErrorCode::kNotFineGrained, name_ + ": outcome " + labels_[outcome] + " is not rank 1");
  const HermitianEigen e = eig_hermitian(p);
  return e.vectors.column(p.rows() - 1);
}

ComplexMatrix Observable::as_matrix() const {
  ComplexMatrix m(dim(), dim());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!values_[i])
      throw Error(ErrorCode::kInvalidObservable, name_ + ": outcome " + labels_[i] + " has no numeric value");
    m.add_scaled(*values_[i], projectors_[i]);
  }
  return m;
}

Resolution::Resolution(const Observable& parent, std::vector<Cell> cells)
    : parent_name_(parent.name()), parent_labels_(parent.labels()), cells_(std::move(cells)) {
  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  cell_of_.assign(parent.size(), kUnassigned);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (cells_[c].members.empty()) throw Error(ErrorCode::kCellMismatch, "empty cell " + cells_[c].label);
    for (std::size_t m : cells_[c].members) {
      if (m >= parent.size()) throw Error(ErrorCode::kCellMismatch, "cell member out of range");
      if (cell_of_[m] != kUnassigned)
        throw Error(ErrorCode::kCellMismatch, "outcome " + parent.labels()[m] + " in two cells");
      cell_of_[m] = c;
    }
  }
  for (std::size_t m = 0; m < cell_of_.size(); ++m)
    if (cell_of_[m] == kUnassigned)
      throw Error(ErrorCode::kCellMismatch, "outcome " + parent.labels()[m] + " not covered");
}

Resolution Resolution::trivial(const Observable& parent) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < parent.size(); ++i) cells.push_back({parent.labels()[i], {i}});
  return Resolution(parent, std::move(cells));
}

Resolution Resolution::full_blur(const Observable& parent, std::string label) {
  std::vector<std::size_t> all(parent.size());
  std::iota(all.begin(), all.end(), 0);
  return Resolution(parent, {{std::move(label), std::move(all)}});
}

Observable coarse_grain(const Observable& obs, const Resolution& res) {
  if (res.parent_name() != obs.name() || res.parent_labels() != obs.labels())
    throw Error(ErrorCode::kCellMismatch, "resolution does not belong to observable " + obs.name());
  std::vector<std::string> labels;
  std::vector<std::optional<double>> values;
  std::vector<ComplexMatrix> projectors;
  for (const auto& cell : res.cells()) {
    labels.push_back(cell.label);
    if (cell.members.size() == 1)
      values.push_back(obs.values()[cell.members.front()]);
    else
      values.emplace_back(std::nullopt);
    ComplexMatrix p(obs.dim(), obs.dim());
    for (std::size_t m : cell.members) p += obs.projector(m);
    projectors.push_back(std::move(p));
  }
  return Observable(obs.name(), std::move(labels), std::move(values), std::move(projectors));
}

Resolution compose(const Observable& obs, const Resolution& first, const Resolution& second) {
  const Observable mid = coarse_grain(obs, first);
  if (second.parent_labels() != mid.labels())
    throw Error(ErrorCode::kCellMismatch, "second resolution does not refine-compose with the first");
  std::vector<Resolution::Cell> cells;
  for (const auto& outer : second.cells()) {
    Resolution::Cell c{outer.label, {}};
    for (std::size_t mid_idx : outer.members)
      for (std::size_t m : first.cells()[mid_idx].members) c.members.push_back(m);
    std::sort(c.members.begin(), c.members.end());
    cells.push_back(std::move(c));
  }
  return Resolution(obs, std::move(cells));
}

Observable observable_from_matrix(const QuantumSystem& sys, const ComplexMatrix& m, std::string name) {
  if (m.rows() != sys.dim() || m.cols() != sys.dim())
    throw Error(ErrorCode::kDimensionMismatch, "observable matrix does not match system dimension");
  std::vector<double> values;
  std::vector<ComplexMatrix> projectors;
  for (auto& c : spectral_clusters(m)) {
    values.push_back(c.value);
    projectors.push_back(std::move(c.projector));
  }
  return Observable(std::move(name), std::move(values), std::move(projectors));
}

ComplexMatrix heisenberg_projector(const QuantumSystem& sys, const Observable& obs, std::size_t outcome,
                                   double t) {
  const ComplexMatrix& p = obs.projector(outcome);
  if (t == 0.0) return p;
  const ComplexMatrix u = evolution(sys, t, 0.0);
  return u.adjoint() * p * u;
}

std::vector<ComplexMatrix> heisenberg_projectors(const QuantumSystem& sys, const Observable& obs, double t) {
  if (obs.dim() != sys.dim())
    throw Error(ErrorCode::kDimensionMismatch, "observable " + obs.name() + " does not match system");
  if (t == 0.0) return obs.projectors();
  const ComplexMatrix u = evolution(sys, t, 0.0);
  const ComplexMatrix u_dag = u.adjoint();
  std::vector<ComplexMatrix> out;
  out.reserve(obs.size());
  for (const auto& p : obs.projectors()) out.push_back(u_dag * p * u);
  return out;
}

double survival_variance(const QuantumSystem& sys, const Observable& obs, std::size_t outcome, double t) {
  if (!obs.fine_grained()) throw Error(ErrorCode::kNotFineGrained, obs.name() + " is not fine-grained");
  const ComplexMatrix p = heisenberg_projector(sys, obs, outcome, t);
  const ComplexMatrix& h = sys.hamiltonian();
  const double mean = trace_of_product(p, h).real();
  const double second = trace_of_product(p, h * h).real();
  return std::max(0.0, second - mean * mean);
}

InitializationEvent::InitializationEvent(const QuantumSystem& sys, double time, std::vector<Component> components)
    : time_(time), components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::kWeightSumError, "initialization has no components");
  const std::size_t d = sys.dim();
  metric_ = ComplexMatrix(d, d);
  reference_metric_ = ComplexMatrix(d, d);
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.observable.dim() != d)
      throw Error(ErrorCode::kDimensionMismatch, "initializing observable " + c.observable.name());
    if (!c.observable.fine_grained())
      throw Error(ErrorCode::kNotFineGrained, "initializing device " + c.observable.name() + " is not fine-grained");
    if (c.weight < 0.0 || !std::isfinite(c.weight)) throw Error(ErrorCode::kWeightSumError, "negative weight");
    total += c.weight;
    if (c.weight == 0.0) continue;
    reference_metric_.add_scaled(c.weight, c.observable.projector(c.outcome));
    metric_.add_scaled(c.weight, heisenberg_projector(sys, c.observable, c.outcome, time));
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "initialization weights sum to " << total;
    throw Error(ErrorCode::kWeightSumError, os.str());
  }
}

InitializationEvent InitializationEvent::pure(const QuantumSystem& sys, double time, const Observable& obs,
                                              std::size_t outcome) {
  return InitializationEvent(sys, time, {{obs, outcome, 1.0}});
}

InitializationEvent InitializationEvent::from_density(const QuantumSystem& sys, double time,
                                                      const ComplexMatrix& rho) {
  if (rho.rows() != sys.dim()) throw Error(ErrorCode::kDimensionMismatch, "density matrix dimension");
  const HermitianEigen e = eig_hermitian(rho);
  if (e.values.front() < -Tolerances::kPsd)
    throw Error(ErrorCode::kInvalidState, "density matrix is not positive semi-definite");
  const double tr = std::accumulate(e.values.begin(), e.values.end(), 0.0);
  if (std::abs(tr - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidState, "density matrix trace is not 1");
  std::vector<double> values(sys.dim());
  std::vector<ComplexMatrix> projectors;
  for (std::size_t j = 0; j < sys.dim(); ++j) {
    values[j] = static_cast<double>(j);
    projectors.push_back(ComplexMatrix::outer(e.vectors.column(j)));
  }
  const Observable basis("rho_eigenbasis", std::move(values), std::move(projectors));
  std::vector<Component> comps;
  double kept = 0.0;
  for (std::size_t j = 0; j < sys.dim(); ++j) kept += std::max(0.0, e.values[j]);
  for (std::size_t j = 0; j < sys.dim(); ++j) comps.push_back({basis, j, std::max(0.0, e.values[j]) / kept});
  return InitializationEvent(sys, time, std::move(comps));
}

MeasurementSchedule::MeasurementSchedule(double t0, std::vector<Entry> entries)
    : t0_(t0), entries_(std::move(entries)) {
  double prev = t0_;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].time > prev)) {
      std::ostringstream os;
      os << "deployment times must increase strictly after t0; entry " << i + 1 << " at " << entries_[i].time;
      throw Error(ErrorCode::kInvalidSchedule, os.str());
    }
    prev = entries_[i].time;
    if (entries_[i].observable.dim() != entries_.front().observable.dim())
      throw Error(ErrorCode::kDimensionMismatch, "schedule observables act on different dimensions");
  }
}

MeasurementSchedule MeasurementSchedule::without(std::size_t skip) const {
  std::vector<Entry> rest;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (i != skip) rest.push_back(entries_[i]);
  return MeasurementSchedule(t0_, std::move(rest));
}

MeasurementSchedule MeasurementSchedule::prefix(std::size_t len) const {
  return MeasurementSchedule(t0_, std::vector<Entry>(entries_.begin(), entries_.begin() + std::min(len, size())));
}

MeasurementSchedule MeasurementSchedule::with_observable(std::size_t pos, Observable obs) const {
  std::vector<Entry> copy = entries_;
  copy.at(pos).observable = std::move(obs);
  return MeasurementSchedule(t0_, std::move(copy));
}

MeasurementSchedule MeasurementSchedule::shifted(double dt) const {
  std::vector<Entry> copy = entries_;
  for (auto& e : copy) e.time += dt;
  return MeasurementSchedule(t0_ + dt, std::move(copy));
}

}  // namespace bitraj
