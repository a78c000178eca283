#include "bitraj/biprob.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bitraj/errors.hpp"

namespace bitraj {

ScheduleProjectors::ScheduleProjectors(const QuantumSystem& sys, const MeasurementSchedule& schedule)
    : dim_(sys.dim()), sequence_count_(1) {
  for (const auto& entry : schedule.entries()) {
    if (entry.observable.dim() != sys.dim())
      throw Error(ErrorCode::kDimensionMismatch, "observable " + entry.observable.name() + " does not match system");
    by_position_.push_back(heisenberg_projectors(sys, entry.observable, entry.time));
    radix_.push_back(entry.observable.size());
    sequence_count_ *= entry.observable.size();
  }
}

const ComplexMatrix& ScheduleProjectors::at(std::size_t position, std::size_t outcome) const {
  const auto& row = by_position_.at(position);
  if (outcome >= row.size()) {
    std::ostringstream os;
    os << "outcome index " << outcome << " at position " << position + 1;
    throw Error(ErrorCode::kUnknownOutcome, os.str());
  }
  return row[outcome];
}

void ScheduleProjectors::validate(const Sequence& f) const {
  if (f.size() != length()) {
    std::ostringstream os;
    os << "sequence of length " << f.size() << " for a schedule of length " << length();
    throw Error(ErrorCode::kLengthMismatch, os.str());
  }
  const std::size_t n = length();
  for (std::size_t i = 0; i < n; ++i)
    if (f[i] >= radix_[n - 1 - i]) {
      std::ostringstream os;
      os << "outcome index " << f[i] << " at position " << n - i;
      throw Error(ErrorCode::kUnknownOutcome, os.str());
    }
}

ComplexMatrix ScheduleProjectors::chain(const Sequence& f) const {
  validate(f);
  if (f.empty()) return ComplexMatrix::identity(dim_);
  const std::size_t n = length();
  ComplexMatrix acc = by_position_[n - 1][f[0]];
  for (std::size_t i = 1; i < n; ++i) acc = acc * by_position_[n - 1 - i][f[i]];
  return acc;
}

std::size_t ScheduleProjectors::encode(const Sequence& f) const {
  validate(f);
  const std::size_t n = length();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) idx = idx * radix_[n - 1 - i] + f[i];
  return idx;
}

Sequence ScheduleProjectors::decode(std::size_t index) const {
  const std::size_t n = length();
  Sequence f(n);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t r = radix_[n - 1 - i];
    f[i] = index % r;
    index /= r;
  }
  return f;
}

cd biprob(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
          const Sequence& f_plus, const Sequence& f_minus) {
  const ScheduleProjectors proj(sys, schedule);
  proj.validate(f_plus);
  proj.validate(f_minus);
  if (!f_plus.empty() && f_plus.front() != f_minus.front()) return {0.0, 0.0};
  const ComplexMatrix a_plus = proj.chain(f_plus);
  const ComplexMatrix a_minus = proj.chain(f_minus);
  return trace_with_adjoint(a_plus * metric, a_minus);
}

cd biprob(const QuantumSystem& sys, const InitializationEvent& init, const MeasurementSchedule& schedule,
          const Sequence& f_plus, const Sequence& f_minus) {
  return biprob(sys, init.metric(), schedule, f_plus, f_minus);
}

double probability(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
                   const Sequence& f) {
  return biprob(sys, metric, schedule, f, f).real();
}

double probability(const QuantumSystem& sys, const InitializationEvent& init, const MeasurementSchedule& schedule,
                   const Sequence& f) {
  return probability(sys, init.metric(), schedule, f);
}

std::vector<double> all_probabilities(const QuantumSystem& sys, const ComplexMatrix& metric,
                                      const MeasurementSchedule& schedule) {
  const ScheduleProjectors proj(sys, schedule);
  std::vector<double> out(proj.sequence_count());
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const ComplexMatrix a = proj.chain(proj.decode(idx));
    out[idx] = trace_with_adjoint(a * metric, a).real();
  }
  return out;
}

double conditional(const QuantumSystem& sys, const InitializationEvent& init,
                   const MeasurementSchedule& schedule_prefix, const Sequence& f_prefix, const NextDeployment& next,
                   std::size_t f_next) {
  const double p_prefix = probability(sys, init, schedule_prefix, f_prefix);
  if (p_prefix <= kConditionalFloor) {
    std::ostringstream os;
    os << "conditioning sequence has probability " << p_prefix;
    throw Error(ErrorCode::kZeroConditioningEvent, os.str());
  }
  std::vector<MeasurementSchedule::Entry> entries = schedule_prefix.entries();
  entries.push_back({next.time, next.observable});
  const MeasurementSchedule joint(schedule_prefix.t0(), std::move(entries));
  Sequence f_joint;
  f_joint.reserve(f_prefix.size() + 1);
  f_joint.push_back(f_next);
  f_joint.insert(f_joint.end(), f_prefix.begin(), f_prefix.end());
  return probability(sys, init, joint, f_joint) / p_prefix;
}

ComplexMatrix pseudo_metric(const QuantumSystem& sys, const InitializationEvent& init,
                            const MeasurementSchedule& schedule, const Sequence& f) {
  const ScheduleProjectors proj(sys, schedule);
  const ComplexMatrix a = proj.chain(f);
  return a * init.metric() * a.adjoint();
}

ComplexMatrix effect_operator(const QuantumSystem& sys, const MeasurementSchedule& schedule, const Sequence& f) {
  const ScheduleProjectors proj(sys, schedule);
  const ComplexMatrix a = proj.chain(f);
  return a.adjoint() * a;
}

BiProbabilityTable::BiProbabilityTable(const QuantumSystem& sys, const ComplexMatrix& metric,
                                       const MeasurementSchedule& schedule, std::size_t enumeration_cap)
    : system_(sys), metric_(metric), schedule_(schedule), projectors_(sys, schedule) {
  if (metric_.rows() != sys.dim() || metric_.cols() != sys.dim())
    throw Error(ErrorCode::kDimensionMismatch, "metric does not match system dimension");
  const std::size_t n = projectors_.length();
  const std::size_t count = projectors_.sequence_count();
  const std::size_t blocks = n == 0 ? 1 : projectors_.radix().back();
  block_size_ = count / blocks;
  const double stored = static_cast<double>(count) * static_cast<double>(block_size_);
  if (stored > static_cast<double>(enumeration_cap)) {
    std::ostringstream os;
    os << "table would store " << stored << " pairs (cap " << enumeration_cap << ")";
    throw Error(ErrorCode::kEnumerationCapExceeded, os.str());
  }

  std::vector<ComplexMatrix> chains(count);
  std::vector<ComplexMatrix> weighted(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    chains[idx] = projectors_.chain(projectors_.decode(idx));
    weighted[idx] = chains[idx] * metric_;
  }
  blocks_.assign(blocks, ComplexMatrix(block_size_, block_size_));
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t base = b * block_size_;
    for (std::size_t i = 0; i < block_size_; ++i)
      for (std::size_t j = 0; j < block_size_; ++j)
        blocks_[b](i, j) = trace_with_adjoint(weighted[base + i], chains[base + j]);
  }
}

std::size_t BiProbabilityTable::stored_pairs() const noexcept { return blocks_.size() * block_size_ * block_size_; }

std::size_t BiProbabilityTable::block_of(std::size_t index) const { return index / block_size_; }
std::size_t BiProbabilityTable::offset_in_block(std::size_t index) const { return index % block_size_; }

bool BiProbabilityTable::stored(std::size_t plus_index, std::size_t minus_index) const {
  return block_of(plus_index) == block_of(minus_index);
}

cd BiProbabilityTable::at(std::size_t plus_index, std::size_t minus_index) const {
  if (plus_index >= sequence_count() || minus_index >= sequence_count())
    throw Error(ErrorCode::kIndexOutOfRange, "sequence index out of range");
  if (!stored(plus_index, minus_index)) return {0.0, 0.0};
  return blocks_[block_of(plus_index)](offset_in_block(plus_index), offset_in_block(minus_index));
}

cd BiProbabilityTable::value(const Sequence& f_plus, const Sequence& f_minus) const {
  return at(projectors_.encode(f_plus), projectors_.encode(f_minus));
}

void BiProbabilityTable::for_each(const std::function<void(std::size_t, std::size_t, cd)>& visit) const {
  for (std::size_t p = 0; p < sequence_count(); ++p) {
    const std::size_t b = block_of(p);
    for (std::size_t j = 0; j < block_size_; ++j) visit(p, b * block_size_ + j, blocks_[b](offset_in_block(p), j));
  }
}

cd BiProbabilityTable::total() const {
  cd s = 0.0;
  for (const auto& block : blocks_)
    for (const cd& z : block.data()) s += z;
  return s;
}

void BiProbabilityTable::write_csv(std::ostream& os) const {
  const std::size_t n = projectors_.length();
  for (std::size_t i = 0; i < n; ++i) os << "f_plus_" << n - i << ",";
  for (std::size_t i = 0; i < n; ++i) os << "f_minus_" << n - i << ",";
  os << "re,im\n";
  const auto label = [&](const Sequence& f, std::size_t i) -> const std::string& {
    return schedule_.entry(n - 1 - i).observable.labels()[f[i]];
  };
  std::ostringstream row;
  for_each([&](std::size_t p, std::size_t m, cd v) {
    const Sequence fp = projectors_.decode(p);
    const Sequence fm = projectors_.decode(m);
    for (std::size_t i = 0; i < n; ++i) os << label(fp, i) << ",";
    for (std::size_t i = 0; i < n; ++i) os << label(fm, i) << ",";
    os << std::setprecision(17) << v.real() << "," << v.imag() << "\n";
  });
}

BiProbabilityTable full_table(const QuantumSystem& sys, const InitializationEvent& init,
                              const MeasurementSchedule& schedule, std::size_t enumeration_cap) {
  return BiProbabilityTable(sys, init.metric(), schedule, enumeration_cap);
}

double check_bi_consistency(const BiProbabilityTable& table, std::size_t position) {
  const std::size_t n = table.schedule().size();
  if (position < 1 || position >= n) {
    std::ostringstream os;
    os << "bi-consistency position " << position << " not in [1, " << n << ")";
    throw Error(ErrorCode::kPositionOutOfRange, os.str());
  }
  const BiProbabilityTable reduced(table.system(), table.metric(), table.schedule().without(position - 1));
  // Latest-first sequence slot of time position j.
  const std::size_t slot = n - position;
  const auto drop = [slot](Sequence f) {
    f.erase(f.begin() + static_cast<std::ptrdiff_t>(slot));
    return f;
  };
  ComplexMatrix sums(reduced.sequence_count(), reduced.sequence_count());
  const auto& proj = table.projectors();
  const auto& rproj = reduced.projectors();
  table.for_each([&](std::size_t p, std::size_t m, cd v) {
    sums(rproj.encode(drop(proj.decode(p))), rproj.encode(drop(proj.decode(m)))) += v;
  });
  double dev = 0.0;
  for (std::size_t p = 0; p < reduced.sequence_count(); ++p)
    for (std::size_t m = 0; m < reduced.sequence_count(); ++m)
      dev = std::max(dev, std::abs(sums(p, m) - reduced.at(p, m)));
  return dev;
}

GudderMetric check_positivity(const BiProbabilityTable& table, double psd_tolerance) {
  const std::size_t count = table.sequence_count();
  GudderMetric g;
  g.gram = ComplexMatrix(count, count);
  table.for_each([&](std::size_t p, std::size_t m, cd v) { g.gram(p, m) = v; });
  for (std::size_t i = 0; i < count; ++i) g.basis_index.push_back(table.projectors().decode(i));
  g.trace = g.gram.trace().real();

  const HermitianEigen e = eig_hermitian(g.gram);
  g.min_eigenvalue = e.values.front();
  if (g.min_eigenvalue < -psd_tolerance) {
    std::ostringstream os;
    os << "Gram operator has eigenvalue " << g.min_eigenvalue;
    throw Error(ErrorCode::kNotPSD, os.str());
  }
  std::vector<std::size_t> null_cols;
  for (std::size_t j = 0; j < count; ++j) {
    if (e.values[j] > kRankTolerance)
      ++g.rank;
    else
      null_cols.push_back(j);
  }
  g.null_basis = ComplexMatrix(count, null_cols.size());
  for (std::size_t c = 0; c < null_cols.size(); ++c)
    for (std::size_t r = 0; r < count; ++r) g.null_basis(r, c) = e.vectors(r, null_cols[c]);
  return g;
}

double check_additivity(const QuantumSystem& sys, const ComplexMatrix& metric, const MeasurementSchedule& schedule,
                        const std::vector<std::optional<Resolution>>& resolutions) {
  const std::size_t n = schedule.size();
  if (resolutions.size() != n) throw Error(ErrorCode::kLengthMismatch, "one optional resolution per position");
  MeasurementSchedule coarse_schedule = schedule;
  for (std::size_t j = 0; j < n; ++j)
    if (resolutions[j])
      coarse_schedule = coarse_schedule.with_observable(j, coarse_grain(schedule.entry(j).observable, *resolutions[j]));

  const BiProbabilityTable fine(sys, metric, schedule);
  const BiProbabilityTable coarse(sys, metric, coarse_schedule);
  const auto& fproj = fine.projectors();
  const auto& cproj = coarse.projectors();
  const auto to_coarse = [&](std::size_t idx) {
    Sequence f = fproj.decode(idx);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pos = n - 1 - i;
      if (resolutions[pos]) f[i] = resolutions[pos]->cell_of()[f[i]];
    }
    return cproj.encode(f);
  };
  std::vector<std::size_t> coarse_of(fine.sequence_count());
  for (std::size_t i = 0; i < coarse_of.size(); ++i) coarse_of[i] = to_coarse(i);

  ComplexMatrix sums(coarse.sequence_count(), coarse.sequence_count());
  fine.for_each([&](std::size_t p, std::size_t m, cd v) { sums(coarse_of[p], coarse_of[m]) += v; });
  double dev = 0.0;
  for (std::size_t p = 0; p < coarse.sequence_count(); ++p)
    for (std::size_t m = 0; m < coarse.sequence_count(); ++m)
      dev = std::max(dev, std::abs(sums(p, m) - coarse.at(p, m)));
  return dev;
}

double check_additivity(const QuantumSystem& sys, const InitializationEvent& init, const MeasurementSchedule& schedule,
                        const std::vector<std::optional<Resolution>>& resolutions) {
  return check_additivity(sys, init.metric(), schedule, resolutions);
}

TableInvariants table_invariants(const BiProbabilityTable& table) {
  TableInvariants inv;
  inv.normalization = std::abs(table.total() - cd{1.0, 0.0});
  const auto probs = all_probabilities(table.system(), table.metric(), table.schedule());
  for (std::size_t i = 0; i < table.sequence_count(); ++i) {
    const cd diag = table.at(i, i);
    inv.diagonal_imag = std::max(inv.diagonal_imag, std::abs(diag.imag()));
    inv.measurement_link = std::max(inv.measurement_link, std::abs(diag.real() - probs[i]));
    inv.measurement_link = std::max(inv.measurement_link, std::max(0.0, -diag.real()));
  }
  table.for_each([&](std::size_t p, std::size_t m, cd v) {
    inv.hermitian_pairing = std::max(inv.hermitian_pairing, std::abs(v - std::conj(table.at(m, p))));
  });
  return inv;
}

}  // namespace bitraj
