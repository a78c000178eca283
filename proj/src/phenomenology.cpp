#include "bitraj/phenomenology.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bitraj/biprob.hpp"
#include "bitraj/errors.hpp"

namespace bitraj {

ExperimentReport make_report(std::string name, double deviation, double threshold, CheckKind kind) {
  ExperimentReport r;
  r.name = std::move(name);
  r.deviation = deviation;
  r.threshold = threshold;
  r.kind = kind;
  r.passed = kind == CheckKind::kEquality ? deviation <= threshold : deviation >= threshold;
  return r;
}

std::string_view check_kind_name(CheckKind kind) {
  return kind == CheckKind::kEquality ? "equality" : "violation";
}

double marginalization_deviation(const QuantumSystem& sys, const ComplexMatrix& metric,
                                 const MeasurementSchedule& schedule, std::size_t position) {
  const std::size_t n = schedule.size();
  if (position < 1 || position > n) {
    std::ostringstream os;
    os << "position " << position << " not in [1, " << n << "]";
    throw Error(ErrorCode::kPositionOutOfRange, os.str());
  }
  const ScheduleProjectors full(sys, schedule);
  const MeasurementSchedule reduced_schedule = schedule.without(position - 1);
  const ScheduleProjectors reduced(sys, reduced_schedule);
  const std::vector<double> p_full = all_probabilities(sys, metric, schedule);
  const std::vector<double> p_reduced = all_probabilities(sys, metric, reduced_schedule);

  const std::size_t slot = n - position;
  std::vector<double> sums(p_reduced.size(), 0.0);
  for (std::size_t idx = 0; idx < p_full.size(); ++idx) {
    Sequence f = full.decode(idx);
    f.erase(f.begin() + static_cast<std::ptrdiff_t>(slot));
    sums[reduced.encode(f)] += p_full[idx];
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < sums.size(); ++i) dev = std::max(dev, std::abs(sums[i] - p_reduced[i]));
  return dev;
}

ExperimentReport causality_experiment(const QuantumSystem& sys, const InitializationEvent& init,
                                      const MeasurementSchedule& schedule, double threshold) {
  if (schedule.size() < 2) throw Error(ErrorCode::kInvalidSchedule, "causality needs at least two deployments");
  return make_report("causality", marginalization_deviation(sys, init.metric(), schedule, schedule.size()),
                     threshold, CheckKind::kEquality);
}

ExperimentReport inconsistency_witness(const QuantumSystem& sys, const InitializationEvent& init,
                                       const MeasurementSchedule& schedule, std::size_t position,
                                       double threshold) {
  if (position < 1 || position >= schedule.size()) {
    std::ostringstream os;
    os << "interior position " << position << " not in [1, " << schedule.size() << ")";
    throw Error(ErrorCode::kPositionOutOfRange, os.str());
  }
  return make_report("inconsistency", marginalization_deviation(sys, init.metric(), schedule, position), threshold,
                     CheckKind::kViolation);
}

ExperimentReport markov_experiment(const QuantumSystem& sys, const InitializationEvent& init,
                                   const MeasurementSchedule& fine_schedule, double threshold) {
  for (const auto& e : fine_schedule.entries())
    if (!e.observable.fine_grained())
      throw Error(ErrorCode::kNotFineGrained, e.observable.name() + " is not fine-grained");
  const ScheduleProjectors proj(sys, fine_schedule);
  const std::vector<double> joint = all_probabilities(sys, init.metric(), fine_schedule);
  const std::size_t n = fine_schedule.size();
  double dev = 0.0;
  for (std::size_t idx = 0; idx < joint.size(); ++idx) {
    const Sequence k = proj.decode(idx);
    if (n == 0) {
      dev = std::max(dev, std::abs(joint[idx] - 1.0));
      continue;
    }
    // k.back() is the first deployment.
    double chain = trace_of_product(proj.at(0, k[n - 1]), init.metric()).real();
    for (std::size_t pos = 1; pos < n; ++pos) {
      const ComplexMatrix& later = proj.at(pos, k[n - 1 - pos]);
      const ComplexMatrix& earlier = proj.at(pos - 1, k[n - pos]);
      chain *= trace_of_product(later, earlier).real();
    }
    dev = std::max(dev, std::abs(joint[idx] - chain));
  }
  return make_report("markov", dev, threshold, CheckKind::kEquality);
}

std::vector<std::vector<double>> uncertainty_correlation(const QuantumSystem& sys, const Observable& k_obs,
                                                         const Observable& l_obs, double t) {
  if (!k_obs.fine_grained()) throw Error(ErrorCode::kNotFineGrained, k_obs.name() + " is not fine-grained");
  if (!l_obs.fine_grained()) throw Error(ErrorCode::kNotFineGrained, l_obs.name() + " is not fine-grained");
  const auto pk = heisenberg_projectors(sys, k_obs, t);
  const auto pl = heisenberg_projectors(sys, l_obs, t);
  std::vector<std::vector<double>> c(pk.size(), std::vector<double>(pl.size()));
  for (std::size_t k = 0; k < pk.size(); ++k)
    for (std::size_t l = 0; l < pl.size(); ++l) c[k][l] = trace_of_product(pk[k], pl[l]).real();
  return c;
}

double zeno_experiment(const QuantumSystem& sys, const Observable& k_obs, std::size_t k0, double total_t,
                       std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidSchedule, "Zeno experiment needs n >= 1");
  double survival = 1.0;
  const double step = total_t / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = static_cast<double>(j) * total_t / static_cast<double>(n);
    const ComplexMatrix before = heisenberg_projector(sys, k_obs, k0, s);
    const ComplexMatrix after = heisenberg_projector(sys, k_obs, k0, s + step);
    // Conditional on a rank-1 outcome: tr(P_after P_before) / tr(P_before).
    survival *= trace_of_product(after, before).real() / before.trace().real();
  }
  return survival;
}

PlacementDeviation coarse_grain_placement_experiment(const QuantumSystem& sys, const InitializationEvent& init,
                                                     const MeasurementSchedule& schedule, std::size_t position,
                                                     const Resolution& res) {
  const std::size_t n = schedule.size();
  if (position < 1 || position > n) {
    std::ostringstream os;
    os << "position " << position << " not in [1, " << n << "]";
    throw Error(ErrorCode::kPositionOutOfRange, os.str());
  }
  const auto coarse_vs_fine = [&](const MeasurementSchedule& sched) {
    const Observable coarse = coarse_grain(sched.entry(position - 1).observable, res);
    const MeasurementSchedule coarse_sched = sched.with_observable(position - 1, coarse);
    const ScheduleProjectors fine_proj(sys, sched);
    const ScheduleProjectors coarse_proj(sys, coarse_sched);
    const auto p_fine = all_probabilities(sys, init.metric(), sched);
    const auto p_coarse = all_probabilities(sys, init.metric(), coarse_sched);
    const std::size_t slot = sched.size() - position;
    std::vector<double> sums(p_coarse.size(), 0.0);
    for (std::size_t idx = 0; idx < p_fine.size(); ++idx) {
      Sequence f = fine_proj.decode(idx);
      f[slot] = res.cell_of()[f[slot]];
      sums[coarse_proj.encode(f)] += p_fine[idx];
    }
    double dev = 0.0;
    for (std::size_t i = 0; i < sums.size(); ++i) dev = std::max(dev, std::abs(sums[i] - p_coarse[i]));
    return dev;
  };
  PlacementDeviation out;
  out.terminal_dev = coarse_vs_fine(schedule.prefix(position));
  if (position < n) out.interior_dev = coarse_vs_fine(schedule);
  return out;
}

ExperimentReport statics_equivalence(const QuantumSystem& sys, const InitializationEvent& init,
                                     const Observable& k_obs, double t, double threshold) {
  if (!(t > init.time())) throw Error(ErrorCode::kInvalidSchedule, "readout must follow the initialization");
  const MeasurementSchedule sched(init.time(), {{t, k_obs}});
  const auto p_dynamic = all_probabilities(sys, init.metric(), sched);

  // Synthetic device: reference projectors P^K_{t - t0}, deployed at t0+.
  std::vector<ComplexMatrix> synthetic_proj = heisenberg_projectors(sys, k_obs, t - init.time());
  const Observable synthetic(k_obs.name() + "_t", k_obs.labels(), k_obs.values(), std::move(synthetic_proj));
  double dev = 0.0;
  for (std::size_t k = 0; k < k_obs.size(); ++k) {
    const ComplexMatrix p_static = heisenberg_projector(sys, synthetic, k, init.time());
    dev = std::max(dev, std::abs(trace_of_product(p_static, init.metric()).real() - p_dynamic[k]));
  }
  return make_report("statics_equivalence", dev, threshold, CheckKind::kEquality);
}

ExperimentReport short_time_expansion(const QuantumSystem& sys, const Observable& k_obs, std::size_t k, double t,
                                      double dt, double rel_threshold) {
  const double variance = survival_variance(sys, k_obs, k, t);
  const ComplexMatrix before = heisenberg_projector(sys, k_obs, k, t);
  const ComplexMatrix after = heisenberg_projector(sys, k_obs, k, t + dt);
  const double survival = trace_of_product(after, before).real();
  const double fd = (1.0 - survival) / (dt * dt);
  const double rel = variance > 0.0 ? std::abs(fd - variance) / variance : std::abs(fd);
  ExperimentReport r = make_report("short_time", rel, rel_threshold, CheckKind::kEquality);
  r.value = variance;
  r.witness = {{"finite_difference", fd}, {"variance", variance}};
  return r;
}

}  // namespace bitraj
