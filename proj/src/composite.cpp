#include "bitraj/composite.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "bitraj/errors.hpp"

namespace bitraj {

namespace {

ComplexMatrix checked_operator(const ComplexMatrix& v, std::size_t dim, const char* what) {
  if (!v.is_square() || v.rows() != dim) {
    std::ostringstream os;
    os << what << " is " << v.rows() << "x" << v.cols() << ", expected " << dim << "x" << dim;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  return require_hermitian(v);
}

ComplexMatrix total_hamiltonian(const QuantumSystem& a, const QuantumSystem& b, double coupling,
                                const ComplexMatrix& v_a, const ComplexMatrix& v_b) {
  ComplexMatrix h = kron(a.hamiltonian(), ComplexMatrix::identity(b.dim()));
  h += kron(ComplexMatrix::identity(a.dim()), b.hamiltonian());
  if (coupling != 0.0) h.add_scaled(coupling, kron(v_a, v_b));
  return h;
}

// Neumaier summation on both components.
class CompensatedSum {
 public:
  void add(cd x) {
    add_part(re_, re_c_, x.real());
    add_part(im_, im_c_, x.imag());
  }
  cd value() const { return {re_ + re_c_, im_ + im_c_}; }

 private:
  static void add_part(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double re_ = 0.0, re_c_ = 0.0, im_ = 0.0, im_c_ = 0.0;
};

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > cap / base) {
      std::ostringstream os;
      os << base << "^" << exp << " paths exceed the cap " << cap;
      throw Error(ErrorCode::kPathCapExceeded, os.str());
    }
    out *= base;
  }
  return out;
}

// Number of grid steps at which each deployment falls; GridMisaligned otherwise.
std::vector<std::size_t> deployment_steps(const MeasurementSchedule& schedule, double t0, std::size_t m) {
  if (schedule.size() == 0) throw Error(ErrorCode::kInvalidSchedule, "empty schedule");
  if (m == 0) throw Error(ErrorCode::kGridMisaligned, "grid needs at least one step");
  const double t_end = schedule.entries().back().time;
  if (!(t_end > t0)) throw Error(ErrorCode::kInvalidSchedule, "deployments must follow the initialization");
  const double step = (t_end - t0) / static_cast<double>(m);
  std::vector<std::size_t> out;
  std::size_t prev = 0;
  for (const auto& e : schedule.entries()) {
    const double x = (e.time - t0) / step;
    const double k = std::round(x);
    if (std::abs(x - k) > 1e-9 * std::max(1.0, x) || k <= static_cast<double>(prev)) {
      std::ostringstream os;
      os << "deployment at t=" << e.time << " is not on the " << m << "-step grid over [" << t0 << ", " << t_end
         << "]";
      throw Error(ErrorCode::kGridMisaligned, os.str());
    }
    prev = static_cast<std::size_t>(k);
    out.push_back(prev);
  }
  return out;
}

void require_density(const ComplexMatrix& rho, std::size_t dim, const char* what) {
  if (!rho.is_square() || rho.rows() != dim) throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " has wrong size");
  const ComplexMatrix h = require_hermitian(rho);
  if (std::abs(h.trace().real() - 1.0) > Tolerances::kTrace || min_eigenvalue(h) < -Tolerances::kPsd)
    throw Error(ErrorCode::kInvalidState, std::string(what) + " is not a PSD trace-one matrix");
}

// sum_b S(b) x P_B(b) at every grid time.
std::vector<ComplexMatrix> transfer_steps(const CompositeSystem& comp, const BiTrajectoryGrid& grid) {
  const Observable& vb = comp.v_b_observable();
  std::vector<ComplexMatrix> s_of_b;
  for (double v : grid.eigenvalues) s_of_b.push_back(drive_step(comp, v, grid.step));
  std::vector<ComplexMatrix> out;
  out.reserve(grid.times.size());
  for (double s : grid.times) {
    const auto pb = heisenberg_projectors(comp.sys_b(), vb, s - grid.t0);
    ComplexMatrix t(comp.dim_a() * comp.dim_b(), comp.dim_a() * comp.dim_b());
    for (std::size_t b = 0; b < pb.size(); ++b) t += kron(s_of_b[b], pb[b]);
    out.push_back(std::move(t));
  }
  return out;
}

// Applies per-step factors, inserting the measurement projector after the
// step that ends each interval. `step_factor(k)` yields the k-th (0-based) step.
template <typename StepFactor>
ComplexMatrix interval_chain(std::size_t dim, std::size_t m, const std::vector<std::size_t>& ends,
                             const std::vector<ComplexMatrix>& projectors, StepFactor&& step_factor) {
  ComplexMatrix acc = ComplexMatrix::identity(dim);
  std::size_t next = 0;
  for (std::size_t k = 0; k < m; ++k) {
    acc = step_factor(k) * acc;
    if (next < ends.size() && ends[next] == k + 1) {
      acc = projectors[next] * acc;
      ++next;
    }
  }
  return acc;
}

std::vector<ComplexMatrix> selected_projectors(const MeasurementSchedule& schedule, const Sequence& f) {
  const std::size_t n = schedule.size();
  if (f.size() != n) throw Error(ErrorCode::kLengthMismatch, "sequence length does not match schedule");
  std::vector<ComplexMatrix> out;
  for (std::size_t pos = 0; pos < n; ++pos) out.push_back(schedule.entry(pos).observable.projector(f[n - 1 - pos]));
  return out;
}

}  // namespace

CompositeSystem::CompositeSystem(QuantumSystem sys_a, QuantumSystem sys_b, double coupling, ComplexMatrix v_a,
                                 ComplexMatrix v_b)
    : sys_a_(std::move(sys_a)),
      sys_b_(std::move(sys_b)),
      coupling_(coupling),
      v_a_(checked_operator(v_a, sys_a_.dim(), "V_A")),
      v_b_(checked_operator(v_b, sys_b_.dim(), "V_B")),
      total_(total_hamiltonian(sys_a_, sys_b_, coupling_, v_a_, v_b_)),
      v_b_observable_(observable_from_matrix(sys_b_, v_b_, "V_B")) {
  if (!std::isfinite(coupling_)) throw Error(ErrorCode::kNonFinite, "coupling is not finite");
}

std::vector<double> CompositeSystem::v_b_eigenvalues() const {
  std::vector<double> out;
  for (const auto& v : v_b_observable_.values()) out.push_back(*v);
  return out;
}

CompositeSystem compose(const QuantumSystem& sys_a, const QuantumSystem& sys_b, double coupling,
                        const ComplexMatrix& v_a, const ComplexMatrix& v_b) {
  return CompositeSystem(sys_a, sys_b, coupling, v_a, v_b);
}

Observable lift_to_a(const Observable& obs, std::size_t dim_b) {
  std::vector<ComplexMatrix> proj;
  const ComplexMatrix id = ComplexMatrix::identity(dim_b);
  for (const auto& p : obs.projectors()) proj.push_back(kron(p, id));
  return Observable(obs.name(), obs.labels(), obs.values(), std::move(proj));
}

Observable product_observable(const Observable& obs_a, const Observable& obs_b) {
  std::vector<std::string> labels;
  std::vector<std::optional<double>> values;
  std::vector<ComplexMatrix> proj;
  for (std::size_t a = 0; a < obs_a.size(); ++a)
    for (std::size_t b = 0; b < obs_b.size(); ++b) {
      labels.push_back("(" + obs_a.labels()[a] + "," + obs_b.labels()[b] + ")");
      values.push_back(std::nullopt);
      proj.push_back(kron(obs_a.projector(a), obs_b.projector(b)));
    }
  return Observable(obs_a.name() + "*" + obs_b.name(), std::move(labels), std::move(values), std::move(proj));
}

ComplexMatrix product_metric(const CompositeSystem& comp, const InitializationEvent& init_a,
                             const InitializationEvent& init_b) {
  if (init_a.time() != init_b.time())
    throw Error(ErrorCode::kInvalidSchedule, "subsystem initializations at different times");
  const ComplexMatrix rho = kron(init_a.reference_metric(), init_b.reference_metric());
  if (rho.rows() != comp.total().dim()) throw Error(ErrorCode::kDimensionMismatch, "initializations do not match");
  const ComplexMatrix u = evolution(comp.total(), init_a.time(), 0.0);
  return u.adjoint() * rho * u;
}

FactorizationResult factorization_deviation(const CompositeSystem& comp, const ComplexMatrix& metric_ab,
                                            const ComplexMatrix& metric_a, const ComplexMatrix& metric_b,
                                            const MeasurementSchedule& schedule_a,
                                            const MeasurementSchedule& schedule_b) {
  if (schedule_a.size() != schedule_b.size())
    throw Error(ErrorCode::kLengthMismatch, "A and B schedules differ in length");
  std::vector<MeasurementSchedule::Entry> joint;
  for (std::size_t i = 0; i < schedule_a.size(); ++i) {
    if (schedule_a.entry(i).time != schedule_b.entry(i).time)
      throw Error(ErrorCode::kInvalidSchedule, "paired deployments must share times");
    joint.push_back({schedule_a.entry(i).time,
                     product_observable(schedule_a.entry(i).observable, schedule_b.entry(i).observable)});
  }
  const MeasurementSchedule schedule_ab(schedule_a.t0(), std::move(joint));
  const BiProbabilityTable q_ab(comp.total(), metric_ab, schedule_ab);
  const BiProbabilityTable q_a(comp.sys_a(), metric_a, schedule_a);
  const BiProbabilityTable q_b(comp.sys_b(), metric_b, schedule_b);
  const ScheduleProjectors& pab = q_ab.projectors();
  const std::size_t n = schedule_ab.size();

  const auto split = [&](const Sequence& f, Sequence& fa, Sequence& fb) {
    fa.resize(n);
    fb.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Positions are time-ordered; f[i] belongs to deployment n-1-i.
      const std::size_t nb = schedule_b.entry(n - 1 - i).observable.size();
      fa[i] = f[i] / nb;
      fb[i] = f[i] % nb;
    }
  };
  FactorizationResult out;
  Sequence ap, am, bp, bm;
  q_ab.for_each([&](std::size_t p, std::size_t m, cd value) {
    split(pab.decode(p), ap, bp);
    split(pab.decode(m), am, bm);
    out.deviation = std::max(out.deviation, std::abs(value - q_a.value(ap, am) * q_b.value(bp, bm)));
  });
  const ComplexMatrix marginal_product = kron(metric_a, metric_b);
  out.applicable = max_abs_diff(metric_ab, marginal_product) <= 1e-10;
  return out;
}

double factorization_check(const CompositeSystem& comp, const InitializationEvent& init_a,
                           const InitializationEvent& init_b, const MeasurementSchedule& schedule_a,
                           const MeasurementSchedule& schedule_b) {
  if (comp.coupling() != 0.0) {
    std::ostringstream os;
    os << "factorization needs lambda = 0, got " << comp.coupling();
    throw Error(ErrorCode::kCouplingNonzero, os.str());
  }
  return factorization_deviation(comp, product_metric(comp, init_a, init_b), init_a.metric(), init_b.metric(),
                                 schedule_a, schedule_b)
      .deviation;
}

MomentForms moment_forms(const QuantumSystem& sys, const ComplexMatrix& metric, const std::vector<double>& times,
                         const std::vector<ComplexMatrix>& operators, const std::vector<std::size_t>& i_plus,
                         const std::vector<std::size_t>& i_minus) {
  const std::size_t n = times.size();
  if (operators.size() != n) throw Error(ErrorCode::kLengthMismatch, "one operator per time is required");
  const auto as_set = [n](const std::vector<std::size_t>& idx) {
    std::set<std::size_t> s;
    for (std::size_t j : idx) {
      if (j < 1 || j > n || !s.insert(j).second) {
        std::ostringstream os;
        os << "split index " << j << " is out of [1, " << n << "] or repeated";
        throw Error(ErrorCode::kBadSplit, os.str());
      }
    }
    return s;
  };
  const std::set<std::size_t> plus = as_set(i_plus);
  const std::set<std::size_t> minus = as_set(i_minus);
  std::vector<ComplexMatrix> ops;
  for (const auto& f : operators) ops.push_back(checked_operator(f, sys.dim(), "operator"));
  if (n == 0) return {metric.trace(), metric.trace()};

  const auto ordered_moment = [&](const std::set<std::size_t>& idx) {
    ComplexMatrix acc = ComplexMatrix::identity(sys.dim());
    for (std::size_t j : idx) {
      const ComplexMatrix u = evolution(sys, times[j - 1], 0.0);
      acc = u.adjoint() * ops[j - 1] * u * acc;
    }
    return acc;
  };
  MomentForms out;
  out.direct = trace_with_adjoint(ordered_moment(plus) * metric, ordered_moment(minus));

  std::vector<MeasurementSchedule::Entry> entries;
  for (std::size_t j = 0; j < n; ++j)
    entries.push_back({times[j], observable_from_matrix(sys, ops[j], "F" + std::to_string(j + 1))});
  const MeasurementSchedule schedule(times.front() - 1.0, entries);
  const BiProbabilityTable table(sys, metric, schedule);
  const ScheduleProjectors& proj = table.projectors();
  const auto weight = [&](const Sequence& f, const std::set<std::size_t>& idx) {
    double w = 1.0;
    for (std::size_t j : idx) w *= *entries[j - 1].observable.values()[f[n - j]];
    return w;
  };
  CompensatedSum sum;
  table.for_each([&](std::size_t p, std::size_t m, cd value) {
    sum.add(value * weight(proj.decode(p), plus) * weight(proj.decode(m), minus));
  });
  out.path_sum = sum.value();
  return out;
}

double moments_identity_check(const QuantumSystem& sys_b, const ComplexMatrix& v_b, const ComplexMatrix& rho_b,
                              const std::vector<double>& times, const std::vector<std::size_t>& i_plus,
                              const std::vector<std::size_t>& i_minus) {
  const MomentForms f =
      moment_forms(sys_b, rho_b, times, std::vector<ComplexMatrix>(times.size(), v_b), i_plus, i_minus);
  return std::abs(f.direct - f.path_sum);
}

double moments_identity_check(const CompositeSystem& comp, const ComplexMatrix& rho_b,
                              const std::vector<double>& times, const std::vector<std::size_t>& i_plus,
                              const std::vector<std::size_t>& i_minus) {
  return moments_identity_check(comp.sys_b(), comp.v_b(), rho_b, times, i_plus, i_minus);
}

cd reduced_biprob_exact(const CompositeSystem& comp, const InitializationEvent& init_a,
                        const InitializationEvent& init_b, const MeasurementSchedule& schedule_a,
                        const Sequence& f_plus, const Sequence& f_minus) {
  std::vector<MeasurementSchedule::Entry> lifted;
  for (const auto& e : schedule_a.entries()) lifted.push_back({e.time, lift_to_a(e.observable, comp.dim_b())});
  const MeasurementSchedule schedule(schedule_a.t0(), std::move(lifted));
  return biprob(comp.total(), product_metric(comp, init_a, init_b), schedule, f_plus, f_minus);
}

BiTrajectoryGrid make_grid(const CompositeSystem& comp, double t0, double t_end, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::kGridMisaligned, "grid needs at least one step");
  if (!(t_end >= t0)) throw Error(ErrorCode::kInvalidSchedule, "grid end precedes its start");
  BiTrajectoryGrid g;
  g.t0 = t0;
  g.step = (t_end - t0) / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) g.times.push_back(t0 + (static_cast<double>(k) + 0.5) * g.step);
  g.eigenvalues = comp.v_b_eigenvalues();
  return g;
}

BiProbabilityTable grid_weights(const CompositeSystem& comp, const ComplexMatrix& rho_b, const BiTrajectoryGrid& grid,
                                std::size_t path_cap) {
  checked_power(grid.eigenvalues.size(), 2 * grid.times.size(), path_cap);
  std::vector<MeasurementSchedule::Entry> entries;
  for (double s : grid.times) entries.push_back({s - grid.t0, comp.v_b_observable()});
  const MeasurementSchedule schedule(0.0, std::move(entries));
  return BiProbabilityTable(comp.sys_b(), rho_b, schedule, path_cap);
}

ComplexMatrix drive_step(const CompositeSystem& comp, double v, double dt) {
  const ComplexMatrix free = evolution(comp.sys_a(), dt, 0.0);
  if (comp.coupling() == 0.0 || v == 0.0) return free;
  return expm_hermitian_phase(comp.v_a(), dt * comp.coupling() * v) * free;
}

cd surrogate_biprob(const CompositeSystem& comp, const InitializationEvent& init_a,
                    const InitializationEvent& init_b, const MeasurementSchedule& schedule_a,
                    const Sequence& f_plus, const Sequence& f_minus, std::size_t grid_steps, PathSumRoute route,
                    std::size_t path_cap) {
  if (init_a.time() != init_b.time())
    throw Error(ErrorCode::kInvalidSchedule, "subsystem initializations at different times");
  const double t0 = init_a.time();
  const std::vector<std::size_t> ends = deployment_steps(schedule_a, t0, grid_steps);
  const BiTrajectoryGrid grid = make_grid(comp, t0, schedule_a.entries().back().time, grid_steps);
  const std::vector<ComplexMatrix> proj_plus = selected_projectors(schedule_a, f_plus);
  const std::vector<ComplexMatrix> proj_minus = selected_projectors(schedule_a, f_minus);
  const ComplexMatrix& rho_a = init_a.reference_metric();
  const ComplexMatrix& rho_b = init_b.reference_metric();
  const std::size_t da = comp.dim_a();
  const std::size_t m = grid_steps;

  if (route == PathSumRoute::kTransfer) {
    const std::vector<ComplexMatrix> steps = transfer_steps(comp, grid);
    const ComplexMatrix id_b = ComplexMatrix::identity(comp.dim_b());
    const auto lift = [&](const std::vector<ComplexMatrix>& p) {
      std::vector<ComplexMatrix> out;
      for (const auto& x : p) out.push_back(kron(x, id_b));
      return out;
    };
    const auto step_at = [&](std::size_t k) -> const ComplexMatrix& { return steps[k]; };
    const ComplexMatrix fp = interval_chain(da * comp.dim_b(), m, ends, lift(proj_plus), step_at);
    const ComplexMatrix fm = interval_chain(da * comp.dim_b(), m, ends, lift(proj_minus), step_at);
    return trace_with_adjoint(fp * kron(rho_a, rho_b), fm);
  }

  const BiProbabilityTable weights = grid_weights(comp, rho_b, grid, path_cap);
  const ScheduleProjectors& bproj = weights.projectors();
  std::vector<ComplexMatrix> s_of_b;
  for (double v : grid.eigenvalues) s_of_b.push_back(drive_step(comp, v, grid.step));
  // F(b) for every B path, indexed like the weight table.
  std::vector<ComplexMatrix> f_p, f_m;
  f_p.reserve(bproj.sequence_count());
  f_m.reserve(bproj.sequence_count());
  for (std::size_t idx = 0; idx < bproj.sequence_count(); ++idx) {
    const Sequence b = bproj.decode(idx);
    const auto step_at = [&](std::size_t k) -> const ComplexMatrix& { return s_of_b[b[m - 1 - k]]; };
    f_p.push_back(interval_chain(da, m, ends, proj_plus, step_at) * rho_a);
    f_m.push_back(interval_chain(da, m, ends, proj_minus, step_at));
  }
  CompensatedSum sum;
  weights.for_each([&](std::size_t p, std::size_t q, cd w) { sum.add(trace_with_adjoint(f_p[p], f_m[q]) * w); });
  return sum.value();
}

cd driven_closed_biprob(const CompositeSystem& comp, const std::function<double(double)>& drive,
                        const InitializationEvent& init_a, const MeasurementSchedule& schedule_a,
                        const Sequence& f_plus, const Sequence& f_minus, std::size_t grid_steps) {
  const double t0 = init_a.time();
  const std::vector<std::size_t> ends = deployment_steps(schedule_a, t0, grid_steps);
  const double step = (schedule_a.entries().back().time - t0) / static_cast<double>(grid_steps);
  std::vector<ComplexMatrix> steps;
  for (std::size_t k = 0; k < grid_steps; ++k)
    steps.push_back(drive_step(comp, drive(t0 + (static_cast<double>(k) + 0.5) * step), step));
  const auto step_at = [&](std::size_t k) -> const ComplexMatrix& { return steps[k]; };
  const ComplexMatrix fp =
      interval_chain(comp.dim_a(), grid_steps, ends, selected_projectors(schedule_a, f_plus), step_at);
  const ComplexMatrix fm =
      interval_chain(comp.dim_a(), grid_steps, ends, selected_projectors(schedule_a, f_minus), step_at);
  return trace_with_adjoint(fp * init_a.reference_metric(), fm);
}

ComplexMatrix apply_superop(const ComplexMatrix& superop, const ComplexMatrix& x) {
  const std::size_t d = x.rows();
  if (superop.rows() != d * d || superop.cols() != d * d)
    throw Error(ErrorCode::kDimensionMismatch, "superoperator does not act on this operator");
  ComplexMatrix out(d, d);
  for (std::size_t r = 0; r < d * d; ++r) {
    cd acc = 0.0;
    for (std::size_t c = 0; c < d * d; ++c) acc += superop(r, c) * x.data()[c];
    out.data()[r] = acc;
  }
  return out;
}

namespace {

// Lambda(X) = tr_B[W (X x rho_B) W^dagger] as a superoperator.
ComplexMatrix reduced_superop(const ComplexMatrix& w, const ComplexMatrix& rho_b, std::size_t da, std::size_t db) {
  ComplexMatrix s(da * da, da * da);
  const ComplexMatrix w_dag = w.adjoint();
  for (std::size_t k = 0; k < da; ++k)
    for (std::size_t l = 0; l < da; ++l) {
      ComplexMatrix e(da, da);
      e(k, l) = 1.0;
      const ComplexMatrix out = partial_trace_b(w * kron(e, rho_b) * w_dag, da, db);
      for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j) s(i * da + j, k * da + l) = out(i, j);
    }
  return s;
}

}  // namespace

ComplexMatrix dynamical_map_exact(const CompositeSystem& comp, const ComplexMatrix& rho_b, double t) {
  require_density(rho_b, comp.dim_b(), "rho_B");
  return reduced_superop(evolution(comp.total(), t, 0.0), rho_b, comp.dim_a(), comp.dim_b());
}

ComplexMatrix dynamical_map_path_sum(const CompositeSystem& comp, const ComplexMatrix& rho_b, double t,
                                     std::size_t grid_steps, PathSumRoute route, std::size_t path_cap) {
  require_density(rho_b, comp.dim_b(), "rho_B");
  const BiTrajectoryGrid grid = make_grid(comp, 0.0, t, grid_steps);
  const std::size_t da = comp.dim_a();
  const std::size_t m = grid_steps;
  if (route == PathSumRoute::kTransfer) {
    const std::vector<ComplexMatrix> steps = transfer_steps(comp, grid);
    const ComplexMatrix w = ordered_product(steps, ProductOrder::kReverse, da * comp.dim_b());
    return reduced_superop(w, rho_b, da, comp.dim_b());
  }
  const BiProbabilityTable weights = grid_weights(comp, rho_b, grid, path_cap);
  const ScheduleProjectors& bproj = weights.projectors();
  std::vector<ComplexMatrix> s_of_b;
  for (double v : grid.eigenvalues) s_of_b.push_back(drive_step(comp, v, grid.step));
  std::vector<ComplexMatrix> g, g_conj;
  for (std::size_t idx = 0; idx < bproj.sequence_count(); ++idx) {
    const Sequence b = bproj.decode(idx);
    ComplexMatrix acc = ComplexMatrix::identity(da);
    for (std::size_t k = 0; k < m; ++k) acc = s_of_b[b[m - 1 - k]] * acc;
    ComplexMatrix c = acc;
    for (cd& z : c.data()) z = std::conj(z);
    g.push_back(std::move(acc));
    g_conj.push_back(std::move(c));
  }
  // vec(G+ X G-^dagger) = (G+ x conj(G-)) vec(X)
  std::vector<CompensatedSum> sums(da * da * da * da);
  weights.for_each([&](std::size_t p, std::size_t q, cd w) {
    const ComplexMatrix term = kron(g[p], g_conj[q]);
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i].add(term.data()[i] * w);
  });
  ComplexMatrix s(da * da, da * da);
  for (std::size_t i = 0; i < sums.size(); ++i) s.data()[i] = sums[i].value();
  return s;
}

ComplexMatrix choi_matrix(const ComplexMatrix& superop) {
  const std::size_t n = superop.rows();
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (!superop.is_square() || d * d != n || d == 0) {
    std::ostringstream os;
    os << "superoperator of shape " << superop.rows() << "x" << superop.cols() << " is not d^2 x d^2";
    throw Error(ErrorCode::kBadDimension, os.str());
  }
  ComplexMatrix c(n, n);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) c(k * d + i, l * d + j) = superop(i * d + j, k * d + l);
  return c;
}

ChoiCheck choi_cptp_check(const ComplexMatrix& superop) {
  const ComplexMatrix c = choi_matrix(superop);
  const std::size_t n = superop.rows();
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  ComplexMatrix herm = c + c.adjoint();
  herm *= 0.5;
  ChoiCheck out;
  out.min_choi_eig = eig_hermitian(herm).values.front();
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) {
      cd tr = 0.0;
      for (std::size_t i = 0; i < d; ++i) tr += superop(i * d + i, k * d + l);
      out.trace_dev = std::max(out.trace_dev, std::abs(tr - (k == l ? cd(1.0) : cd(0.0))));
    }
  return out;
}

std::vector<ConvergenceRow> convergence_table(const std::vector<std::size_t>& steps,
                                              const std::function<double(std::size_t)>& error_at) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t m : steps) {
    ConvergenceRow r;
    r.m = m;
    r.abs_error = error_at(m);
    if (!rows.empty() && rows.back().abs_error > 0.0) r.ratio_vs_previous = r.abs_error / rows.back().abs_error;
    rows.push_back(r);
  }
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "m,abs_error,ratio_vs_previous\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.m << "," << r.abs_error << ",";
    if (r.ratio_vs_previous) os << *r.ratio_vs_previous;
    os << "\n";
  }
}

}  // namespace bitraj
