#include "bitraj/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "bitraj/biprob.hpp"
#include "bitraj/composite.hpp"
#include "bitraj/errors.hpp"
#include "bitraj/master.hpp"
#include "bitraj/random.hpp"
#include "bitraj/witnesses.hpp"
#include "json.hpp"

namespace bitraj {

namespace {

using nlohmann::ordered_json;

ExperimentReport equality(std::string name, double deviation, double threshold) {
  return make_report(std::move(name), deviation, threshold, CheckKind::kEquality);
}

std::string suffix(const std::string& base, std::size_t d, std::size_t n) {
  return base + "/d" + std::to_string(d) + "_n" + std::to_string(n);
}

MeasurementSchedule random_schedule(InstanceGenerator& gen, std::size_t d, std::size_t n, bool fine_only) {
  std::vector<MeasurementSchedule::Entry> entries;
  double t = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    t += gen.uniform(0.2, 1.5);
    const std::string name = "F" + std::to_string(j + 1);
    const bool coarse = !fine_only && d > 2 && j % 2 == 1;
    entries.push_back({t, coarse ? gen.coarse_observable(d, d - 1, name) : gen.fine_observable(d, name)});
  }
  return MeasurementSchedule(0.0, std::move(entries));
}

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < n; ++j)
      if (mask & (std::size_t{1} << j)) s.push_back(j + 1);
    out.push_back(std::move(s));
  }
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorCode::kSchemaError, "cannot write " + tmp.string());
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

// Monotone trend of the survival over the doubling ladder 1, 2, 4, ... up to n.
ExperimentReport zeno_report(std::string name, const QuantumSystem& sys, const Observable& k, std::size_t k0,
                             double total_t, std::size_t n, double tol) {
  double worst_drop = 0.0;
  double prev = zeno_experiment(sys, k, k0, total_t, 1);
  for (std::size_t m = 2; m <= n; m *= 2) {
    const double cur = zeno_experiment(sys, k, k0, total_t, m);
    worst_drop = std::max(worst_drop, prev - cur);
    prev = cur;
  }
  ExperimentReport r = equality(std::move(name), std::max(0.0, worst_drop), tol);
  r.value = zeno_experiment(sys, k, k0, total_t, n);
  return r;
}

std::vector<ExperimentReport> placement_reports(const std::string& name, const QuantumSystem& sys,
                                                const InitializationEvent& init, const MeasurementSchedule& schedule,
                                                std::size_t position, const Resolution& res, double tol,
                                                double violation) {
  const PlacementDeviation d = coarse_grain_placement_experiment(sys, init, schedule, position, res);
  std::vector<ExperimentReport> out{equality(name + "/terminal", d.terminal_dev, tol)};
  if (d.interior_dev)
    out.push_back(make_report(name + "/interior", *d.interior_dev, violation, CheckKind::kViolation));
  return out;
}

// Ratio band [0.3, 0.7] for successive doublings; deviation is the distance
// of the worst ratio from the band.
ExperimentReport convergence_report(std::string name, const std::vector<ConvergenceRow>& rows) {
  double dev = 0.0;
  for (const auto& r : rows)
    if (r.ratio_vs_previous) dev = std::max({dev, 0.3 - *r.ratio_vs_previous, *r.ratio_vs_previous - 0.7});
  ExperimentReport rep = equality(std::move(name), dev, 0.0);
  for (const auto& r : rows) rep.witness.push_back({"error_m" + std::to_string(r.m), r.abs_error});
  return rep;
}

std::vector<std::size_t> doubling_ladder(std::size_t top) {
  std::vector<std::size_t> out;
  for (std::size_t m = 8; m <= std::max<std::size_t>(top, 16); m *= 2) out.push_back(m);
  return out;
}

double surrogate_error(const witness::CoupledPair& w, std::size_t m) {
  const ScheduleProjectors proj(w.comp.sys_a(), w.schedule_a);
  double err = 0.0;
  for (std::size_t p = 0; p < proj.sequence_count(); ++p)
    for (std::size_t q = 0; q < proj.sequence_count(); ++q) {
      const Sequence fp = proj.decode(p), fm = proj.decode(q);
      const cd exact = reduced_biprob_exact(w.comp, w.init_a, w.init_b, w.schedule_a, fp, fm);
      const cd approx = surrogate_biprob(w.comp, w.init_a, w.init_b, w.schedule_a, fp, fm, m);
      err = std::max(err, std::abs(exact - approx));
    }
  return err;
}

double map_error(const witness::CoupledPair& w, double t, std::size_t m) {
  const ComplexMatrix& rho_b = w.init_b.reference_metric();
  return max_abs_diff(dynamical_map_exact(w.comp, rho_b, t), dynamical_map_path_sum(w.comp, rho_b, t, m));
}

}  // namespace

bool SuiteReport::all_passed() const {
  return std::all_of(experiments.begin(), experiments.end(), [](const auto& e) { return e.passed; });
}

std::string SuiteReport::to_json() const {
  std::vector<const ExperimentReport*> sorted;
  for (const auto& e : experiments) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->name < b->name; });
  ordered_json root;
  root["rng"] = std::string(kRngAlgorithm);
  root["seed"] = seed;
  root["experiments"] = ordered_json::array();
  for (const auto* e : sorted) {
    ordered_json j;
    j["name"] = e->name;
    j["deviation"] = e->deviation;
    j["threshold"] = e->threshold;
    j["type"] = std::string(check_kind_name(e->kind));
    j["passed"] = e->passed;
    if (e->value) j["value"] = *e->value;
    if (!e->witness.empty()) {
      ordered_json w = ordered_json::object();
      for (const auto& [k, v] : e->witness) w[k] = v;
      j["witness"] = w;
    }
    root["experiments"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

SuiteReport run_check_suite(std::uint64_t seed, std::size_t dim, const ConfigTolerances& tol) {
  if (dim < 2) throw Error(ErrorCode::kBadDimension, "suite dimension must be at least 2");
  SuiteReport rep;
  rep.seed = seed;
  auto& out = rep.experiments;
  InstanceGenerator gen(seed);
  const double eq = tol.equality;

  for (std::size_t n = 1; n <= 3; ++n) {
    const QuantumSystem sys(gen.hermitian(dim));
    const InitializationEvent init = gen.initialization(sys, 0.0);
    const MeasurementSchedule schedule = random_schedule(gen, dim, n, false);
    const BiProbabilityTable table(sys, init.metric(), schedule);
    const TableInvariants inv = table_invariants(table);
    out.push_back(equality(suffix("q1_normalization", dim, n), inv.normalization, eq));
    out.push_back(equality(suffix("q7_measurement_link", dim, n), inv.measurement_link, eq));
    out.push_back(equality(suffix("hermitian_pairing", dim, n), inv.hermitian_pairing, eq));
    const GudderMetric g = check_positivity(table, std::numeric_limits<double>::infinity());
    out.push_back(equality(suffix("q4_positivity", dim, n), std::max(0.0, -g.min_eigenvalue), tol.psd));
    if (n >= 2) {
      out.push_back(equality(suffix("q2_causality", dim, n),
                             causality_experiment(sys, init, schedule, eq).deviation, eq));
      double q5 = 0.0;
      for (std::size_t j = 1; j < n; ++j) q5 = std::max(q5, check_bi_consistency(table, j));
      out.push_back(equality(suffix("q5_bi_consistency", dim, n), q5, eq));
    }
    std::vector<std::optional<Resolution>> res;
    for (const auto& e : schedule.entries()) res.emplace_back(gen.resolution(e.observable));
    out.push_back(equality(suffix("q8_additivity", dim, n), check_additivity(sys, init, schedule, res), eq));
  }

  {
    const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(2));
    const CompositeSystem comp = compose(a, b, 0.0, gen.hermitian(2), gen.hermitian(2));
    const InitializationEvent ia = gen.initialization(a, 0.0), ib = gen.initialization(b, 0.0);
    const MeasurementSchedule sa = random_schedule(gen, 2, 2, true);
    std::vector<MeasurementSchedule::Entry> eb;
    for (const auto& e : sa.entries()) eb.push_back({e.time, gen.fine_observable(2, "G")});
    const MeasurementSchedule sb(0.0, std::move(eb));
    out.push_back(equality("q3_factorization/d2x2_n2", factorization_check(comp, ia, ib, sa, sb), eq));
  }

  {
    const QuantumSystem sys(gen.hermitian(dim));
    const InitializationEvent init = gen.initialization(sys, 0.0);
    out.push_back(equality(suffix("markov", dim, 3),
                           markov_experiment(sys, init, random_schedule(gen, dim, 3, true), eq).deviation, eq));
    const Observable k = gen.fine_observable(dim, "K");
    const ExperimentReport st = statics_equivalence(sys, init, k, 1.3, std::max(eq, 1e-12));
    out.push_back(equality(suffix("statics_equivalence", dim, 1), st.deviation, std::max(eq, 1e-12)));
    const auto c = uncertainty_correlation(sys, k, gen.fine_observable(dim, "L"), 0.7);
    double ds = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        row += c[i][j];
        col += c[j][i];
      }
      ds = std::max({ds, std::abs(row - 1.0), std::abs(col - 1.0)});
    }
    out.push_back(equality(suffix("uncertainty_doubly_stochastic", dim, 1), ds, eq));
  }

  {
    const std::size_t db = std::min<std::size_t>(dim, 3);
    const QuantumSystem b(gen.hermitian(db));
    const ComplexMatrix vb = gen.hermitian(db);
    const ComplexMatrix rho = gen.density(db);
    const std::vector<double> times{0.3, 0.9, 1.6};
    double dev = 0.0;
    for (const auto& ip : all_subsets(times.size()))
      for (const auto& im : all_subsets(times.size()))
        dev = std::max(dev, moments_identity_check(b, vb, rho, times, ip, im));
    out.push_back(equality("moments_identity/d" + std::to_string(db) + "_n3", dev, eq));
  }

  {
    double tp = 0.0, choi = 0.0;
    for (int i = 0; i < 5; ++i) {
      const QuantumSystem a(gen.hermitian(2)), b(gen.hermitian(2));
      const CompositeSystem comp = compose(a, b, gen.uniform(-2.0, 2.0), gen.hermitian(2), gen.hermitian(2));
      const ChoiCheck c = choi_cptp_check(dynamical_map_exact(comp, gen.density(2), gen.uniform(0.0, 2.0)));
      tp = std::max(tp, c.trace_dev);
      choi = std::max(choi, -c.min_choi_eig);
    }
    out.push_back(equality("dynamical_map_trace/d2x2", tp, eq));
    out.push_back(equality("dynamical_map_choi/d2x2", std::max(0.0, choi), 1e-9));
  }

  {
    const QuantumSystem sys(gen.hermitian(dim));
    const InitializationEvent init = gen.initialization(sys, 0.0);
    const MeasurementSchedule schedule = random_schedule(gen, dim, 2, false);
    const ScheduleProjectors proj(sys, schedule);
    double dev = 0.0;
    for (std::size_t p = 0; p < proj.sequence_count(); ++p)
      for (std::size_t m = 0; m < proj.sequence_count(); ++m)
        dev = std::max(dev, decomposition_check(sys, init, schedule, proj.decode(p), proj.decode(m)));
    out.push_back(equality(suffix("decomposition", dim, 2), dev, eq));

    const std::vector<double> times{0.4, 1.1};
    const std::vector<ComplexMatrix> ops{gen.hermitian(dim), gen.hermitian(dim)};
    double mtc = 0.0;
    for (const auto& ip : all_subsets(2))
      for (const auto& im : all_subsets(2))
        mtc = std::max(mtc, std::abs(multitime_correlation(sys, init, times, ops, ip, im) -
                                     multitime_correlation_moments(sys, init, times, ops, ip, im)));
    out.push_back(equality(suffix("multitime_correlation", dim, 2), mtc, eq));

    const GeneratorBasis basis = generator_basis(dim);
    const Observable fine = gen.fine_observable(dim, "R");
    const Observable degenerate = gen.coarse_observable(dim, dim - 1, "D");
    const double rt = std::max(round_trip_residual(basis, fine, observable_to_coords(basis, fine)),
                               round_trip_residual(basis, degenerate, observable_to_coords(basis, degenerate)));
    out.push_back(equality(suffix("coords_round_trip", dim, 1), rt, 1e-9));
  }

  {
    // Dynamics, devices and initialization all diagonal in one basis.
    const ComplexMatrix u = gen.unitary(dim);
    std::vector<double> energies(dim);
    for (double& e : energies) e = gen.normal();
    const QuantumSystem sys(u * ComplexMatrix::diagonal(energies) * u.adjoint());
    const Observable k = observable_from_matrix(sys, sys.hamiltonian(), "E");
    std::vector<InitializationEvent::Component> comps;
    const std::vector<double> w = gen.weights(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) comps.push_back({k, i, w[i]});
    const InitializationEvent init(sys, 0.0, std::move(comps));
    const ClassicalLimit cl = classical_limit_witness(sys, init, k, {0.5, 1.0, 1.5});
    out.push_back(equality(suffix("classical_offdiag_mass", dim, 3), cl.offdiag_mass, std::max(eq, 1e-12)));
    out.push_back(equality(suffix("classical_consistency", dim, 3), cl.consistency_dev, std::max(eq, 1e-12)));
    const MeasurementSchedule s = random_schedule(gen, dim, 2, false);
    out.push_back(equality(suffix("stationarity_shift", dim, 2), stationarity_shift_deviation(sys, init, s, 0.37), eq));
  }
  return rep;
}

std::vector<ExperimentReport> run_configured(const RunConfig& cfg, const ExperimentSpec& spec,
                                             std::optional<std::size_t> n_override) {
  const QuantumSystem& sys = *cfg.system;
  const double eq = spec.threshold.value_or(cfg.tolerances.equality);
  const double viol = spec.threshold.value_or(kViolationThreshold);
  switch (spec.type) {
    case ExperimentType::kCausality: {
      ExperimentReport r = causality_experiment(sys, *cfg.initialization, cfg.schedule(spec.schedule), eq);
      r.name = spec.name;
      return {r};
    }
    case ExperimentType::kInconsistency: {
      ExperimentReport r =
          inconsistency_witness(sys, *cfg.initialization, cfg.schedule(spec.schedule), spec.position, viol);
      r.name = spec.name;
      return {r};
    }
    case ExperimentType::kMarkov: {
      ExperimentReport r = markov_experiment(sys, *cfg.initialization, cfg.schedule(spec.schedule), eq);
      r.name = spec.name;
      return {r};
    }
    case ExperimentType::kZeno:
      return {zeno_report(spec.name, sys, cfg.observable(spec.observable), spec.outcome, spec.total_time,
                          n_override.value_or(spec.n), eq)};
    case ExperimentType::kCoarsePlacement: {
      const MeasurementSchedule& s = cfg.schedule(spec.schedule);
      const Observable& target = s.entry(spec.position - 1).observable;
      const Resolution res = spec.cells.empty() ? Resolution::full_blur(target) : Resolution(target, spec.cells);
      return placement_reports(spec.name, sys, *cfg.initialization, s, spec.position, res,
                               cfg.tolerances.equality, viol);
    }
    case ExperimentType::kStatics: {
      ExperimentReport r = statics_equivalence(sys, *cfg.initialization, cfg.observable(spec.observable), spec.time,
                                               spec.threshold.value_or(1e-12));
      r.name = spec.name;
      return {r};
    }
    case ExperimentType::kShortTime: {
      ExperimentReport r = short_time_expansion(sys, cfg.observable(spec.observable), spec.outcome, spec.time,
                                                spec.dt, spec.threshold.value_or(0.01));
      r.name = spec.name;
      return {r};
    }
    case ExperimentType::kClassicalLimit: {
      const ClassicalLimit cl = classical_limit_witness(sys, *cfg.initialization, cfg.schedule(spec.schedule));
      return {equality(spec.name + "/offdiag_mass", cl.offdiag_mass, eq),
              equality(spec.name + "/consistency", cl.consistency_dev, eq)};
    }
  }
  throw Error(ErrorCode::kUnknownExperiment, spec.name);
}

std::vector<std::string> builtin_experiments() {
  return {"causality", "coarse_placement", "inconsistency",        "map_convergence",
          "short_time", "surrogate_convergence", "transpose_control", "zeno"};
}

namespace {

struct BuiltinResult {
  std::vector<ExperimentReport> reports;
  std::string csv;  // convergence table, if any
};

BuiltinResult run_builtin(const std::string& name, const RunOptions& opt, const ConfigTolerances& tol) {
  BuiltinResult out;
  if (name == "zeno") {
    const auto w = witness::zeno_qubit();
    out.reports.push_back(zeno_report("zeno", w.sys, witness::qubit_z(), 1, 1.0, opt.n.value_or(100), tol.equality));
  } else if (name == "inconsistency") {
    const auto w = witness::two_slit();
    out.reports.push_back(inconsistency_witness(w.sys, w.init, w.schedule, 1));
  } else if (name == "causality") {
    const auto w = witness::two_slit();
    out.reports.push_back(causality_experiment(w.sys, w.init, w.schedule, tol.equality));
  } else if (name == "coarse_placement") {
    const auto w = witness::two_slit();
    out.reports = placement_reports("coarse_placement", w.sys, w.init, w.schedule, 1,
                                    Resolution::full_blur(witness::qubit_x()), tol.equality, kViolationThreshold);
  } else if (name == "short_time") {
    const auto w = witness::zeno_qubit();
    out.reports.push_back(short_time_expansion(w.sys, witness::qubit_z(), 1, 0.0, 1e-3));
  } else if (name == "surrogate_convergence" || name == "map_convergence") {
    const auto w = witness::dephasing();
    const bool map = name == "map_convergence";
    const auto rows = convergence_table(doubling_ladder(opt.grid.value_or(64)), [&](std::size_t m) {
      return map ? map_error(w, 1.0, m) : surrogate_error(w, m);
    });
    std::ostringstream csv;
    write_convergence_csv(csv, rows);
    out.csv = csv.str();
    out.reports.push_back(convergence_report(name, rows));
  } else if (name == "transpose_control") {
    const ChoiCheck c = choi_cptp_check(witness::transpose_map(2));
    ExperimentReport r = make_report(name, -c.min_choi_eig, 0.5, CheckKind::kViolation);
    r.value = c.min_choi_eig;
    out.reports.push_back(r);
  } else {
    throw Error(ErrorCode::kUnknownExperiment, "no experiment named \"" + name + "\"");
  }
  return out;
}

void emit(const RunOptions& opt, std::ostream& out, const std::string& file, const std::string& content) {
  if (opt.out_dir) {
    write_atomically(std::filesystem::path(*opt.out_dir) / file, content);
  } else {
    out << content;
  }
}

}  // namespace

int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  ConfigTolerances tol;
  try {
    if (opt.command != "check" && opt.command != "experiment" && opt.command != "table")
      throw Error(ErrorCode::kUnknownCommand, "unknown command \"" + opt.command + "\" (check | experiment | table)");
    if (opt.config_path) cfg = load_config(*opt.config_path);
    tol = cfg.tolerances;
    if (opt.tol_equality) tol.equality = *opt.tol_equality;
    if (opt.tol_psd) tol.psd = *opt.tol_psd;
    cfg.tolerances = tol;
    if (opt.command == "experiment" && !opt.experiment)
      throw Error(ErrorCode::kUnknownExperiment, "experiment needs a name");
    if (opt.command == "table" && (cfg.schedules.empty() || !cfg.initialization))
      throw Error(ErrorCode::kSchemaError, "table needs a config with an initialization and a schedule");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::uint64_t seed = opt.seed.value_or(cfg.seed.value_or(kDefaultSeed));
  try {
    if (opt.command == "table") {
      const BiProbabilityTable table(*cfg.system, cfg.initialization->metric(), cfg.schedules.begin()->second);
      std::ostringstream csv;
      table.write_csv(csv);
      emit(opt, out, "table.csv", csv.str());
      return kExitPass;
    }

    SuiteReport rep;
    rep.seed = seed;
    std::string csv;
    if (opt.command == "check") {
      rep = run_check_suite(seed, opt.dim, tol);
      if (cfg.system)
        for (const auto& spec : cfg.experiments)
          for (auto& r : run_configured(cfg, spec, opt.n)) rep.experiments.push_back(std::move(r));
    } else {
      const std::string& name = *opt.experiment;
      const auto it = std::find_if(cfg.experiments.begin(), cfg.experiments.end(),
                                   [&](const ExperimentSpec& s) { return s.name == name; });
      if (it != cfg.experiments.end()) {
        rep.experiments = run_configured(cfg, *it, opt.n);
      } else {
        try {
          BuiltinResult b = run_builtin(name, opt, tol);
          rep.experiments = std::move(b.reports);
          csv = std::move(b.csv);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kUnknownExperiment) throw;
          err << "error: " << e.what() << "\n";
          return kExitConfigError;
        }
      }
    }
    emit(opt, out, "report.json", rep.to_json());
    if (!csv.empty()) {
      if (opt.out_dir)
        write_atomically(std::filesystem::path(*opt.out_dir) / (*opt.experiment + ".csv"), csv);
      else
        err << csv;
    }
    return rep.all_passed() ? kExitPass : kExitCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace bitraj
