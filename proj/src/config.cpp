#include "bitraj/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bitraj/errors.hpp"
#include "json.hpp"

namespace bitraj {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::kSchemaError, (path.empty() ? "/" : path) + ": " + message);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing \"") + key + "\"");
  return *it;
}

const json* optional_member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "number is not finite");
  return v;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) schema_error(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

std::vector<std::vector<double>> real_grid(const json& j, const std::string& path, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) schema_error(path, "expected " + std::to_string(dim) + " rows");
  std::vector<std::vector<double>> out(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    const std::string row_path = path + "/" + std::to_string(r);
    if (!j[r].is_array() || j[r].size() != dim) schema_error(row_path, "expected " + std::to_string(dim) + " columns");
    for (std::size_t c = 0; c < dim; ++c) out[r].push_back(number(j[r][c], row_path + "/" + std::to_string(c)));
  }
  return out;
}

ComplexMatrix matrix(const json& j, const std::string& path, std::size_t dim) {
  if (!j.is_object()) schema_error(path, "expected {\"re\": [[...]], \"im\": [[...]]}");
  const auto re = real_grid(member(j, path, "re"), path + "/re", dim);
  std::vector<std::vector<double>> im(dim, std::vector<double>(dim, 0.0));
  if (const json* m = optional_member(j, "im")) im = real_grid(*m, path + "/im", dim);
  ComplexMatrix out(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) out(r, c) = cd(re[r][c], im[r][c]);
  return out;
}

// Names the first cell breaking Hermiticity.
void require_hermitian_cells(const ComplexMatrix& m, const std::string& path) {
  const double scale = std::max(1.0, m.max_abs());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = r; c < m.cols(); ++c)
      if (std::abs(m(r, c) - std::conj(m(c, r))) > Tolerances::kHermiticityRel * scale) {
        std::ostringstream os;
        os << "matrix is not Hermitian at cell (" << r << ", " << c << "): " << m(r, c) << " vs conj of "
           << m(c, r);
        schema_error(path, os.str());
      }
}

std::size_t outcome_ref(const json& j, const std::string& path, const Observable& obs) {
  if (j.is_string()) {
    const std::string label = j.get<std::string>();
    for (std::size_t i = 0; i < obs.size(); ++i)
      if (obs.labels()[i] == label) return i;
    schema_error(path, "observable " + obs.name() + " has no outcome \"" + label + "\"");
  }
  const std::size_t idx = count(j, path);
  if (idx >= obs.size()) schema_error(path, "outcome index out of range for " + obs.name());
  return idx;
}

ExperimentType experiment_type(const std::string& s, const std::string& path) {
  static const std::pair<const char*, ExperimentType> kTypes[] = {
      {"causality", ExperimentType::kCausality},
      {"inconsistency", ExperimentType::kInconsistency},
      {"markov", ExperimentType::kMarkov},
      {"zeno", ExperimentType::kZeno},
      {"coarse_placement", ExperimentType::kCoarsePlacement},
      {"statics", ExperimentType::kStatics},
      {"short_time", ExperimentType::kShortTime},
      {"classical_limit", ExperimentType::kClassicalLimit},
  };
  for (const auto& [name, type] : kTypes)
    if (s == name) return type;
  schema_error(path, "unknown experiment type \"" + s + "\"");
}

}  // namespace

std::string_view experiment_type_name(ExperimentType type) {
  switch (type) {
    case ExperimentType::kCausality: return "causality";
    case ExperimentType::kInconsistency: return "inconsistency";
    case ExperimentType::kMarkov: return "markov";
    case ExperimentType::kZeno: return "zeno";
    case ExperimentType::kCoarsePlacement: return "coarse_placement";
    case ExperimentType::kStatics: return "statics";
    case ExperimentType::kShortTime: return "short_time";
    case ExperimentType::kClassicalLimit: return "classical_limit";
  }
  return "unknown";
}

const Observable& RunConfig::observable(const std::string& name) const {
  const auto it = observables.find(name);
  if (it == observables.end()) throw Error(ErrorCode::kSchemaError, "unknown observable \"" + name + "\"");
  return it->second;
}

const MeasurementSchedule& RunConfig::schedule(const std::string& name) const {
  const auto it = schedules.find(name);
  if (it == schedules.end()) throw Error(ErrorCode::kSchemaError, "unknown schedule \"" + name + "\"");
  return it->second;
}

RunConfig parse_config(std::string_view input) {
  json root;
  try {
    root = json::parse(input);
  } catch (const json::parse_error& e) {
    schema_error("", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) schema_error("", "expected an object");
  RunConfig cfg;

  if (const json* s = optional_member(root, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      schema_error("/seed", "expected an unsigned 64-bit integer");
    cfg.seed = s->get<std::uint64_t>();
  }
  if (const json* t = optional_member(root, "tolerances")) {
    if (!t->is_object()) schema_error("/tolerances", "expected an object");
    if (const json* e = optional_member(*t, "equality")) cfg.tolerances.equality = number(*e, "/tolerances/equality");
    if (const json* p = optional_member(*t, "psd")) cfg.tolerances.psd = number(*p, "/tolerances/psd");
  }

  const json* sys_json = optional_member(root, "system");
  if (!sys_json) {
    for (const char* key : {"observables", "initialization", "schedules", "experiments"})
      if (optional_member(root, key)) schema_error(std::string("/") + key, "requires \"system\"");
    return cfg;
  }
  const std::size_t dim = count(member(*sys_json, "/system", "dim"), "/system/dim");
  if (dim < 2) schema_error("/system/dim", "dimension must be at least 2");
  const ComplexMatrix h = matrix(member(*sys_json, "/system", "hamiltonian"), "/system/hamiltonian", dim);
  require_hermitian_cells(h, "/system/hamiltonian");
  cfg.system.emplace(h);
  const QuantumSystem& sys = *cfg.system;

  if (const json* obs_list = optional_member(root, "observables")) {
    if (!obs_list->is_array()) schema_error("/observables", "expected an array");
    for (std::size_t i = 0; i < obs_list->size(); ++i) {
      const std::string path = "/observables/" + std::to_string(i);
      const json& o = (*obs_list)[i];
      const std::string name = text(member(o, path, "name"), path + "/name");
      if (cfg.observables.count(name)) schema_error(path + "/name", "duplicate observable \"" + name + "\"");
      const json* m = optional_member(o, "matrix");
      const json* p = optional_member(o, "projectors");
      if ((m == nullptr) == (p == nullptr)) schema_error(path, "needs exactly one of \"matrix\" or \"projectors\"");
      if (m) {
        const ComplexMatrix mat = matrix(*m, path + "/matrix", dim);
        require_hermitian_cells(mat, path + "/matrix");
        cfg.observables.emplace(name, observable_from_matrix(sys, mat, name));
        continue;
      }
      if (!p->is_array() || p->empty()) schema_error(path + "/projectors", "expected a nonempty array");
      std::vector<ComplexMatrix> proj;
      for (std::size_t k = 0; k < p->size(); ++k)
        proj.push_back(matrix((*p)[k], path + "/projectors/" + std::to_string(k), dim));
      std::vector<std::optional<double>> values(proj.size());
      std::vector<std::string> labels;
      if (const json* v = optional_member(o, "values")) {
        if (!v->is_array() || v->size() != proj.size()) schema_error(path + "/values", "one value per projector");
        for (std::size_t k = 0; k < v->size(); ++k)
          values[k] = number((*v)[k], path + "/values/" + std::to_string(k));
      }
      if (const json* l = optional_member(o, "labels")) {
        if (!l->is_array() || l->size() != proj.size()) schema_error(path + "/labels", "one label per projector");
        for (std::size_t k = 0; k < l->size(); ++k) labels.push_back(text((*l)[k], path + "/labels/" + std::to_string(k)));
      } else {
        for (std::size_t k = 0; k < proj.size(); ++k)
          labels.push_back(values[k] ? format_outcome_value(*values[k]) : std::to_string(k));
      }
      try {
        cfg.observables.emplace(name, Observable(name, std::move(labels), std::move(values), std::move(proj)));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kDimensionMismatch) throw;
        schema_error(path, e.what());
      }
    }
  }

  const auto resolve_observable = [&](const json& j, const std::string& path) -> const Observable& {
    const std::string name = text(j, path);
    const auto it = cfg.observables.find(name);
    if (it == cfg.observables.end()) schema_error(path, "unknown observable \"" + name + "\"");
    return it->second;
  };

  if (const json* init = optional_member(root, "initialization")) {
    const Observable& obs = resolve_observable(member(*init, "/initialization", "observable"),
                                               "/initialization/observable");
    if (!obs.fine_grained()) schema_error("/initialization/observable", "initialization needs a fine-grained observable");
    const double time = init->contains("time") ? number((*init)["time"], "/initialization/time") : 0.0;
    const json& w = member(*init, "/initialization", "weights");
    if (!w.is_array() || w.size() != obs.size())
      schema_error("/initialization/weights", "one weight per outcome of " + obs.name());
    std::vector<InitializationEvent::Component> comps;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double weight = number(w[k], "/initialization/weights/" + std::to_string(k));
      if (weight < 0.0) schema_error("/initialization/weights/" + std::to_string(k), "weights must be nonnegative");
      if (weight > 0.0) comps.push_back({obs, k, weight});
    }
    cfg.initialization.emplace(sys, time, std::move(comps));
  }

  if (const json* scheds = optional_member(root, "schedules")) {
    if (!scheds->is_object()) schema_error("/schedules", "expected an object keyed by schedule name");
    for (const auto& [name, s] : scheds->items()) {
      const std::string path = "/schedules/" + name;
      const double t0 = s.contains("t0") ? number(s["t0"], path + "/t0")
                                         : (cfg.initialization ? cfg.initialization->time() : 0.0);
      const json& deps = member(s, path, "deployments");
      if (!deps.is_array() || deps.empty()) schema_error(path + "/deployments", "expected a nonempty array");
      std::vector<MeasurementSchedule::Entry> entries;
      for (std::size_t k = 0; k < deps.size(); ++k) {
        const std::string dpath = path + "/deployments/" + std::to_string(k);
        entries.push_back({number(member(deps[k], dpath, "time"), dpath + "/time"),
                           resolve_observable(member(deps[k], dpath, "observable"), dpath + "/observable")});
      }
      try {
        cfg.schedules.emplace(name, MeasurementSchedule(t0, std::move(entries)));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kDimensionMismatch) throw;
        schema_error(path, e.what());
      }
    }
  }

  if (const json* exps = optional_member(root, "experiments")) {
    if (!exps->is_array()) schema_error("/experiments", "expected an array");
    for (std::size_t i = 0; i < exps->size(); ++i) {
      const std::string path = "/experiments/" + std::to_string(i);
      const json& e = (*exps)[i];
      ExperimentSpec spec;
      spec.name = text(member(e, path, "name"), path + "/name");
      for (const auto& prev : cfg.experiments)
        if (prev.name == spec.name) schema_error(path + "/name", "duplicate experiment \"" + spec.name + "\"");
      spec.type = experiment_type(text(member(e, path, "type"), path + "/type"), path + "/type");
      if (const json* t = optional_member(e, "threshold")) spec.threshold = number(*t, path + "/threshold");

      const auto need_init = [&] {
        if (!cfg.initialization) schema_error(path, "experiment needs an \"initialization\"");
      };
      const auto need_schedule = [&]() -> const MeasurementSchedule& {
        spec.schedule = text(member(e, path, "schedule"), path + "/schedule");
        const auto it = cfg.schedules.find(spec.schedule);
        if (it == cfg.schedules.end()) schema_error(path + "/schedule", "unknown schedule \"" + spec.schedule + "\"");
        return it->second;
      };
      const auto need_position = [&](const MeasurementSchedule& s) {
        spec.position = count(member(e, path, "position"), path + "/position");
        if (spec.position < 1 || spec.position > s.size())
          schema_error(path + "/position", "position must lie in [1, " + std::to_string(s.size()) + "]");
      };
      const auto need_observable = [&]() -> const Observable& {
        spec.observable = text(member(e, path, "observable"), path + "/observable");
        return resolve_observable(e["observable"], path + "/observable");
      };

      switch (spec.type) {
        case ExperimentType::kCausality:
        case ExperimentType::kMarkov:
        case ExperimentType::kClassicalLimit:
          need_init();
          need_schedule();
          break;
        case ExperimentType::kInconsistency:
        case ExperimentType::kCoarsePlacement: {
          need_init();
          const MeasurementSchedule& s = need_schedule();
          need_position(s);
          if (spec.type == ExperimentType::kCoarsePlacement) {
            const Observable& target = s.entry(spec.position - 1).observable;
            if (const json* cells = optional_member(e, "cells")) {
              if (!cells->is_array()) schema_error(path + "/cells", "expected an array");
              for (std::size_t c = 0; c < cells->size(); ++c) {
                const std::string cpath = path + "/cells/" + std::to_string(c);
                Resolution::Cell cell;
                cell.label = text(member((*cells)[c], cpath, "label"), cpath + "/label");
                const json& members = member((*cells)[c], cpath, "members");
                if (!members.is_array()) schema_error(cpath + "/members", "expected an array");
                for (std::size_t k = 0; k < members.size(); ++k)
                  cell.members.push_back(outcome_ref(members[k], cpath + "/members/" + std::to_string(k), target));
                spec.cells.push_back(std::move(cell));
              }
              try {
                Resolution(target, spec.cells);
              } catch (const Error& err) {
                schema_error(path + "/cells", err.what());
              }
            }
          }
          break;
        }
        case ExperimentType::kZeno:
        case ExperimentType::kShortTime: {
          const Observable& obs = need_observable();
          if (!obs.fine_grained()) schema_error(path + "/observable", "needs a fine-grained observable");
          spec.outcome = outcome_ref(member(e, path, "outcome"), path + "/outcome", obs);
          if (spec.type == ExperimentType::kZeno) {
            spec.total_time = number(member(e, path, "total_time"), path + "/total_time");
            spec.n = count(member(e, path, "n"), path + "/n");
            if (spec.n == 0) schema_error(path + "/n", "n must be at least 1");
          } else {
            spec.time = e.contains("time") ? number(e["time"], path + "/time") : 0.0;
            spec.dt = number(member(e, path, "dt"), path + "/dt");
            if (!(spec.dt > 0.0)) schema_error(path + "/dt", "dt must be positive");
          }
          break;
        }
        case ExperimentType::kStatics:
          need_init();
          need_observable();
          spec.time = number(member(e, path, "time"), path + "/time");
          if (!(spec.time > cfg.initialization->time())) schema_error(path + "/time", "readout must follow the initialization");
          break;
      }
      cfg.experiments.push_back(std::move(spec));
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSchemaError, path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace bitraj
