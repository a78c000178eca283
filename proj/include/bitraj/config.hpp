#pragma once

// JSON run configuration. Matrices are {"re": [[...]], "im": [[...]]}; "im"
// may be omitted for real matrices.
//
// {
//   "seed": 42,
//   "system": {"dim": 2, "hamiltonian": {"re": [[0, 0], [0, 0]]}},
//   "observables": [
//     {"name": "Z", "matrix": {"re": [[1, 0], [0, -1]]}},
//     {"name": "P", "projectors": [{"re": ...}, ...], "values": [0, 1]}
//   ],
//   "initialization": {"observable": "Z", "weights": [0, 1], "time": 0},
//   "schedules": {"main": {"t0": 0, "deployments": [{"time": 1, "observable": "X"}]}},
//   "experiments": [{"name": "interference", "type": "inconsistency", "schedule": "main", "position": 1}],
//   "tolerances": {"equality": 1e-10, "psd": 1e-10}
// }

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bitraj/system.hpp"

namespace bitraj {

enum class ExperimentType {
  kCausality,
  kInconsistency,
  kMarkov,
  kZeno,
  kCoarsePlacement,
  kStatics,
  kShortTime,
  kClassicalLimit,
};

std::string_view experiment_type_name(ExperimentType type);

struct ExperimentSpec {
  std::string name;
  ExperimentType type = ExperimentType::kCausality;
  std::string schedule;
  std::size_t position = 0;  // 1-based, time order
  std::string observable;
  std::size_t outcome = 0;
  double time = 0.0;
  double total_time = 1.0;
  double dt = 1e-3;
  std::size_t n = 1;
  // Cells as outcome indices of the observable at `position`; empty = full blur.
  std::vector<Resolution::Cell> cells;
  std::optional<double> threshold;
};

struct ConfigTolerances {
  double equality = 1e-10;
  double psd = 1e-10;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<QuantumSystem> system;
  std::map<std::string, Observable> observables;
  std::optional<InitializationEvent> initialization;
  std::map<std::string, MeasurementSchedule> schedules;
  std::vector<ExperimentSpec> experiments;
  ConfigTolerances tolerances;

  const Observable& observable(const std::string& name) const;
  const MeasurementSchedule& schedule(const std::string& name) const;
};

// Throws SchemaError (message starts with the JSON path), DimensionMismatch or
// WeightSumError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

}  // namespace bitraj
