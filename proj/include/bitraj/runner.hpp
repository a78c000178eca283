#pragma once

// Front end shared by the command-line tool and its tests.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bitraj/config.hpp"
#include "bitraj/phenomenology.hpp"

namespace bitraj {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct RunOptions {
  std::string command;
  std::optional<std::string> experiment;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::size_t dim = 3;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> n;
  std::optional<double> tol_equality;
  std::optional<double> tol_psd;
  std::optional<std::string> out_dir;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

struct SuiteReport {
  std::uint64_t seed = kDefaultSeed;
  std::vector<ExperimentReport> experiments;

  bool all_passed() const;
  // {"rng", "seed", "experiments": [...]} with entries ordered by name.
  std::string to_json() const;
};

// Invariant suite on seeded random instances of dimension `dim`.
SuiteReport run_check_suite(std::uint64_t seed, std::size_t dim, const ConfigTolerances& tol);

// Reports of one configured experiment; coarse placement yields a terminal
// and, when applicable, an interior entry.
std::vector<ExperimentReport> run_configured(const RunConfig& cfg, const ExperimentSpec& spec,
                                             std::optional<std::size_t> n_override);

// Built-in witnesses available without a config: names listed here.
std::vector<std::string> builtin_experiments();

// Returns the process exit code; artifacts go to `out` or to files in out_dir.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace bitraj
