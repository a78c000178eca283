#include <iostream>

#include "CLI11.hpp"
#include "bitraj/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bi-probabilities of sequential quantum measurements"};
  bitraj::RunOptions opt;
  std::string name;
  std::uint64_t seed = 0;
  std::size_t grid = 0;
  std::size_t n = 0;
  double tol_eq = 0.0;
  double tol_psd = 0.0;
  std::string config;
  std::string out_dir;

  app.add_option("command", opt.command, "check | experiment | table")->required();
  app.add_option("name", name, "experiment name");
  auto* config_opt = app.add_option("--config", config, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "seed of the random instance generator");
  app.add_option("--dim", opt.dim, "dimension of random instances")->check(CLI::Range(2, 8));
  auto* grid_opt = app.add_option("--grid", grid, "largest grid size of convergence ladders")->check(CLI::PositiveNumber);
  auto* n_opt = app.add_option("--n", n, "number of Zeno deployments")->check(CLI::PositiveNumber);
  auto* eq_opt = app.add_option("--tol-equality", tol_eq, "threshold of equality checks");
  auto* psd_opt = app.add_option("--tol-psd", tol_psd, "tolerance of positivity checks");
  auto* out_opt = app.add_option("--out", out_dir, "directory for report.json and CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bitraj::kExitConfigError;
  }
  if (!name.empty()) opt.experiment = name;
  if (*config_opt) opt.config_path = config;
  if (*seed_opt) opt.seed = seed;
  if (*grid_opt) opt.grid = grid;
  if (*n_opt) opt.n = n;
  if (*eq_opt) opt.tol_equality = tol_eq;
  if (*psd_opt) opt.tol_psd = tol_psd;
  if (*out_opt) opt.out_dir = out_dir;
  return bitraj::run(opt, std::cout, std::cerr);
}
