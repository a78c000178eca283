#include "bitraj/random.hpp"

#include <algorithm>
#include <numeric>

namespace bitraj {

double InstanceGenerator::normal() { return normal_(engine_); }

double InstanceGenerator::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::size_t InstanceGenerator::index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

ComplexMatrix InstanceGenerator::hermitian(std::size_t d) {
  ComplexMatrix g(d, d);
  for (cd& z : g.data()) {
    const double re = normal();
    const double im = normal();
    z = cd(re, im);
  }
  ComplexMatrix h = g + g.adjoint();
  h *= 0.5;
  return h;
}

ComplexMatrix InstanceGenerator::unitary(std::size_t d) {
  return eig_hermitian(hermitian(d)).vectors;
}

Observable InstanceGenerator::fine_observable(std::size_t d, std::string name) {
  const ComplexMatrix u = unitary(d);
  std::vector<double> values(d);
  std::vector<ComplexMatrix> projectors;
  for (std::size_t j = 0; j < d; ++j) {
    values[j] = static_cast<double>(j);
    projectors.push_back(ComplexMatrix::outer(u.column(j)));
  }
  return Observable(std::move(name), std::move(values), std::move(projectors));
}

Resolution InstanceGenerator::resolution(const Observable& obs) {
  const std::size_t cells = 1 + index(obs.size());
  std::vector<std::size_t> perm(obs.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), engine_);
  std::vector<Resolution::Cell> out(cells);
  for (std::size_t c = 0; c < cells; ++c) out[c].label = "c" + std::to_string(c);
  // The first `cells` outcomes seed the cells so none is empty.
  for (std::size_t i = 0; i < perm.size(); ++i) out[i < cells ? i : index(cells)].members.push_back(perm[i]);
  for (auto& c : out) std::sort(c.members.begin(), c.members.end());
  return Resolution(obs, std::move(out));
}

Observable InstanceGenerator::coarse_observable(std::size_t d, std::size_t cells, std::string name) {
  const Observable fine = fine_observable(d, name);
  if (cells >= d) return fine;
  std::vector<Resolution::Cell> groups(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    groups[c].label = format_outcome_value(static_cast<double>(c));
    groups[c].members.push_back(c);
  }
  for (std::size_t i = cells; i < d; ++i) groups[index(cells)].members.push_back(i);
  const Observable coarse = coarse_grain(fine, Resolution(fine, std::move(groups)));
  std::vector<double> values(cells);
  std::iota(values.begin(), values.end(), 0.0);
  return Observable(std::move(name), std::move(values), coarse.projectors());
}

std::vector<double> InstanceGenerator::weights(std::size_t count) {
  std::vector<double> w(count);
  for (double& x : w) x = uniform(0.0, 1.0);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

InitializationEvent InstanceGenerator::initialization(const QuantumSystem& sys, double time) {
  const Observable k = fine_observable(sys.dim(), "K_init");
  const std::vector<double> w = weights(sys.dim());
  std::vector<InitializationEvent::Component> comps;
  for (std::size_t i = 0; i < sys.dim(); ++i) comps.push_back({k, i, w[i]});
  return InitializationEvent(sys, time, std::move(comps));
}

ComplexMatrix InstanceGenerator::density(std::size_t d) {
  const ComplexMatrix u = unitary(d);
  const std::vector<double> w = weights(d);
  ComplexMatrix rho(d, d);
  for (std::size_t j = 0; j < d; ++j) rho.add_scaled(w[j], ComplexMatrix::outer(u.column(j)));
  return rho;
}

}  // namespace bitraj
