#include "bitraj/witnesses.hpp"

#include <numbers>

namespace bitraj::witness {

ComplexMatrix pauli_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix pauli_y() { return {{0.0, cd(0.0, -1.0)}, {cd(0.0, 1.0), 0.0}}; }
ComplexMatrix pauli_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

Observable qubit_z() {
  return Observable("Z", std::vector<double>{-1.0, 1.0},
                    {ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}}, ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}});
}

Observable qubit_x() {
  return Observable("X", std::vector<double>{-1.0, 1.0},
                    {ComplexMatrix{{0.5, -0.5}, {-0.5, 0.5}}, ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}});
}

SingleSystem two_slit() {
  QuantumSystem sys(ComplexMatrix::zeros(2, 2));
  InitializationEvent init = InitializationEvent::pure(sys, 0.0, qubit_z(), 1);
  MeasurementSchedule schedule(0.0, {{1.0, qubit_x()}, {2.0, qubit_z()}});
  return {std::move(sys), std::move(init), std::move(schedule)};
}

SingleSystem zeno_qubit() {
  QuantumSystem sys(std::numbers::pi / 2.0 * pauli_x());
  InitializationEvent init = InitializationEvent::pure(sys, 0.0, qubit_z(), 1);
  MeasurementSchedule schedule(0.0, {{1.0, qubit_z()}});
  return {std::move(sys), std::move(init), std::move(schedule)};
}

CoupledPair dephasing() {
  const QuantumSystem a(1.0 * pauli_x());
  const QuantumSystem b(0.7 * pauli_x());
  CompositeSystem comp = compose(a, b, 1.0, pauli_z(), pauli_z());
  InitializationEvent init_a = InitializationEvent::pure(a, 0.0, qubit_z(), 1);
  InitializationEvent init_b = InitializationEvent::pure(b, 0.0, qubit_x(), 1);
  MeasurementSchedule schedule(0.0, {{0.5, qubit_x()}, {1.0, qubit_z()}});
  return {std::move(comp), std::move(init_a), std::move(init_b), std::move(schedule)};
}

CoupledPair commuting_drive() {
  const QuantumSystem a(0.9 * pauli_z());
  const QuantumSystem b(0.5 * pauli_z());
  CompositeSystem comp = compose(a, b, 0.8, pauli_z(), pauli_z());
  InitializationEvent init_a = InitializationEvent::pure(a, 0.0, qubit_x(), 1);
  InitializationEvent init_b = InitializationEvent::pure(b, 0.0, qubit_x(), 1);
  MeasurementSchedule schedule(0.0, {{0.5, qubit_x()}, {1.0, qubit_x()}});
  return {std::move(comp), std::move(init_a), std::move(init_b), std::move(schedule)};
}

ComplexMatrix transpose_map(std::size_t d) {
  ComplexMatrix s(d * d, d * d);
  // Lambda(E_kl) = E_lk
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) s(l * d + k, k * d + l) = 1.0;
  return s;
}

}  // namespace bitraj::witness
