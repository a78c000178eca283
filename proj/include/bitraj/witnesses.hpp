#pragma once

// Small fixed instances with known closed-form behaviour.

#include "bitraj/composite.hpp"
#include "bitraj/system.hpp"

namespace bitraj::witness {

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// Qubit sigma_z and sigma_x devices with outcome values -1, +1.
Observable qubit_z();
Observable qubit_x();

struct SingleSystem {
  QuantumSystem sys;
  InitializationEvent init;
  MeasurementSchedule schedule;
};

// H = 0, rho = |z=+1><z=+1| at t = 0, X at t = 1 then Z at t = 2.
SingleSystem two_slit();

// H = (pi/2) sigma_x, initialized in z = +1 at t = 0, Z read out at t = 1.
SingleSystem zeno_qubit();

struct CoupledPair {
  CompositeSystem comp;
  InitializationEvent init_a;
  InitializationEvent init_b;
  MeasurementSchedule schedule_a;
};

// Transverse fields on both sides with a sigma_z x sigma_z coupling, so that
// neither the splitting nor the B sampling is exact.
CoupledPair dephasing();

// [H_A, V_A] = 0 and [H_B, V_B] = 0 with deployments one interval apart.
CoupledPair commuting_drive();

// Transpose of d-level operators as a superoperator.
ComplexMatrix transpose_map(std::size_t d);

}  // namespace bitraj::witness
