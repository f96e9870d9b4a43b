#pragma once

#include "qlab/hamiltonian.hpp"
#include "qlab/vec.hpp"

namespace qlab {

enum class Integrator { rk4, stormer_verlet };

// State of one canonical characteristic augmented with the accumulated action
// integral of the Lagrangian and the tangent map d(q, p)/dq0.
struct CharacteristicState {
    Vec q{};
    Vec p{};
    double action = 0.0;
    Mat dq = identity_mat();  // dq(t)/dq0
    Mat dp{};                 // dp(t)/dq0
};

// Number of uniform substeps covering |t| with step at most dt.
int substeps(double t, double dt);

// One step of size h (negative h integrates backward). The tangent map is propagated
// only when with_tangent is set.
void step_characteristic(const Hamiltonian& h, CharacteristicState& s, double step, Integrator method,
                         bool with_tangent);

// Advances s over time t with step at most dt. Throws NumericalBlowup on non-finite state.
void advance_characteristic(const Hamiltonian& h, CharacteristicState& s, double t, double dt, Integrator method,
                            bool with_tangent = false);

}  // namespace qlab
