#pragma once

#include "zklab/grid.hpp"
#include "zklab/radial.hpp"

namespace zk {

// D(f) = 2 |grad f|^2 |f|^2 / |Q|^2 - |f|_4^4, nonnegative with equality on multiples of Q.
double gagliardo_nirenberg_defect(const PlanarField& f, double ground_state_mass);

double mass(const PlanarField& f);
// 1/2 |grad f|^2 - 1/4 |f|_4^4
double energy(const PlanarField& f);

struct GroundStateSummary {
  double q0, mass, gradient_sq, l4, energy, pohozaev_defect, residual, tail_constant;
};
GroundStateSummary summarize(const RadialProfile& p);

}  // namespace zk
