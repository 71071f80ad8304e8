#include "zklab/ground_state.hpp"

#include <cmath>

#include "zklab/error.hpp"
#include "zklab/spectral.hpp"

namespace zk {

double mass(const PlanarField& f) { return inner_product(f, f); }

double energy(const PlanarField& f) {
  double q4 = 0.0;
  for (double v : f.values) q4 += v * v * v * v;
  q4 *= f.grid.cell_area();
  return 0.5 * gradient_norm_sq(f) - 0.25 * q4;
}

double gagliardo_nirenberg_defect(const PlanarField& f, double ground_state_mass) {
  if (!(ground_state_mass > 0.0)) throw PreconditionError("gagliardo_nirenberg_defect: mass must be positive");
  double q4 = 0.0;
  for (double v : f.values) q4 += v * v * v * v;
  q4 *= f.grid.cell_area();
  return 2.0 * gradient_norm_sq(f) * mass(f) / ground_state_mass - q4;
}

GroundStateSummary summarize(const RadialProfile& p) {
  GroundStateSummary s{};
  s.q0 = p.q0;
  s.mass = p.mass();
  s.gradient_sq = p.gradient_sq();
  s.l4 = p.l4();
  s.energy = 0.5 * s.gradient_sq - 0.25 * s.l4;
  s.pohozaev_defect = s.l4 - 2.0 * s.gradient_sq;
  s.residual = p.residual;
  s.tail_constant = p.tail_constant();
  return s;
}

}  // namespace zk
