#pragma once

#include "zklab/ground_state.hpp"
#include "zklab/modulation.hpp"
#include "zklab/profiles.hpp"
#include "zklab/radial.hpp"
#include "zklab/weights.hpp"

namespace fixture {

inline const zk::RadialProfile& ground_state() {
  static const zk::RadialProfile p = zk::solve_ground_state();
  return p;
}

inline const zk::ProfileSet& profiles() {
  static const zk::ProfileSet s = zk::build_profiles(ground_state());
  return s;
}

inline const zk::WeightFamily& weights() {
  static const zk::WeightFamily w;
  return w;
}

inline const zk::ModulationContext& context() {
  static const zk::ModulationContext ctx(ground_state(), profiles(), weights());
  return ctx;
}

// Box [-L/2, L/2)^2 with spacing h.
inline zk::PlanarGrid square(double L, int n) { return zk::PlanarGrid::centered(L, L, n, n); }

}  // namespace fixture
