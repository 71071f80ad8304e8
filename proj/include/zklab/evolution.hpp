#pragma once

#include <string>
#include <vector>

#include "zklab/grid.hpp"
#include "zklab/spectral.hpp"

namespace zk {

// phi_t + d1(Lap phi + phi^3) = 0 on the periodic box, written in a frame moving
// with speed c along x1: v_t = i k1 (|k|^2 + c) v - i k1 (phi^3)^.
class EtdRk4 {
 public:
  // contour: points on the unit circle used for the phi-function averages.
  EtdRk4(const PlanarGrid& g, double dt, bool nonlinear = true, int contour = 64, double frame_speed = 0.0);

  const PlanarGrid& grid() const { return grid_; }
  double dt() const { return dt_; }
  void advance(Spectrum& v) const;

 private:
  void nonlinear_term(const std::vector<cplx>& v, std::vector<cplx>& out) const;

  PlanarGrid grid_;
  double dt_;
  bool nonlinear_;
  std::vector<double> k1_;  // Nyquist row zeroed
  std::vector<cplx> E_, E2_, Q_, f1_, f2_, f3_;
};

// One step of size dt.
PlanarField step(const PlanarField& f, double dt, bool nonlinear = true);

struct Invariants {
  double mass = 0.0;
  double energy = 0.0;
  double gradient = 0.0;  // |grad phi|_2
};
Invariants invariants(const PlanarField& f);

struct EvolutionOptions {
  double dt = 0.01;
  int stride = 10;
  bool nonlinear = true;
  // Halt when |M(t) - M(0)| / M(0) exceeds this; 0 disables.
  double halt_mass_drift = 0.0;
  // Halt when |grad phi| exceeds this multiple of its initial value.
  double halt_gradient_growth = 1e3;
  int contour = 64;
  // Steps in the frame x1 - c t; snapshots are shifted back to the lab frame.
  double frame_speed = 0.0;
};

struct Trajectory {
  PlanarGrid grid;
  double dt = 0.0;
  int stride = 0;
  std::vector<double> times;  // every accepted step, starting at 0
  std::vector<double> mass, energy, gradient;
  std::vector<double> snapshot_times;
  std::vector<PlanarField> snapshots;
  bool halted = false;
  std::string halt_reason;

  double mass_drift() const;
  double energy_drift() const;
};

// Steps of size dt (the last one shortened to land on t_end). Throws
// NumericalError naming the step index on non-finite values.
Trajectory evolve(const PlanarField& f0, double t_end, const EvolutionOptions& opt = {});

}  // namespace zk
