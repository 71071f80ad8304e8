#pragma once

#include <vector>

#include "zklab/grid.hpp"

namespace zk {

struct GroundStateOptions {
  double tol = 1e-9;  // bound on the pointwise ODE residual
  double r_max = 20.0;
  double fine_step = 1e-3;
  double fine_end = 5.0;
  double growth = 1.01;
  double match_radius = 4.0;
  double bracket_lo = 2.0;
  double bracket_hi = 2.5;
};

// Positive radial solution of -q'' - q'/r + q - q^3 = 0 on a graded grid,
// continued by c K0(r) beyond r_max.
class RadialProfile {
 public:
  std::vector<double> r, q, dq;
  double q0 = 0.0;
  double tail_coeff = 0.0;
  double r_max = 0.0;
  double residual = 0.0;
  int bisection_steps = 0;
  int newton_steps = 0;

  // Quintic Hermite in (q, q', q'') on each cell.
  void eval(double rr, double& v, double& d1, double& d2) const;
  double value(double rr) const;
  double derivative(double rr) const;
  double second_derivative(double rr) const;

  // Radial integrals: int Q^2, int |grad Q|^2, int Q^4 over the plane.
  double mass() const;
  double gradient_sq() const;
  double l4() const;
  // Smallest C with |q(r)| <= C r^{-1/2} e^{-r} on the sampled range r > 5.
  double tail_constant() const;

 private:
  std::size_t cell(double rr) const;
  double radial_integral(int which) const;
};

RadialProfile solve_ground_state(const GroundStateOptions& opt = {});

// Fornberg finite-difference weights for the m-th derivative at z from nodes x.
std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m);

// Max |-q'' - q'/r + q - q^3| over interior nodes with q'' from 4th-order
// finite differences of the sampled q'.
double radial_residual(const RadialProfile& p);

// Planar samples of Q and its derivatives centred at c.
struct GroundStateFields {
  PlanarGrid grid;
  PlanarField Q, d1Q, d2Q, LambdaQ, Q3, y1Q, Q2d1Q;
  double mass = 0.0;
};

GroundStateFields sample_fields(const RadialProfile& p, const PlanarGrid& g, double c1 = 0.0, double c2 = 0.0);
PlanarField sample_to_plane(const RadialProfile& p, const PlanarGrid& g, double c1 = 0.0, double c2 = 0.0);

}  // namespace zk
