#pragma once

#include <functional>
#include <vector>

#include "zklab/radial.hpp"
#include "zklab/spectral.hpp"

namespace zk {

// Integrands along lines of constant y2.
enum class LineIntegrand { Q, LambdaQ, D2Q };

double line_integrand(const RadialProfile& p, LineIntegrand which, double y1, double y2);
// int_a^b g(s, y2) ds by composite Gauss-Legendre.
double line_integral(const RadialProfile& p, LineIntegrand which, double y2, double a, double b);
// int_R g(s, y2) ds
double full_line_integral(const RadialProfile& p, LineIntegrand which, double y2);
// -int_{y1}^inf g(s, y2) ds at every grid point.
PlanarField right_tail_integral(const RadialProfile& p, LineIntegrand which, const PlanarGrid& g);
// int_{-inf}^{y1} g(s, y2) ds at every grid point.
PlanarField left_cumulative_integral(const RadialProfile& p, LineIntegrand which, const PlanarGrid& g);

struct TransverseProfile {
  double half_width = 0.0;
  std::vector<double> y2, F;
  std::vector<double> xi;   // nonnegative dual grid
  std::vector<cplx> F_hat;  // (2 pi)^{-1/2} int F e^{-i xi y} dy
  double F_sq = 0.0;        // int F^2
  double weighted = 0.0;    // int |F_hat|^2 / (1 + xi^2) over the whole line
  double tail_fraction = 0.0;
};

TransverseProfile transverse_profile(const RadialProfile& p, double half_width = 64.0, int n = 4096);

// theta = 2 int |F_hat|^2/(1+xi^2) / int |F_hat|^2. Throws PreconditionError
// if the upper half of the spectrum carries more than 1e-10 of the energy.
double compute_theta(const TransverseProfile& t);

}  // namespace zk
