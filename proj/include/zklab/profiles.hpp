#pragma once

#include <vector>

#include "zklab/cutoff.hpp"
#include "zklab/krylov.hpp"
#include "zklab/radial.hpp"
#include "zklab/transverse.hpp"

namespace zk {

struct ProfileOptions {
  double box1_left = -96.0;
  double box1_right = 32.0;
  double half_width2 = 32.0;
  double h = 0.125;
  // G is blended to zero on [left + margin, left + margin + width] so the
  // right-hand side stays smooth across the periodic seam.
  double taper_margin = 8.0;
  double taper_width = 8.0;
  double solve_tol = 1e-11;
  double theta_half_width = 64.0;
  int theta_points = 4096;
};

struct DecayFits {
  double right_half_plane = 0.0;  // |P| against |y| for y1 > 0
  double transverse = 0.0;        // sup over y1 of |P| against |y2|
  double d1P = 0.0;               // |d1 P| against |y|
};

struct ProfileSet {
  PlanarGrid grid;
  GroundStateFields gs;
  TransverseProfile transverse;
  // Rows indexed by the y2 grid index.
  std::vector<double> F_row, Rp_row, h2_row, Pinf_row;
  PlanarField G, G_tapered, P, LambdaP;
  // int_{-inf}^{y1} Lambda Q and int_{-inf}^{y1} d2Q
  PlanarField cum_LambdaQ, cum_d2Q;
  PlanarField rho1, rho2, rho3;
  double taper_end = 0.0;
  double theta = 0.0;
  double F_sq = 0.0;
  double F_weighted = 0.0;
  double PQ = 0.0;
  double LambdaP_Q = 0.0;
  double LambdaQ_Q3 = 0.0;
  double c1 = 0.0;
  double c1_closed_form = 0.0;
  double c2 = 0.0;
  int solve_iterations = 0;
  double solve_residual = 0.0;
  double interior_residual = 0.0;
  DecayFits decay;
};

ProfileSet build_profiles(const RadialProfile& p, const ProfileOptions& opt = {});

// Smallest |b| whose plateau -2|b|^{-3/4} clears the tapered strip.
double min_admissible_b(const ProfileSet& s);

struct LocalizedProfile {
  double b = 0.0;
  std::vector<double> chi_row;  // chi_b indexed by the y1 grid index
  PlanarField Qb;
};

// Q_b = Q + b chi_b P with chi_b(y1) = chi(|b|^{3/4} y1). strict rejects boxes
// too short for the plateau; lenient keeps the tapered P as the cutoff.
LocalizedProfile build_Qb(const ProfileSet& s, double b, bool strict = true);
// dQ_b/db = chi_b P + (3/4)|b|^{3/4} y1 chi'(|b|^{3/4} y1) P
PlanarField dQb_db(const ProfileSet& s, double b);
// Psi_b = d1(-Lap Q_b + Q_b - Q_b^3) - b Lambda Q_b
PlanarField psi_b(const ProfileSet& s, const LocalizedProfile& qb);

struct RemainderSample {
  double b, mass_defect, energy_defect, psi_defect;
  double bound_constant;  // max |Q_b| / (e^{-|y|/3} + |b| e^{-|y2|/3} 1[-2 <= |b|^{3/4} y1 <= 0])
};
RemainderSample remainder_sample(const ProfileSet& s, double b);

struct PowerFit {
  double exponent = 0.0;
  double constant = 0.0;
};
// Least squares on log|lhs| = log C + p log|b|.
PowerFit fit_power_law(const std::vector<double>& b, const std::vector<double>& lhs);

}  // namespace zk
