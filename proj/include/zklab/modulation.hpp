#pragma once

#include <array>
#include <vector>

#include "zklab/profiles.hpp"
#include "zklab/weights.hpp"

namespace zk {

struct ModulationParams {
  double lambda = 1.0;
  double b = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
};

// Rescaled coordinates y = (x - x(t)) / lambda on a lab grid. The lab samples are
// rolled by (shift1, shift2) points so the soliton sits at a fixed place in the window;
// frame index k reads lab index (k + shift) mod n.
struct Frame {
  PlanarGrid y;
  int shift1 = 0;
  int shift2 = 0;
};

// Q_b and the reference fields sampled on a frame.
struct FrameProfile {
  GroundStateFields gs;
  PlanarField P;
  std::vector<double> chi_row, chi_prime_row;
  PlanarField Qb;
  PlanarField dQb;  // dQ_b/db
  double b = 0.0;
};

class ModulationContext {
 public:
  // Keeps references; all three must outlive the context.
  ModulationContext(const RadialProfile& p, const ProfileSet& s, const WeightFamily& w);

  const RadialProfile& radial() const { return p_; }
  const ProfileSet& profiles() const { return s_; }
  const WeightFamily& weights() const { return w_; }

  // Fraction of the x1 window placed left of the soliton.
  double window_left = 2.0 / 3.0;

  Frame frame(const PlanarGrid& lab, const ModulationParams& m) const;
  Frame frame(const PlanarGrid& lab, const ModulationParams& m, int shift1, int shift2) const;
  FrameProfile profile_on(const PlanarGrid& y, double b) const;

  // int F^2 over the profile rows, the normalisation of rho1.
  double F_sq() const { return F_sq_; }

 private:
  const RadialProfile& p_;
  const ProfileSet& s_;
  const WeightFamily& w_;
  double F_sq_ = 0.0;
};

// v(y) = lambda phi(lambda y + x) on the frame grid; exact since the frame is a
// rescaled copy of the lab grid.
PlanarField pull_back(const PlanarField& phi, const Frame& f, double lambda);

struct ModulationState {
  ModulationParams params;
  Frame frame;
  FrameProfile profile;
  PlanarField eps;
  std::array<double, 4> residuals{};  // (eps, Q), (eps, Q^3), (eps, d1Q), (eps, d2Q)
  int iterations = 0;
  std::vector<double> history;  // max |residual| per iteration
  double eps_l2 = 0.0;
};

struct DecomposeOptions {
  double tol = 1e-10;  // relative to |eps|_2
  double abs_floor = 1e-13;
  int max_iter = 50;
  // |eps|_2 above this is outside the soliton neighbourhood.
  double smallness = 0.5;
};

// lambda from the peak height q0 / max phi, x at the peak, b as given.
ModulationParams initial_guess(const PlanarField& phi, double q0, double b = 0.0);

// Newton on (lambda, x1, x2, b). Throws NumericalError on non-convergence (with the
// residual history) or a nonpositive lambda iterate, PreconditionError when |eps|_2
// exceeds the smallness threshold.
ModulationState decompose(const ModulationContext& ctx, const PlanarField& phi, const ModulationParams& guess,
                          const DecomposeOptions& opt = {});

// lambda phi(lambda y + x) - Q_b(y) on an arbitrary rescaled grid y, phi interpolated
// band-limited; used to compare remainders of neighbouring snapshots on one frame.
PlanarField remainder_on(const ModulationContext& ctx, const PlanarField& phi, const ModulationParams& m,
                         const PlanarGrid& y);

// phi(x) = lambda^{-1} (Q_b + eps)((x - x0) / lambda); eps lives on the frame that
// ctx.frame(lab, m) returns, or is empty.
PlanarField synthesize(const ModulationContext& ctx, const PlanarGrid& lab, const ModulationParams& m,
                       const PlanarField& eps = {});

struct JValues {
  double J = 0.0, J1 = 0.0, J2 = 0.0, J3 = 0.0;
};

struct RhoFields {
  PlanarField rho1, rho2, rho3;
};
// rho1 = |F|^{-2} int_{-inf}^{y1} Lambda Q, rho2 as in the refined control of b,
// rho3 = c2^{-1} int_{-inf}^{y1} d2Q.
RhoFields rho_fields(const ModulationContext& ctx, const FrameProfile& fp);
JValues j_functionals(const ModulationContext& ctx, const ModulationState& st);
JValues j_functionals(const RhoFields& rho, double theta, const PlanarField& eps);

// int |grad eps|^2 psi_B + eps^2 phi_{i,B}
double weighted_norm(const WeightFamily& w, const PlanarField& eps, int i);

struct Lyapunov {
  double F = 0.0;
  double P = 0.0;  // int eta^2 tilde chi_B
  double M = 0.0;  // F + B^{-20} P
  double Jij = 0.0;
  // (eta, (1 - gamma Lap) Q) and (eta, (1 - gamma Lap) grad Q)
  std::array<double, 3> eta_orthogonality{};
};
// Throws PreconditionError when |J1| >= 1.
Lyapunov lyapunov(const WeightFamily& w, const FrameProfile& fp, const PlanarField& eps, double J1, double theta,
                  int i, int j);
double j_weight(double J1, double theta, int i, int j);

struct ParameterRates {
  double lambda_s_over_lambda = 0.0;
  double x1_s_over_lambda = 0.0;
  double x2_s_over_lambda = 0.0;
  double b_s = 0.0;
};

struct ModVectors {
  PlanarField Mod, Mod_eta, R_b, R_NL;
};
ModVectors mod_vectors(const FrameProfile& fp, const PlanarField& eps, const ParameterRates& r);

// Psi_b = d1(-Lap Q_b + Q_b - Q_b^3) - b Lambda Q_b on the frame.
PlanarField frame_psi_b(const FrameProfile& fp);
// d1 L eps + Psi_b + Mod - b Lambda eps - d1 R_b - d1 R_NL
PlanarField eps_equation_rhs(const FrameProfile& fp, const PlanarField& eps, const ParameterRates& r);

// int eps^2 e^{-|y|/10}
double local_norm(const PlanarField& eps);

struct BootstrapFlags {
  bool H1 = false, H2 = false, H3 = false;
};
BootstrapFlags bootstrap_flags(double b, double lambda, double eps_l2, double N2, const PlanarField& eps,
                               double theta, double kappa);

}  // namespace zk
