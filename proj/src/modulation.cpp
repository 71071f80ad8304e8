#include "zklab/modulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "zklab/error.hpp"
#include "zklab/operators.hpp"
#include "zklab/spectral.hpp"

namespace zk {
namespace {

std::vector<double> column_weights(const PlanarGrid& g, const std::function<double(double)>& w) {
  std::vector<double> out(g.n1);
  for (int i = 0; i < g.n1; ++i) out[i] = w(g.x1(i));
  return out;
}

std::vector<double> psi_column(const WeightFamily& w, const PlanarGrid& g) {
  return w.sample_psi_B(g.origin1, g.h1(), g.n1);
}

// phi_{i,B} = sqrt(2 psi_B) vartheta_{i,B}
std::vector<double> phi_column(const WeightFamily& w, const PlanarGrid& g, const std::vector<double>& psi, int i) {
  std::vector<double> out(g.n1);
  for (int k = 0; k < g.n1; ++k) out[k] = std::sqrt(2.0 * psi[k]) * w.vartheta_B(i, g.x1(k));
  return out;
}

int wrap_index(long k, int n) {
  const long r = k % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

ModulationContext::ModulationContext(const RadialProfile& p, const ProfileSet& s, const WeightFamily& w)
    : p_(p), s_(s), w_(w) {
  for (double v : s.F_row) F_sq_ += v * v;
  F_sq_ *= s.grid.h2();
}

Frame ModulationContext::frame(const PlanarGrid& lab, const ModulationParams& m) const {
  const int s1 = static_cast<int>(std::lround((m.x1 - window_left * lab.length1 - lab.origin1) / lab.h1()));
  const int s2 = static_cast<int>(std::lround((m.x2 - 0.5 * lab.length2 - lab.origin2) / lab.h2()));
  return frame(lab, m, s1, s2);
}

Frame ModulationContext::frame(const PlanarGrid& lab, const ModulationParams& m, int shift1, int shift2) const {
  if (!(m.lambda > 0.0)) throw PreconditionError("frame: lambda must be positive");
  Frame f;
  f.shift1 = shift1;
  f.shift2 = shift2;
  f.y = PlanarGrid(lab.length1 / m.lambda, lab.length2 / m.lambda, lab.n1, lab.n2,
                   (lab.origin1 + shift1 * lab.h1() - m.x1) / m.lambda,
                   (lab.origin2 + shift2 * lab.h2() - m.x2) / m.lambda);
  return f;
}

FrameProfile ModulationContext::profile_on(const PlanarGrid& y, double b) const {
  if (!(std::abs(b) <= 0.1)) throw NumericalError("profile_on: |b| = " + std::to_string(std::abs(b)) + " exceeds 0.1");
  // P is only meaningful right of the taper.
  if (y.origin1 < s_.taper_end + 2.0)
    throw PreconditionError("profile_on: frame reaches y1 = " + std::to_string(y.origin1) +
                            ", left of the profile taper; enlarge the profile box or shrink the lab box");
  FrameProfile fp;
  fp.b = b;
  fp.gs = sample_fields(p_, y);
  fp.P = trig_interpolate(s_.P, y, false);
  fp.chi_row.resize(y.n1);
  fp.chi_prime_row.resize(y.n1);
  const double sc = std::pow(std::abs(b), 0.75);
  fp.Qb = fp.gs.Q;
  fp.dQb = PlanarField(y);
  for (int i = 0; i < y.n1; ++i) {
    const double x = sc * y.x1(i);
    fp.chi_row[i] = cutoff_chi(x);
    fp.chi_prime_row[i] = cutoff_chi_prime(x);
    const double w = fp.chi_row[i] + 0.75 * x * fp.chi_prime_row[i];
    for (int j = 0; j < y.n2; ++j) {
      fp.Qb(i, j) += b * fp.chi_row[i] * fp.P(i, j);
      fp.dQb(i, j) = w * fp.P(i, j);
    }
  }
  return fp;
}

PlanarField pull_back(const PlanarField& phi, const Frame& f, double lambda) {
  const PlanarGrid& g = phi.grid;
  if (g.n1 != f.y.n1 || g.n2 != f.y.n2) throw PreconditionError("pull_back: frame does not match the field grid");
  PlanarField v(f.y);
  for (int i = 0; i < g.n1; ++i) {
    const int li = wrap_index(static_cast<long>(i) + f.shift1, g.n1);
    for (int j = 0; j < g.n2; ++j) v(i, j) = lambda * phi(li, wrap_index(static_cast<long>(j) + f.shift2, g.n2));
  }
  return v;
}

ModulationParams initial_guess(const PlanarField& phi, double q0, double b) {
  const auto it = std::max_element(phi.values.begin(), phi.values.end());
  if (!(*it > 0.0)) throw PreconditionError("initial_guess: field has no positive peak");
  const std::size_t k = static_cast<std::size_t>(it - phi.values.begin());
  const int i = static_cast<int>(k / phi.grid.n2), j = static_cast<int>(k % phi.grid.n2);
  ModulationParams m;
  m.lambda = q0 / *it;
  m.x1 = phi.grid.x1(i);
  m.x2 = phi.grid.x2(j);
  m.b = b;
  return m;
}

ModulationState decompose(const ModulationContext& ctx, const PlanarField& phi, const ModulationParams& guess,
                          const DecomposeOptions& opt) {
  if (!(guess.lambda > 0.0)) throw PreconditionError("decompose: initial lambda must be positive");
  const PlanarGrid& lab = phi.grid;
  const Frame f0 = ctx.frame(lab, guess);
  ModulationParams m = guess;
  std::vector<double> history;
  for (int it = 0; it <= opt.max_iter; ++it) {
    const Frame fr = ctx.frame(lab, m, f0.shift1, f0.shift2);
    const PlanarField v = pull_back(phi, fr, m.lambda);
    FrameProfile fp = ctx.profile_on(fr.y, m.b);
    PlanarField eps = v - fp.Qb;
    const std::array<const PlanarField*, 4> g{&fp.gs.Q, &fp.gs.Q3, &fp.gs.d1Q, &fp.gs.d2Q};
    Eigen::Vector4d R;
    for (int k = 0; k < 4; ++k) R[k] = inner_product(eps, *g[k]);
    const double en = norm_l2(eps);
    history.push_back(R.cwiseAbs().maxCoeff());
    if (history.back() <= opt.tol * en + opt.abs_floor) {
      if (en > opt.smallness)
        throw PreconditionError("decompose: |eps|_2 = " + std::to_string(en) + " exceeds the smallness threshold " +
                                std::to_string(opt.smallness));
      ModulationState st;
      st.params = m;
      st.frame = fr;
      st.profile = std::move(fp);
      st.eps = std::move(eps);
      for (int k = 0; k < 4; ++k) st.residuals[k] = R[k];
      st.iterations = it;
      st.history = std::move(history);
      st.eps_l2 = en;
      return st;
    }
    if (it == opt.max_iter) break;
    // Lambda g and grad g: closed forms for Q and Q^3, spectral for grad Q.
    const GroundStateFields& q = fp.gs;
    PlanarField LQ3 = q.Q3, d1Q3(fr.y), d2Q3(fr.y);
    for (std::size_t k = 0; k < LQ3.size(); ++k) {
      const double a = 3.0 * q.Q.values[k] * q.Q.values[k];
      LQ3.values[k] += a * (q.LambdaQ.values[k] - q.Q.values[k]);
      d1Q3.values[k] = a * q.d1Q.values[k];
      d2Q3.values[k] = a * q.d2Q.values[k];
    }
    const std::array<std::array<PlanarField, 3>, 4> dg{{
        {q.LambdaQ, q.d1Q, q.d2Q},
        {LQ3, d1Q3, d2Q3},
        {apply_Lambda(q.d1Q), spectral_derivative(q.d1Q, 1), spectral_derivative(q.d1Q, 2)},
        {apply_Lambda(q.d2Q), spectral_derivative(q.d2Q, 1), spectral_derivative(q.d2Q, 2)},
    }};
    Eigen::Matrix4d Jm;
    for (int k = 0; k < 4; ++k) {
      for (int c = 0; c < 3; ++c) Jm(k, c) = -inner_product(v, dg[k][c]) / m.lambda;
      Jm(k, 3) = -inner_product(fp.dQb, *g[k]);
    }
    const Eigen::Vector4d d = Jm.fullPivLu().solve(-R);
    if (!d.allFinite()) throw NumericalError("decompose: singular Jacobian at iteration " + std::to_string(it), history);
    m.lambda += d[0];
    m.x1 += d[1];
    m.x2 += d[2];
    m.b += d[3];
    if (!(m.lambda > 0.0))
      throw NumericalError("decompose: nonpositive lambda at iteration " + std::to_string(it + 1), history);
  }
  throw NumericalError("decompose: no convergence in " + std::to_string(opt.max_iter) + " iterations", history);
}

PlanarField remainder_on(const ModulationContext& ctx, const PlanarField& phi, const ModulationParams& m,
                         const PlanarGrid& y) {
  const PlanarGrid x(m.lambda * y.length1, m.lambda * y.length2, y.n1, y.n2, m.lambda * y.origin1 + m.x1,
                     m.lambda * y.origin2 + m.x2);
  PlanarField v = trig_interpolate(phi, x, true);
  v.grid = y;
  v *= m.lambda;
  return v - ctx.profile_on(y, m.b).Qb;
}

PlanarField synthesize(const ModulationContext& ctx, const PlanarGrid& lab, const ModulationParams& m,
                       const PlanarField& eps) {
  const Frame fr = ctx.frame(lab, m);
  PlanarField w = ctx.profile_on(fr.y, m.b).Qb;
  if (!eps.values.empty()) {
    if (eps.grid.n1 != lab.n1 || eps.grid.n2 != lab.n2) throw PreconditionError("synthesize: eps grid mismatch");
    for (std::size_t k = 0; k < w.size(); ++k) w.values[k] += eps.values[k];
  }
  PlanarField out(lab);
  for (int i = 0; i < lab.n1; ++i) {
    const int li = wrap_index(static_cast<long>(i) + fr.shift1, lab.n1);
    for (int j = 0; j < lab.n2; ++j)
      out(li, wrap_index(static_cast<long>(j) + fr.shift2, lab.n2)) = w(i, j) / m.lambda;
  }
  return out;
}

RhoFields rho_fields(const ModulationContext& ctx, const FrameProfile& fp) {
  const ProfileSet& s = ctx.profiles();
  const PlanarGrid& y = fp.gs.grid;
  const PlanarField cumL = left_cumulative_integral(ctx.radial(), LineIntegrand::LambdaQ, y);
  const PlanarField cumD = left_cumulative_integral(ctx.radial(), LineIntegrand::D2Q, y);
  std::vector<double> y2(y.n2);
  for (int j = 0; j < y.n2; ++j) y2[j] = y.x2(j);
  // F + h2 = (1 - d^2)^{-1} F = -P_inf
  const std::vector<double> pinf = trig_interpolate_1d(s.Pinf_row, s.grid.origin2, s.grid.h2(), y2, false);
  const double k3 = s.LambdaP_Q / (s.PQ * s.LambdaQ_Q3);
  RhoFields r{PlanarField(y), PlanarField(y), PlanarField(y)};
  for (int i = 0; i < y.n1; ++i)
    for (int j = 0; j < y.n2; ++j) {
      r.rho1(i, j) = cumL(i, j) / ctx.F_sq();
      r.rho2(i, j) = (fp.P(i, j) - pinf[j]) / s.PQ + k3 * fp.gs.Q3(i, j) - s.c1 * cumL(i, j);
      r.rho3(i, j) = cumD(i, j) / s.c2;
    }
  return r;
}

JValues j_functionals(const RhoFields& rho, double theta, const PlanarField& eps) {
  JValues v;
  v.J1 = inner_product(eps, rho.rho1);
  v.J2 = inner_product(eps, rho.rho2);
  v.J3 = inner_product(eps, rho.rho3);
  v.J = 2.0 * theta * v.J1 + v.J2;
  return v;
}

JValues j_functionals(const ModulationContext& ctx, const ModulationState& st) {
  return j_functionals(rho_fields(ctx, st.profile), ctx.profiles().theta, st.eps);
}

double weighted_norm(const WeightFamily& w, const PlanarField& eps, int i) {
  if (i < 0 || i > 2) throw PreconditionError("weighted_norm: i must be 0, 1 or 2");
  const PlanarGrid& g = eps.grid;
  const PlanarField e1 = spectral_derivative(eps, 1), e2 = spectral_derivative(eps, 2);
  const std::vector<double> psi = psi_column(w, g);
  const std::vector<double> phi = phi_column(w, g, psi, i);
  double acc = 0.0;
  for (int a = 0; a < g.n1; ++a)
    for (int c = 0; c < g.n2; ++c) {
      const double gx = e1(a, c), gy = e2(a, c), v = eps(a, c);
      acc += (gx * gx + gy * gy) * psi[a] + v * v * phi[a];
    }
  return acc * g.cell_area();
}

double j_weight(double J1, double theta, int i, int j) {
  return std::pow(1.0 - J1, -2.0 * theta * (j - 1) - 2.0 * i - 12.0) - 1.0;
}

Lyapunov lyapunov(const WeightFamily& w, const FrameProfile& fp, const PlanarField& eps, double J1, double theta,
                  int i, int j) {
  if (i < 1 || i > 2 || j < 1 || j > 2) throw PreconditionError("lyapunov: i and j must be 1 or 2");
  if (!(std::abs(J1) < 1.0)) throw PreconditionError("lyapunov: |J1| >= 1, J_ij undefined");
  require_same_grid(eps.grid, fp.Qb.grid, "lyapunov");
  const PlanarGrid& g = eps.grid;
  Lyapunov out;
  out.Jij = j_weight(J1, theta, i, j);
  const PlanarField e1 = spectral_derivative(eps, 1), e2 = spectral_derivative(eps, 2);
  const std::vector<double> psi = psi_column(w, g);
  const std::vector<double> phi = phi_column(w, g, psi, i);
  const std::vector<double> chi = column_weights(g, [&](double y) { return w.chi_tilde_B(y); });
  const double gamma = w.gamma();
  const PlanarField eta = elliptic_inverse(apply_L(fp.gs, eps), 1.0, gamma, gamma);
  double F = 0.0, P = 0.0;
  for (int a = 0; a < g.n1; ++a)
    for (int c = 0; c < g.n2; ++c) {
      const double gx = e1(a, c), gy = e2(a, c), e = eps(a, c), q = fp.Qb(a, c), n = eta(a, c);
      // (Q_b + e)^4 - Q_b^4 - 4 Q_b^3 e
      const double quartic = e * e * (6.0 * q * q + 4.0 * q * e + e * e);
      F += (gx * gx + gy * gy) * psi[a] + (1.0 + out.Jij) * e * e * phi[a] - 0.5 * psi[a] * quartic;
      P += n * n * chi[a];
    }
  out.F = F * g.cell_area();
  out.P = P * g.cell_area();
  out.M = out.F + std::pow(w.B(), -20.0) * out.P;
  out.eta_orthogonality = {inner_product(eta, apply_helmholtz(fp.gs.Q, gamma)),
                           inner_product(eta, apply_helmholtz(fp.gs.d1Q, gamma)),
                           inner_product(eta, apply_helmholtz(fp.gs.d2Q, gamma))};
  return out;
}

ModVectors mod_vectors(const FrameProfile& fp, const PlanarField& eps, const ParameterRates& r) {
  require_same_grid(eps.grid, fp.Qb.grid, "mod_vectors");
  const double a = r.lambda_s_over_lambda + fp.b;
  const double c1 = r.x1_s_over_lambda - 1.0, c2 = r.x2_s_over_lambda;
  const PlanarField LQb = apply_Lambda(fp.Qb), Le = apply_Lambda(eps);
  const PlanarField d1Qb = spectral_derivative(fp.Qb, 1), d2Qb = spectral_derivative(fp.Qb, 2);
  const PlanarField d1e = spectral_derivative(eps, 1), d2e = spectral_derivative(eps, 2);
  const PlanarGrid& g = eps.grid;
  ModVectors out{PlanarField(g), PlanarField(g), PlanarField(g), PlanarField(g)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double e = eps.values[k], q = fp.Qb.values[k], Q = fp.gs.Q.values[k];
    out.Mod.values[k] = a * (LQb.values[k] + Le.values[k]) + c1 * (d1Qb.values[k] + d1e.values[k]) +
                        c2 * (d2Qb.values[k] + d2e.values[k]) - r.b_s * fp.dQb.values[k];
    out.Mod_eta.values[k] = a * (LQb.values[k] - fp.gs.LambdaQ.values[k]) + r.lambda_s_over_lambda * Le.values[k] +
                            c1 * (d1Qb.values[k] - fp.gs.d1Q.values[k] + d1e.values[k]) +
                            c2 * (d2Qb.values[k] - fp.gs.d2Q.values[k] + d2e.values[k]) - r.b_s * fp.dQb.values[k];
    out.R_b.values[k] = 3.0 * (q * q - Q * Q) * e;
    out.R_NL.values[k] = 3.0 * q * e * e + e * e * e;
  }
  return out;
}

PlanarField frame_psi_b(const FrameProfile& fp) {
  PlanarField inner = laplacian(fp.Qb);
  for (std::size_t k = 0; k < inner.size(); ++k) {
    const double v = fp.Qb.values[k];
    inner.values[k] = -inner.values[k] + v - v * v * v;
  }
  PlanarField out = spectral_derivative(inner, 1);
  if (fp.b != 0.0) out.axpy(-fp.b, apply_Lambda(fp.Qb));
  return out;
}

PlanarField eps_equation_rhs(const FrameProfile& fp, const PlanarField& eps, const ParameterRates& r) {
  const ModVectors mv = mod_vectors(fp, eps, r);
  PlanarField out = spectral_derivative(apply_L(fp.gs, eps) - mv.R_b - mv.R_NL, 1);
  out += frame_psi_b(fp);
  out += mv.Mod;
  if (fp.b != 0.0) out.axpy(-fp.b, apply_Lambda(eps));
  return out;
}

double local_norm(const PlanarField& eps) {
  const PlanarGrid& g = eps.grid;
  double acc = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const double e = eps(i, j);
      acc += e * e * std::exp(-std::hypot(g.x1(i), g.x2(j)) / 10.0);
    }
  return acc * g.cell_area();
}

BootstrapFlags bootstrap_flags(double b, double lambda, double eps_l2, double N2, const PlanarField& eps,
                               double theta, double kappa) {
  BootstrapFlags f;
  f.H1 = std::abs(b) + eps_l2 + N2 <= kappa;
  f.H2 = (std::abs(b) + N2) / std::pow(lambda, theta) <= kappa;
  const PlanarGrid& g = eps.grid;
  double acc = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    const double y1 = g.x1(i);
    if (y1 <= 0.0) continue;
    const double w = std::pow(y1, 100.0);
    for (int j = 0; j < g.n2; ++j) acc += w * eps(i, j) * eps(i, j);
  }
  f.H3 = acc * g.cell_area() <= 10.0 * (1.0 + std::pow(lambda, -100.0));
  return f;
}

}  // namespace zk
