#include "zklab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "zklab/error.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/operators.hpp"
#include "zklab/spectral.hpp"

namespace zk {
namespace {

// Log-linear fit of the upper envelope m(r) on shells [r, r + 1).
double envelope_rate(const std::vector<std::pair<double, double>>& samples, double r0, double r1) {
  std::map<int, double> env;
  for (const auto& [r, v] : samples)
    if (r >= r0 && r < r1) {
      const int k = static_cast<int>(std::floor(r));
      env[k] = std::max(env[k], std::abs(v));
    }
  std::vector<double> xs, ys;
  for (const auto& [k, v] : env)
    if (v > 0.0) {
      xs.push_back(k + 0.5);
      ys.push_back(std::log(v));
    }
  if (xs.size() < 3) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return -sxy / sxx;
}

}  // namespace

// e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}), written to avoid overflow.
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return 1.0 / (1.0 + std::exp(1.0 / t - 1.0 / (1.0 - t)));
}

double smoothstep_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = smoothstep(t);
  return s * (1.0 - s) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)));
}

double cutoff_chi(double x) { return smoothstep(x + 2.0); }
double cutoff_chi_prime(double x) { return smoothstep_prime(x + 2.0); }

ProfileSet build_profiles(const RadialProfile& p, const ProfileOptions& opt) {
  if (!(opt.box1_left < -20.0 && opt.box1_right > 20.0 && opt.half_width2 > 20.0))
    throw PreconditionError("build_profiles: box must contain [-20, 20]^2");
  ProfileSet s;
  s.grid = PlanarGrid::spanning(opt.box1_left, opt.box1_right, -opt.half_width2, opt.half_width2, opt.h);
  const PlanarGrid& g = s.grid;
  s.gs = sample_fields(p, g);
  s.transverse = transverse_profile(p, opt.theta_half_width, opt.theta_points);
  s.theta = compute_theta(s.transverse);
  s.F_sq = s.transverse.F_sq;
  s.F_weighted = s.transverse.weighted;

  s.F_row.resize(g.n2);
  s.Rp_row.resize(g.n2);
  for (int j = 0; j < g.n2; ++j) {
    s.F_row[j] = full_line_integral(p, LineIntegrand::LambdaQ, g.x2(j));
    s.Rp_row[j] = full_line_integral(p, LineIntegrand::D2Q, g.x2(j));
  }
  // -h'' + h = F''  =>  h = -xi^2/(1 + xi^2) F;  (1 - d^2) Pinf = -F.
  s.h2_row = apply_symbol_1d(s.F_row, g.length2, [](double xi) { return -xi * xi / (1.0 + xi * xi); });
  s.Pinf_row = apply_symbol_1d(s.F_row, g.length2, [](double xi) { return -1.0 / (1.0 + xi * xi); });
  {
    double acc = 0.0;
    for (double v : s.Rp_row) acc += v * v;
    s.c2 = 0.5 * acc * g.h2();
  }

  s.G = right_tail_integral(p, LineIntegrand::LambdaQ, g);
  PlanarField cum_d2 = right_tail_integral(p, LineIntegrand::D2Q, g);
  s.cum_LambdaQ = PlanarField(g);
  s.cum_d2Q = PlanarField(g);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      s.cum_LambdaQ(i, j) = s.F_row[j] + s.G(i, j);
      s.cum_d2Q(i, j) = s.Rp_row[j] + cum_d2(i, j);
    }

  const double a = g.origin1 + opt.taper_margin;
  s.taper_end = a + opt.taper_width;
  s.G_tapered = s.G;
  for (int i = 0; i < g.n1; ++i) {
    const double w = smoothstep((g.x1(i) - a) / opt.taper_width);
    for (int j = 0; j < g.n2; ++j) s.G_tapered(i, j) *= w;
  }

  SolveOptions so;
  so.tol = opt.solve_tol;
  so.max_iter = 5000;
  const LinearOperator L = assemble(OperatorKind::L, s.gs);
  SolveResult sol = solve_symmetric(L, s.G_tapered, {s.gs.d1Q, s.gs.d2Q}, so);
  s.P = std::move(sol.x);
  s.solve_iterations = sol.iterations;
  s.solve_residual = sol.residual;
  s.LambdaP = apply_Lambda(s.P);

  s.PQ = inner_product(s.P, s.gs.Q);
  s.LambdaP_Q = inner_product(s.LambdaP, s.gs.Q);
  s.LambdaQ_Q3 = inner_product(s.gs.LambdaQ, s.gs.Q3);

  // d1(L P) against Lambda Q away from the taper.
  {
    const PlanarField d1LP = spectral_derivative(apply_L(s.gs, s.P), 1);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.n1; ++i) {
      if (g.x1(i) < s.taper_end + 2.0) continue;
      for (int j = 0; j < g.n2; ++j) {
        const double d = d1LP(i, j) - s.gs.LambdaQ(i, j);
        num += d * d;
        den += s.gs.LambdaQ(i, j) * s.gs.LambdaQ(i, j);
      }
    }
    s.interior_residual = std::sqrt(num / den);
  }

  {
    std::vector<std::pair<double, double>> rhp, trans, d1p;
    const PlanarField d1P = spectral_derivative(s.P, 1);
    std::vector<double> row_sup(g.n2, 0.0);
    for (int i = 0; i < g.n1; ++i) {
      const double y1 = g.x1(i);
      if (y1 < s.taper_end + 4.0) continue;
      for (int j = 0; j < g.n2; ++j) {
        const double r = std::hypot(y1, g.x2(j));
        if (y1 > 0.0) rhp.emplace_back(r, s.P(i, j));
        d1p.emplace_back(r, d1P(i, j));
        row_sup[j] = std::max(row_sup[j], std::abs(s.P(i, j)));
      }
    }
    for (int j = 0; j < g.n2; ++j) trans.emplace_back(std::abs(g.x2(j)), row_sup[j]);
    s.decay.right_half_plane = envelope_rate(rhp, 4.0, 16.0);
    s.decay.transverse = envelope_rate(trans, 4.0, 16.0);
    s.decay.d1P = envelope_rate(d1p, 4.0, 16.0);
  }

  s.c1_closed_form = s.theta / s.PQ;
  s.rho1 = PlanarField(g);
  s.rho2 = PlanarField(g);
  s.rho3 = PlanarField(g);
  PlanarField Fh(g);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) Fh(i, j) = s.F_row[j] + s.h2_row[j];
  s.c1 = inner_product(Fh, s.gs.LambdaQ) / (s.PQ * inner_product(s.cum_LambdaQ, s.gs.LambdaQ));
  const double Fnorm2 = [&] {
    double acc = 0.0;
    for (double v : s.F_row) acc += v * v;
    return acc * g.h2();
  }();
  const double k3 = s.LambdaP_Q / (s.PQ * s.LambdaQ_Q3);
  for (std::size_t k = 0; k < g.size(); ++k) {
    s.rho1.values[k] = s.cum_LambdaQ.values[k] / Fnorm2;
    s.rho2.values[k] = (s.P.values[k] + Fh.values[k]) / s.PQ + k3 * s.gs.Q3.values[k] -
                       s.c1 * s.cum_LambdaQ.values[k];
    s.rho3.values[k] = s.cum_d2Q.values[k] / s.c2;
  }
  return s;
}

double min_admissible_b(const ProfileSet& s) {
  // Need -2 |b|^{-3/4} >= taper_end + 2.
  const double room = -(s.taper_end + 2.0);
  if (room <= 2.0) return 1.0;
  return std::pow(2.0 / room, 4.0 / 3.0);
}

LocalizedProfile build_Qb(const ProfileSet& s, double b, bool strict) {
  if (!(std::abs(b) <= 0.1)) throw PreconditionError("build_Qb: |b| must not exceed 0.1");
  if (strict && b != 0.0 && std::abs(b) < min_admissible_b(s))
    throw PreconditionError("build_Qb: box too short for the cutoff plateau at b = " + std::to_string(b));
  const PlanarGrid& g = s.grid;
  LocalizedProfile out;
  out.b = b;
  out.Qb = s.gs.Q;
  out.chi_row.assign(g.n1, 0.0);
  if (b == 0.0) return out;
  const double sc = std::pow(std::abs(b), 0.75);
  for (int i = 0; i < g.n1; ++i) out.chi_row[i] = cutoff_chi(sc * g.x1(i));
  for (int i = 0; i < g.n1; ++i) {
    const double w = b * out.chi_row[i];
    if (w == 0.0) continue;
    for (int j = 0; j < g.n2; ++j) out.Qb(i, j) += w * s.P(i, j);
  }
  return out;
}

PlanarField dQb_db(const ProfileSet& s, double b) {
  const PlanarGrid& g = s.grid;
  PlanarField out(g);
  const double sc = std::pow(std::abs(b), 0.75);
  for (int i = 0; i < g.n1; ++i) {
    const double x = sc * g.x1(i);
    const double w = cutoff_chi(x) + 0.75 * x * cutoff_chi_prime(x);
    for (int j = 0; j < g.n2; ++j) out(i, j) = w * s.P(i, j);
  }
  return out;
}

PlanarField psi_b(const ProfileSet& s, const LocalizedProfile& qb) {
  const PlanarField& Qb = qb.Qb;
  PlanarField inner = laplacian(Qb);
  for (std::size_t k = 0; k < inner.values.size(); ++k) {
    const double v = Qb.values[k];
    inner.values[k] = -inner.values[k] + v - v * v * v;
  }
  PlanarField out = spectral_derivative(inner, 1);
  if (qb.b != 0.0) {
    PlanarField corr = Qb - s.gs.Q;
    PlanarField lam = s.gs.LambdaQ + apply_Lambda(corr);
    out.axpy(-qb.b, lam);
  }
  return out;
}

RemainderSample remainder_sample(const ProfileSet& s, double b) {
  const LocalizedProfile qb = build_Qb(s, b, true);
  RemainderSample r{};
  r.b = b;
  r.mass_defect = mass(qb.Qb) - mass(s.gs.Q) - 2.0 * b * s.PQ;
  r.energy_defect = energy(qb.Qb) + b * s.PQ;
  r.psi_defect = inner_product(psi_b(s, qb), s.gs.Q) + 0.5 * b * b * s.F_weighted;
  const PlanarGrid& g = s.grid;
  const double sc = std::pow(std::abs(b), 0.75);
  double worst = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    const double y1 = g.x1(i);
    const bool strip = sc * y1 >= -2.0 && sc * y1 <= 0.0;
    for (int j = 0; j < g.n2; ++j) {
      const double y2 = g.x2(j);
      const double bound = std::exp(-std::hypot(y1, y2) / 3.0) + (strip ? std::abs(b) * std::exp(-std::abs(y2) / 3.0) : 0.0);
      worst = std::max(worst, std::abs(qb.Qb(i, j)) / bound);
    }
  }
  r.bound_constant = worst;
  return r;
}

PowerFit fit_power_law(const std::vector<double>& b, const std::vector<double>& lhs) {
  if (b.size() != lhs.size() || b.size() < 2) throw PreconditionError("fit_power_law: need matching samples");
  double mx = 0, my = 0;
  const double n = static_cast<double>(b.size());
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b[k] == 0.0 || lhs[k] == 0.0) throw PreconditionError("fit_power_law: zero sample");
    xs.push_back(std::log(std::abs(b[k])));
    ys.push_back(std::log(std::abs(lhs[k])));
    mx += xs.back();
    my += ys.back();
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  PowerFit f;
  f.exponent = sxy / sxx;
  f.constant = std::exp(my - f.exponent * mx);
  return f;
}

}  // namespace zk
