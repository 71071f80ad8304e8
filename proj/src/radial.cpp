#include "zklab/radial.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "zklab/error.hpp"

namespace zk {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

// The 1/r stiffness is confined to r -> 0, which the series start skips,
// so an explicit 7(8) pair is both accurate and cheap here.
void radial_rhs(const State& y, State& dy, double r) {
  dy[0] = y[1];
  dy[1] = -y[1] / r + y[0] - y[0] * y[0] * y[0];
}

auto make_stepper(double eps) {
  return odeint::make_controlled(eps, eps, odeint::runge_kutta_fehlberg78<State>());
}

State series_start(double q0, double r0) {
  const double a = (q0 - q0 * q0 * q0) / 4.0;
  const double c = (1.0 - 3.0 * q0 * q0) * a / 16.0;
  return {q0 + a * r0 * r0 + c * r0 * r0 * r0 * r0, 2.0 * a * r0 + 4.0 * c * r0 * r0 * r0};
}

double second_from_ode(double r, double q, double dq, double q0) {
  if (r == 0.0) return 0.5 * (q0 - q0 * q0 * q0);
  return -dq / r + q - q * q * q;
}

// +1: q0 too large (q crosses zero); -1: too small (q turns upward while positive); 0: undecided.
int classify(double q0, double r0, double r_max, double eps) {
  auto stepper = make_stepper(eps);
  State y = series_start(q0, r0);
  double r = r0, dr = 1e-3;
  while (r < r_max) {
    dr = std::min(dr, r_max - r);
    if (stepper.try_step(radial_rhs, y, r, dr) != odeint::success) continue;
    if (y[0] < 0.0) return 1;
    if (y[1] > 0.0) return -1;
  }
  return 0;
}

struct Segment {
  std::vector<double> q, dq;
};

Segment integrate_nodes(const State& start, const std::vector<double>& times, double eps) {
  auto stepper = make_stepper(eps);
  State y = start;
  Segment seg;
  auto obs = [&](const State& s, double) {
    seg.q.push_back(s[0]);
    seg.dq.push_back(s[1]);
  };
  const double dt = times.size() > 1 ? (times[1] - times[0]) : 1e-3;
  odeint::integrate_times(stepper, radial_rhs, y, times.begin(), times.end(), dt, obs);
  return seg;
}

State tail_start(double c, double R) {
  return {c * std::cyl_bessel_k(0.0, R), -c * std::cyl_bessel_k(1.0, R)};
}

}  // namespace

std::size_t RadialProfile::cell(double rr) const {
  auto it = std::upper_bound(r.begin(), r.end(), rr);
  std::size_t k = static_cast<std::size_t>(it - r.begin());
  if (k == 0) return 0;
  return std::min(k - 1, r.size() - 2);
}

void RadialProfile::eval(double rr, double& v, double& d1, double& d2) const {
  rr = std::abs(rr);
  if (rr >= r_max) {
    const double k0 = std::cyl_bessel_k(0.0, rr), k1 = std::cyl_bessel_k(1.0, rr);
    v = tail_coeff * k0;
    d1 = -tail_coeff * k1;
    d2 = tail_coeff * (k0 + k1 / rr);
    return;
  }
  const std::size_t k = cell(rr);
  const double a = r[k], b = r[k + 1], h = b - a, t = (rr - a) / h;
  const double qa = q[k], qb = q[k + 1], pa = dq[k], pb = dq[k + 1];
  const double sa = second_from_ode(a, qa, pa, q0), sb = second_from_ode(b, qb, pb, q0);
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5,
               h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5, h3 = 10 * t3 - 15 * t4 + 6 * t5,
               h4 = -4 * t3 + 7 * t4 - 3 * t5, h5 = 0.5 * t3 - t4 + 0.5 * t5;
  const double g0 = -30 * t2 + 60 * t3 - 30 * t4, g1 = 1 - 18 * t2 + 32 * t3 - 15 * t4,
               g2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4, g3 = -g0, g4 = -12 * t2 + 28 * t3 - 15 * t4,
               g5 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  const double e0 = -60 * t + 180 * t2 - 120 * t3, e1 = -36 * t + 96 * t2 - 60 * t3,
               e2 = 1 - 9 * t + 18 * t2 - 10 * t3, e3 = -e0, e4 = -24 * t + 84 * t2 - 60 * t3,
               e5 = 3 * t - 12 * t2 + 10 * t3;
  v = qa * h0 + h * pa * h1 + h * h * sa * h2 + qb * h3 + h * pb * h4 + h * h * sb * h5;
  d1 = (qa * g0 + qb * g3) / h + pa * g1 + pb * g4 + h * (sa * g2 + sb * g5);
  d2 = (qa * e0 + qb * e3) / (h * h) + (pa * e1 + pb * e4) / h + sa * e2 + sb * e5;
}

double RadialProfile::value(double rr) const {
  double v, d1, d2;
  eval(rr, v, d1, d2);
  return v;
}

double RadialProfile::derivative(double rr) const {
  double v, d1, d2;
  eval(rr, v, d1, d2);
  return rr < 0 ? -d1 : d1;
}

double RadialProfile::second_derivative(double rr) const {
  double v, d1, d2;
  eval(rr, v, d1, d2);
  return d2;
}

double RadialProfile::radial_integral(int which) const {
  using GL = boost::math::quadrature::gauss<double, 10>;
  auto integrand = [&](double rr) {
    double v, d1, d2;
    eval(rr, v, d1, d2);
    const double f = which == 0 ? v * v : which == 1 ? d1 * d1 : v * v * v * v;
    return f * rr;
  };
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < r.size(); ++k) s += GL::integrate(integrand, r[k], r[k + 1]);
  for (int k = 0; k < 20; ++k) s += GL::integrate(integrand, r_max + k, r_max + k + 1);
  return 2.0 * std::numbers::pi * s;
}

double RadialProfile::mass() const { return radial_integral(0); }
double RadialProfile::gradient_sq() const { return radial_integral(1); }
double RadialProfile::l4() const { return radial_integral(2); }

double RadialProfile::tail_constant() const {
  double c = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r[k] > 5.0) c = std::max(c, std::abs(q[k]) * std::sqrt(r[k]) * std::exp(r[k]));
  return c;
}

std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

double radial_residual(const RadialProfile& p) {
  double worst = 0.0;
  const std::size_t n = p.r.size();
  for (std::size_t k = 2; k + 2 < n; ++k) {
    std::vector<double> xs(p.r.begin() + k - 2, p.r.begin() + k + 3);
    const auto w = fornberg_weights(p.r[k], xs, 1);
    double d2 = 0.0;
    for (int i = 0; i < 5; ++i) d2 += w[i] * p.dq[k - 2 + i];
    const double q = p.q[k];
    worst = std::max(worst, std::abs(-d2 - p.dq[k] / p.r[k] + q - q * q * q));
  }
  return worst;
}

RadialProfile solve_ground_state(const GroundStateOptions& opt) {
  if (!(opt.tol > 0.0) || opt.tol > 1e-6) throw PreconditionError("solve_ground_state: tol must lie in (0, 1e-6]");
  if (!(opt.match_radius < opt.fine_end && opt.fine_end < opt.r_max))
    throw PreconditionError("solve_ground_state: need match_radius < fine_end < r_max");

  // Graded grid: uniform near the core, geometric out to r_max.
  std::vector<double> grid{0.0};
  const int nfine = static_cast<int>(std::lround(opt.fine_end / opt.fine_step));
  for (int k = 1; k <= nfine; ++k) grid.push_back(k * opt.fine_end / nfine);
  {
    double h = opt.fine_end / nfine, rr = opt.fine_end;
    std::vector<double> outer;
    while (rr + h * opt.growth < opt.r_max) {
      h *= opt.growth;
      rr += h;
      outer.push_back(rr);
    }
    const double scale = (opt.r_max - opt.fine_end) / (outer.empty() ? 1.0 : outer.back() - opt.fine_end);
    for (double& x : outer) x = opt.fine_end + (x - opt.fine_end) * scale;
    grid.insert(grid.end(), outer.begin(), outer.end());
  }
  const double r0 = grid[1];

  RadialProfile prof;
  double lo = opt.bracket_lo, hi = opt.bracket_hi;
  if (classify(lo, r0, opt.r_max, 1e-13) != -1 || classify(hi, r0, opt.r_max, 1e-13) != 1)
    throw NumericalError("solve_ground_state: shooting bracket does not enclose the ground state");
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    const int c = classify(mid, r0, opt.r_max, 1e-13);
    ++prof.bisection_steps;
    if (c == 1) {
      hi = mid;
    } else if (c == -1) {
      lo = mid;
    } else {
      lo = hi = mid;
      break;
    }
  }
  double q0 = 0.5 * (lo + hi);

  const std::size_t im = static_cast<std::size_t>(
      std::lower_bound(grid.begin(), grid.end(), opt.match_radius) - grid.begin());
  const double rm = grid[im];
  std::vector<double> inner(grid.begin() + 1, grid.begin() + im + 1);
  std::vector<double> outer(grid.rbegin(), grid.rend() - im);

  for (double eps : {1e-12, 1e-14}) {
    auto mismatch = [&](double a, double c, Segment* in_seg, Segment* out_seg) {
      Segment s1 = integrate_nodes(series_start(a, r0), inner, eps);
      Segment s2 = integrate_nodes(tail_start(c, opt.r_max), outer, eps);
      const std::array<double, 2> f{s1.q.back() - s2.q.back(), s1.dq.back() - s2.dq.back()};
      if (in_seg) *in_seg = std::move(s1);
      if (out_seg) *out_seg = std::move(s2);
      return f;
    };
    Segment s1 = integrate_nodes(series_start(q0, r0), inner, eps);
    double c = s1.q.back() / std::cyl_bessel_k(0.0, rm);
    double q = q0;
    prof.newton_steps = 0;
    for (int it = 0; it < 30; ++it) {
      const auto f = mismatch(q, c, nullptr, nullptr);
      if (std::hypot(f[0], f[1]) < 1e-14) break;
      const double dq = 1e-7 * q, dc = 1e-7 * std::abs(c);
      const auto fq = mismatch(q + dq, c, nullptr, nullptr);
      const auto fc = mismatch(q, c + dc, nullptr, nullptr);
      const double j00 = (fq[0] - f[0]) / dq, j10 = (fq[1] - f[1]) / dq;
      const double j01 = (fc[0] - f[0]) / dc, j11 = (fc[1] - f[1]) / dc;
      const double det = j00 * j11 - j01 * j10;
      if (det == 0.0) throw NumericalError("solve_ground_state: singular matching Jacobian");
      const double sq = (f[0] * j11 - f[1] * j01) / det, sc = (j00 * f[1] - j10 * f[0]) / det;
      q -= sq;
      c -= sc;
      ++prof.newton_steps;
      if (std::abs(sq) < 1e-15 * q && std::abs(sc) < 1e-15 * std::abs(c)) break;
    }
    Segment a, b;
    mismatch(q, c, &a, &b);
    prof.r = grid;
    prof.q0 = q;
    prof.tail_coeff = c;
    prof.r_max = opt.r_max;
    prof.q.assign(grid.size(), 0.0);
    prof.dq.assign(grid.size(), 0.0);
    prof.q[0] = q;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      prof.q[k + 1] = a.q[k];
      prof.dq[k + 1] = a.dq[k];
    }
    // Tail nodes beyond the matching radius come from the inward solve.
    for (std::size_t k = 0; k + 1 < outer.size(); ++k) {
      const std::size_t idx = grid.size() - 1 - k;
      prof.q[idx] = b.q[k];
      prof.dq[idx] = b.dq[k];
    }
    prof.residual = radial_residual(prof);
    if (prof.residual < opt.tol) return prof;
  }
  throw NumericalError("solve_ground_state: ODE residual " + std::to_string(prof.residual) + " above tolerance",
                       {prof.residual});
}

GroundStateFields sample_fields(const RadialProfile& p, const PlanarGrid& g, double c1, double c2) {
  GroundStateFields f;
  f.grid = g;
  f.Q = PlanarField(g);
  f.d1Q = PlanarField(g);
  f.d2Q = PlanarField(g);
  f.LambdaQ = PlanarField(g);
  f.Q3 = PlanarField(g);
  f.y1Q = PlanarField(g);
  f.Q2d1Q = PlanarField(g);
  for (int i = 0; i < g.n1; ++i) {
    const double y1 = g.x1(i) - c1;
    for (int j = 0; j < g.n2; ++j) {
      const double y2 = g.x2(j) - c2;
      const double rr = std::hypot(y1, y2);
      double v, d1, d2;
      p.eval(rr, v, d1, d2);
      const double e1 = rr > 0.0 ? d1 * y1 / rr : 0.0, e2 = rr > 0.0 ? d1 * y2 / rr : 0.0;
      f.Q(i, j) = v;
      f.d1Q(i, j) = e1;
      f.d2Q(i, j) = e2;
      f.LambdaQ(i, j) = v + rr * d1;
      f.Q3(i, j) = v * v * v;
      f.y1Q(i, j) = y1 * v;
      f.Q2d1Q(i, j) = v * v * e1;
    }
  }
  f.mass = inner_product(f.Q, f.Q);
  return f;
}

PlanarField sample_to_plane(const RadialProfile& p, const PlanarGrid& g, double c1, double c2) {
  return PlanarField::sample(g, [&](double x, double y) { return p.value(std::hypot(x - c1, y - c2)); });
}

}  // namespace zk
