#include "zklab/transverse.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "zklab/error.hpp"

namespace zk {

double line_integrand(const RadialProfile& p, LineIntegrand which, double y1, double y2) {
  const double r = std::hypot(y1, y2);
  double v, d1, d2;
  p.eval(r, v, d1, d2);
  switch (which) {
    case LineIntegrand::Q: return v;
    case LineIntegrand::LambdaQ: return v + r * d1;
    case LineIntegrand::D2Q: return r > 0.0 ? d1 * y2 / r : 0.0;
  }
  return 0.0;
}

double line_integral(const RadialProfile& p, LineIntegrand which, double y2, double a, double b) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  auto f = [&](double s) { return line_integrand(p, which, s, y2); };
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / 0.5)));
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) acc += GL::integrate(f, a + k * w, a + (k + 1) * w);
  return acc;
}

double full_line_integral(const RadialProfile& p, LineIntegrand which, double y2) {
  // Integrands are even in y1.
  return 2.0 * line_integral(p, which, y2, 0.0, 45.0);
}

PlanarField right_tail_integral(const RadialProfile& p, LineIntegrand which, const PlanarGrid& g) {
  PlanarField out(g);
  const double h = g.h1();
  for (int j = 0; j < g.n2; ++j) {
    const double y2 = g.x2(j);
    auto f = [&](double s) { return line_integrand(p, which, s, y2); };
    const double right = g.x1(g.n1 - 1);
    double acc = -line_integral(p, which, y2, right, right + 45.0);
    out(g.n1 - 1, j) = acc;
    for (int i = g.n1 - 2; i >= 0; --i) {
      const double a = g.x1(i);
      acc -= boost::math::quadrature::gauss<double, 8>::integrate(f, a, a + h);
      out(i, j) = acc;
    }
  }
  return out;
}

PlanarField left_cumulative_integral(const RadialProfile& p, LineIntegrand which, const PlanarGrid& g) {
  PlanarField out = right_tail_integral(p, which, g);
  for (int j = 0; j < g.n2; ++j) {
    const double total = full_line_integral(p, which, g.x2(j));
    for (int i = 0; i < g.n1; ++i) out(i, j) += total;
  }
  return out;
}

TransverseProfile transverse_profile(const RadialProfile& p, double half_width, int n) {
  if (n < 16 || n % 2) throw PreconditionError("transverse_profile: n must be even and >= 16");
  TransverseProfile t;
  t.half_width = half_width;
  const double len = 2.0 * half_width, h = len / n;
  t.y2.resize(n);
  t.F.resize(n);
  for (int j = 0; j < n; ++j) t.y2[j] = -half_width + j * h;
  // F is even; evaluate each |y2| once.
  for (int j = 0; j <= n / 2; ++j) {
    const double v = full_line_integral(p, LineIntegrand::LambdaQ, t.y2[j]);
    t.F[j] = v;
    if (j > 0 && j < n / 2) t.F[n - j] = v;
  }
  const auto c = forward_1d(t.F);
  const double norm = h / std::sqrt(2.0 * std::numbers::pi);
  double total = 0.0, weighted = 0.0, tail = 0.0;
  for (int j = 0; j <= n / 2; ++j) {
    const double xi = 2.0 * std::numbers::pi * j / len;
    const cplx phase = std::polar(1.0, -xi * t.y2[0]);
    t.xi.push_back(xi);
    t.F_hat.push_back(norm * phase * c[j]);
    const double m = (j == 0 || 2 * j == n) ? 1.0 : 2.0;
    const double e = m * std::norm(c[j]);
    total += e;
    weighted += e / (1.0 + xi * xi);
    if (4 * j > n) tail += e;
  }
  double fsq = 0.0;
  for (double v : t.F) fsq += v * v;
  t.F_sq = fsq * h;
  // Discrete Plancherel: sum |F_hat_j|^2 dxi equals int F^2.
  t.weighted = t.F_sq * weighted / total;
  t.tail_fraction = total > 0.0 ? tail / total : 0.0;
  return t;
}

double compute_theta(const TransverseProfile& t) {
  if (t.tail_fraction > 1e-10)
    throw PreconditionError("compute_theta: F under-resolved (spectral tail fraction " +
                            std::to_string(t.tail_fraction) + ")");
  double peak = 0.0;
  for (double v : t.F) peak = std::max(peak, std::abs(v));
  if (std::abs(t.F.front()) > 1e-10 * peak)
    throw PreconditionError("compute_theta: transverse box too small for the decay of F");
  return 2.0 * t.weighted / t.F_sq;
}

}  // namespace zk
