#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "zklab/error.hpp"
#include "zklab/ground_state.hpp"

using namespace zk;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent shooting: fixed-step RK4 from the series start, coarse bisection on q(0).
struct Shot {
  int verdict;  // +1 crossed zero (q0 too large), -1 turned upward (too small), 0 undecided
  double mass;
};

Shot shoot(double q0, double r_end = 12.0, double h = 1e-3) {
  double r = h, q = q0 + 0.25 * (q0 - q0 * q0 * q0) * h * h, p = 0.5 * (q0 - q0 * q0 * q0) * h;
  auto rhs = [](double rr, double qq, double pp, double& dq, double& dp) {
    dq = pp;
    dp = -pp / rr + qq - qq * qq * qq;
  };
  double mass = 2 * kPi * 0.5 * q0 * q0 * r * r;  // disc of radius h
  while (r < r_end) {
    double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
    rhs(r, q, p, k1q, k1p);
    rhs(r + h / 2, q + h / 2 * k1q, p + h / 2 * k1p, k2q, k2p);
    rhs(r + h / 2, q + h / 2 * k2q, p + h / 2 * k2p, k3q, k3p);
    rhs(r + h, q + h * k3q, p + h * k3p, k4q, k4p);
    const double qn = q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    const double pn = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    mass += 2 * kPi * 0.5 * h * (q * q * r + qn * qn * (r + h));
    q = qn;
    p = pn;
    r += h;
    if (q < 0) return {+1, mass};
    if (p > 0) return {-1, mass};
  }
  return {0, mass};
}

struct Oracle {
  double q0, mass;
};

const Oracle& oracle() {
  static const Oracle o = [] {
    double lo = 2.0, hi = 2.5;
    while (hi - lo > 1e-7) {
      const double mid = 0.5 * (lo + hi);
      (shoot(mid).verdict > 0 ? hi : lo) = mid;
    }
    return Oracle{0.5 * (lo + hi), shoot(lo, 8.0).mass};
  }();
  return o;
}

}  // namespace

TEST_CASE("q0 against an independent bisection oracle") {
  const auto& p = fixture::ground_state();
  CHECK(std::abs(p.q0 - oracle().q0) < 1e-4);
  CHECK(p.q0 == doctest::Approx(2.2062).epsilon(1e-4));
}

TEST_CASE("mass against the oracle's radial quadrature") {
  CHECK(fixture::ground_state().mass() == doctest::Approx(oracle().mass).epsilon(1e-4));
}

TEST_CASE("profile invariants") {
  const auto& p = fixture::ground_state();
  CHECK(radial_residual(p) < 1e-9);
  CHECK(p.dq.front() == 0.0);
  bool positive = true, decreasing = true;
  for (std::size_t k = 0; k + 1 < p.q.size(); ++k) {
    positive = positive && p.q[k] > 0;
    if (k >= 1) decreasing = decreasing && p.q[k + 1] < p.q[k];
  }
  CHECK(positive);
  CHECK(decreasing);
  const double C = p.tail_constant();
  CHECK(std::isfinite(C));
  for (double r : {6.0, 10.0, 15.0, 19.0}) CHECK(p.value(r) <= C * std::exp(-r) / std::sqrt(r) * (1 + 1e-12));
}

TEST_CASE("E(Q) vanishes relative to the kinetic term") {
  const GroundStateSummary s = summarize(fixture::ground_state());
  CHECK(std::abs(s.energy) < 1e-6 * s.gradient_sq);
  CHECK(std::abs(s.l4 - 2 * s.gradient_sq) < 1e-8 * s.l4);
}

TEST_CASE("doubling r_max leaves the mass unchanged") {
  GroundStateOptions o;
  o.r_max = 40.0;
  const RadialProfile wide = solve_ground_state(o);
  CHECK(std::abs(wide.mass() - fixture::ground_state().mass()) < 1e-10 * wide.mass());
}

TEST_CASE("bad bracket is an error") {
  GroundStateOptions o;
  o.bracket_lo = 2.3;
  o.bracket_hi = 2.5;
  CHECK_THROWS_AS(solve_ground_state(o), NumericalError);
}

TEST_CASE("sample_to_plane") {
  const auto& p = fixture::ground_state();
  const PlanarGrid g = fixture::square(16, 64);
  const double c1 = 1.0, c2 = -0.5;
  const PlanarField Q = sample_to_plane(p, g, c1, c2);
  const int i0 = static_cast<int>(std::lround((c1 - g.origin1) / g.h1()));
  const int j0 = static_cast<int>(std::lround((c2 - g.origin2) / g.h2()));
  CHECK(Q(i0, j0) == doctest::Approx(p.q0).epsilon(1e-15));
  double worst = 0.0;
  for (int a = -10; a <= 10; ++a)
    for (int b = -10; b <= 10; ++b) worst = std::max(worst, std::abs(Q(i0 + a, j0 + b) - Q(i0 - a, j0 - b)));
  CHECK(worst < 1e-12);
}

TEST_CASE("Gagliardo-Nirenberg defect") {
  const auto& p = fixture::ground_state();
  const PlanarGrid g = fixture::square(48, 384);
  const PlanarField Q = sample_to_plane(p, g);
  const double M = p.mass();
  for (double c : {0.5, 1.0, 3.0}) CHECK(std::abs(gagliardo_nirenberg_defect(c * Q, M)) < 1e-6 * c * c * c * c);
  // Gaussian: int f^2 = pi, int |grad f|^2 = pi, int f^4 = pi/2.
  const PlanarField gauss = PlanarField::sample(g, [](double x, double y) { return std::exp(-(x * x + y * y) / 2); });
  const double expected = 2 * kPi * kPi / M - kPi / 2;
  CHECK(expected > 0.0);
  CHECK(gagliardo_nirenberg_defect(gauss, M) == doctest::Approx(expected).epsilon(1e-10));
}
