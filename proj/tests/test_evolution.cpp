#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "zklab/error.hpp"
#include "zklab/evolution.hpp"
#include "zklab/spectral.hpp"

using namespace zk;
constexpr double kPi = std::numbers::pi;

namespace {

PlanarField soliton(const PlanarGrid& g, double lambda, double c1 = 0.0) {
  const auto& p = fixture::ground_state();
  return PlanarField::sample(g, [&](double x, double y) { return lambda * p.value(lambda * std::hypot(x - c1, y)); });
}

double centroid1(const PlanarField& f) {
  const PlanarGrid& g = f.grid;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const double w = f(i, j) * f(i, j);
      num += g.x1(i) * w;
      den += w;
    }
  return num / den;
}

PlanarField reflect1(const PlanarField& f) {
  PlanarField r(f.grid);
  const int n = f.grid.n1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < f.grid.n2; ++j) r(i, j) = f((n - i) % n, j);
  return r;
}

double soliton_error(double dt, double frame_speed = 0.0) {
  const PlanarGrid g = fixture::square(32, 192);
  EvolutionOptions o;
  o.dt = dt;
  o.frame_speed = frame_speed;
  o.stride = 1000000;
  const Trajectory tr = evolve(soliton(g, 1.0), 1.0, o);
  return norm_l2(tr.snapshots.back() - soliton(g, 1.0, 1.0));
}

}  // namespace

TEST_CASE("linear flow rotates each mode by k1 |k|^2 t") {
  const PlanarGrid g(2 * kPi, 2 * kPi, 32, 32, 0.0, 0.0);
  const double k1 = 3, k2 = -2, w = k1 * (k1 * k1 + k2 * k2);
  const PlanarField f = PlanarField::sample(g, [&](double x, double y) { return std::cos(k1 * x + k2 * y); });
  EvolutionOptions o;
  o.dt = 0.01;
  o.nonlinear = false;
  o.stride = 1000;
  const double t = 0.37;
  const Trajectory tr = evolve(f, t, o);
  const PlanarField exact = PlanarField::sample(g, [&](double x, double y) { return std::cos(k1 * x + k2 * y + w * t); });
  CHECK(max_abs(tr.snapshots.back() - exact) < 1e-12);
}

TEST_CASE("zero is a fixed point") {
  const PlanarField z(fixture::square(16, 32));
  CHECK(max_abs(step(z, 0.01)) == 0.0);
  const Invariants inv = invariants(z);
  CHECK(inv.mass == 0.0);
  CHECK(inv.energy == 0.0);
}

TEST_CASE("soliton moves one unit in unit time") {
  // In the co-moving frame the residual is the periodic-image floor of the box, about 5e-7.
  CHECK(soliton_error(0.01, 1.0) < 1e-6);
}

TEST_CASE("time stepping is fourth order") {
  // Lab frame; coarser steps are still pre-asymptotic (ratios 5.5 and 8.6 at dt = 0.04, 0.02).
  const double e1 = soliton_error(0.01), e2 = soliton_error(0.005);
  INFO("errors " << e1 << " " << e2);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("invariants of c Q") {
  const auto& p = fixture::ground_state();
  const PlanarGrid g = fixture::square(48, 384);
  const PlanarField Q = sample_to_plane(p, g);
  const Invariants q = invariants(Q);
  CHECK(q.mass == doctest::Approx(p.mass()).epsilon(1e-10));
  CHECK(std::abs(q.energy) < 1e-6);
  const double c = 0.9;
  const Invariants s = invariants(c * Q);
  CHECK(s.mass == doctest::Approx(0.81 * q.mass).epsilon(1e-12));
  const double grad_sq = q.gradient * q.gradient;
  CHECK(s.energy == doctest::Approx(c * c * (1 - c * c) / 2 * grad_sq).epsilon(1e-6));
}

TEST_CASE("conservation over a transit of one box length") {
  const PlanarGrid g = fixture::square(32, 192);
  EvolutionOptions o;
  o.dt = 0.02;
  o.stride = 400;
  o.frame_speed = 1.0;
  const Trajectory tr = evolve(soliton(g, 1.0), 32.0, o);
  CHECK_FALSE(tr.halted);
  CHECK(tr.mass_drift() < 1e-8);
  CHECK(tr.energy_drift() < 1e-6);
  for (std::size_t k = 1; k < tr.times.size(); ++k) REQUIRE(tr.times[k] > tr.times[k - 1]);
  CHECK(tr.times.back() == doctest::Approx(32.0).epsilon(1e-14));
  CHECK(tr.mass.size() == tr.times.size());
}

TEST_CASE("rescaled soliton travels at lambda^2") {
  const PlanarGrid g = fixture::square(32, 256);
  EvolutionOptions o;
  o.dt = 0.005;
  o.stride = 400;
  const Trajectory tr = evolve(soliton(g, 1.2, -4.0), 2.0, o);
  const double speed = (centroid1(tr.snapshots.back()) - centroid1(tr.snapshots.front())) / 2.0;
  CHECK(speed == doctest::Approx(1.44).epsilon(1e-3 / 1.44));
}

TEST_CASE("reflection in x1 reverses time") {
  // ETDRK4 is not self-adjoint, so the defect is a local error: fifth order in dt.
  const PlanarGrid g = fixture::square(24, 64);
  const PlanarField f = 0.8 * soliton(g, 1.0) + 0.2 * random_smooth_field(g, 17);
  auto defect = [&](double dt) { return max_abs(reflect1(step(reflect1(step(f, dt)), dt)) - f); };
  const double coarse = defect(0.005), fine = defect(0.0025);
  INFO("defects " << coarse << " " << fine);
  CHECK(fine < 1e-6 * max_abs(f));
  CHECK(coarse / fine > 16.0);
}

TEST_CASE("subcritical data stays bounded in H1") {
  const PlanarGrid g = fixture::square(32, 192);
  const PlanarField f = 0.9 * soliton(g, 1.0) + 0.05 * random_smooth_field(g, 23);
  REQUIRE(invariants(f).mass < fixture::ground_state().mass());
  EvolutionOptions o;
  o.dt = 0.01;
  o.stride = 100;
  const Trajectory tr = evolve(f, 5.0, o);
  double worst = 0.0;
  for (double v : tr.gradient) worst = std::max(worst, v);
  CHECK(worst <= 2.0 * tr.gradient.front());
}

TEST_CASE("evolve preconditions and halting") {
  const PlanarField z(fixture::square(16, 32));
  EvolutionOptions o;
  o.stride = 0;
  CHECK_THROWS_AS(evolve(z, 1.0, o), PreconditionError);
  CHECK_THROWS_AS(evolve(z, -1.0), PreconditionError);

  // 1.5 Q carries 2.25 times the critical mass and focuses; a gradient cap of 1.5 trips quickly.
  const PlanarGrid g = fixture::square(24, 128);
  EvolutionOptions h;
  h.dt = 0.002;
  h.halt_gradient_growth = 1.5;
  const Trajectory tr = evolve(1.5 * soliton(g, 1.0), 5.0, h);
  CHECK(tr.halted);
  CHECK_FALSE(tr.halt_reason.empty());
  CHECK(tr.times.back() < 5.0);
}
