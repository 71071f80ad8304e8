#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "zklab/error.hpp"
#include "zklab/evolution.hpp"
#include "zklab/krylov.hpp"
#include "zklab/spectral.hpp"
#include "zklab/trace.hpp"
#include "zklab/transverse.hpp"

using namespace zk;
constexpr double kPi = std::numbers::pi;

namespace {

PlanarGrid lab_grid(int n1 = 384, int n2 = 192, double width2 = 48.0) { return PlanarGrid::centered(96.0, width2, n1, n2); }

PlanarField soliton(const PlanarGrid& g, double lambda, double c1, double c2) {
  const auto& p = fixture::ground_state();
  return PlanarField::sample(g, [&](double x, double y) { return p.value(std::hypot(x - c1, y - c2) / lambda) / lambda; });
}

// Modified Gram-Schmidt against the four orthogonality directions.
PlanarField orthogonalize(PlanarField e, const GroundStateFields& q) {
  std::vector<PlanarField> basis;
  for (const PlanarField* g : {&q.Q, &q.Q3, &q.d1Q, &q.d2Q}) {
    PlanarField u = *g;
    for (const auto& v : basis) u.axpy(-inner_product(u, v), v);
    u *= 1.0 / norm_l2(u);
    basis.push_back(u);
  }
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& v : basis) e.axpy(-inner_product(e, v), v);
  return e;
}

PlanarField bump(const PlanarGrid& y, double c1, double c2, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), k1 = u(rng), k2 = u(rng);
  return PlanarField::sample(y, [&](double x, double z) {
    const double r2 = (x - c1) * (x - c1) + (z - c2) * (z - c2);
    return (a * std::cos(k1 * x + k2 * z) + b * std::sin(k2 * x - k1 * z) + 0.3) * std::exp(-r2 / 4.0);
  });
}

PlanarField admissible_eps(const FrameProfile& fp, double size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  PlanarField e = orthogonalize(bump(fp.gs.grid, u(rng), u(rng), seed + 1), fp.gs);
  e *= size / norm_l2(e);
  return e;
}

PlanarField low_pass(const PlanarField& f, double cut) {
  return apply_symbol(f, [cut](double k1, double k2) { return k1 * k1 + k2 * k2 < cut * cut ? 1.0 : 0.0; });
}

double q0() { return fixture::ground_state().q0; }

}  // namespace

TEST_CASE("weights: vartheta, zeta and the cutoffs") {
  for (int i = 0; i < 3; ++i) {
    CHECK(WeightFamily::vartheta(i, -3.0) == 0.5);
    CHECK(WeightFamily::vartheta(i, 0.5) == 0.5);
    CHECK(WeightFamily::vartheta(i, 1.7) == doctest::Approx(std::pow(1.7, i + 6)).epsilon(1e-14));
    double prev = 0.0;
    bool monotone = true;
    for (double y = -1.0; y <= 2.0; y += 1e-3) {
      const double v = WeightFamily::vartheta(i, y);
      monotone = monotone && v >= prev;
      prev = v;
    }
    CHECK(monotone);
  }
  for (double y = 0.0; y < 2.5; y += 0.01) {
    if (y >= 0.5 && y <= 1.0) continue;
    CHECK(WeightFamily::vartheta(0, y) <= WeightFamily::vartheta(1, y));
    CHECK(WeightFamily::vartheta(1, y) <= WeightFamily::vartheta(2, y));
  }

  double integral = 0.0, asym = 0.0;
  bool positive = true;
  const double h = 1e-5;
  for (double y = -12.0; y < 12.0; y += h) {
    const double z = WeightFamily::zeta(y + 0.5 * h);
    integral += z * h;
    positive = positive && z > 0.0;
    asym = std::max(asym, std::abs(WeightFamily::zeta(y) - WeightFamily::zeta(-y)));
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(positive);
  CHECK(asym == 0.0);
  CHECK(WeightFamily::zeta(0.05) == 1.0);
  CHECK(WeightFamily::zeta(0.3) == doctest::Approx(std::exp(-0.6)).epsilon(1e-15));

  CHECK(WeightFamily::chi_tilde(0.9) == 1.0);
  CHECK(WeightFamily::chi_tilde(-2.1) == 0.0);
  CHECK(WeightFamily::psi0(-2.0) == doctest::Approx(std::exp(-12.0)).epsilon(1e-15));
  CHECK(WeightFamily::psi0(-0.2) == 0.5);
  CHECK_THROWS_AS(WeightFamily(90.0), PreconditionError);
}

TEST_CASE("weights: psi_B") {
  const auto& w = fixture::weights();
  CHECK(w.gamma() == doctest::Approx(std::pow(128.0, -3.0)));
  double prev = 0.0;
  bool increasing = true;
  for (double y = -600.0; y < 200.0; y += 0.5) {
    const double v = w.psi_B(y);
    increasing = increasing && v > prev;
    prev = v;
  }
  CHECK(increasing);
  CHECK(w.psi_B(-40.0 * w.B()) < 1e-30);
  // Derivative against a five-point difference, across every breakpoint. The step must
  // resolve the dip window of zeta, about 1.7 wide on the right branch.
  double worst = 0.0;
  for (double y = -80.0; y < 40.0; y += 0.37) {
    const double d = 2e-3;
    const double fd = (w.psi_B(y - 2 * d) - w.psi_B(y + 2 * d) + 8 * (w.psi_B(y + d) - w.psi_B(y - d))) / (12 * d);
    worst = std::max(worst, std::abs(fd - w.psi_B_prime(y)) / w.psi_B_prime(y));
  }
  CHECK(worst < 1e-6);
  const std::vector<double> s = w.sample_psi_B(-90.0, 0.25, 600);
  double drift = 0.0;
  for (int k = 0; k < 600; ++k) drift = std::max(drift, std::abs(s[k] - w.psi_B(-90.0 + 0.25 * k)) / s[k]);
  CHECK(drift < 1e-11);
}

TEST_CASE("weights: psi_A and its derivative bound") {
  const auto& w = fixture::weights();
  const double A = w.A();
  double worst = 0.0, prev = 2.0;
  bool decreasing = true;
  for (double x = -10 * A; x <= 10 * A; x += 0.25) {
    const double v = w.psi_A(x);
    CHECK(v == doctest::Approx(2.0 / kPi * std::atan(std::exp(-x / A))).epsilon(1e-15));
    decreasing = decreasing && v < prev;
    prev = v;
    worst = std::max(worst, std::abs(w.psi_A_derivative(x, 2)) / std::abs(w.psi_A_derivative(x, 1)));
  }
  CHECK(decreasing);
  CHECK(worst * A <= 2.0);
  for (double x : {-50.0, 3.0, 90.0}) {
    const double d = 1e-3;
    for (int k = 1; k <= 3; ++k) {
      const double fd = (w.psi_A_derivative(x + d, k - 1) - w.psi_A_derivative(x - d, k - 1)) / (2 * d);
      CHECK(fd == doctest::Approx(w.psi_A_derivative(x, k)).epsilon(1e-6));
    }
  }
}

TEST_CASE("decompose: pure rescaled soliton") {
  const auto& ctx = fixture::context();
  // Wide in x2: at half-width 24 the periodic images of Q(./1.3) alone are 1e-8.
  const PlanarGrid lab = lab_grid(384, 256, 64.0);
  const PlanarField phi = soliton(lab, 1.3, 2.3, -1.1);
  const ModulationState st = decompose(ctx, phi, initial_guess(phi, q0()));
  CHECK(st.params.lambda == doctest::Approx(1.3).epsilon(1e-9 / 1.3));
  CHECK(std::abs(st.params.b) < 1e-9);
  CHECK(std::abs(st.params.x1 - 2.3) < 1e-9);
  CHECK(std::abs(st.params.x2 + 1.1) < 1e-9);
  CHECK(st.eps_l2 < 1e-9);
}

TEST_CASE("decompose: synthetic round trip and idempotence") {
  const auto& ctx = fixture::context();
  const PlanarGrid lab = lab_grid();
  const ModulationParams m0{0.9, -0.015, -3.4, 1.7};
  const Frame fr = ctx.frame(lab, m0);
  const FrameProfile fp = ctx.profile_on(fr.y, m0.b);
  const PlanarField e0 = admissible_eps(fp, 0.05, 3);
  const PlanarField phi = synthesize(ctx, lab, m0, e0);

  const ModulationState st = decompose(ctx, phi, initial_guess(phi, q0()));
  CHECK(st.params.lambda == doctest::Approx(m0.lambda).epsilon(1e-8));
  CHECK(std::abs(st.params.b - m0.b) < 1e-8);
  CHECK(std::abs(st.params.x1 - m0.x1) < 1e-8);
  CHECK(std::abs(st.params.x2 - m0.x2) < 1e-8);
  CHECK(st.eps_l2 == doctest::Approx(0.05).epsilon(1e-7));
  for (double r : st.residuals) CHECK(std::abs(r) < 1e-10 * st.eps_l2 + 1e-13);

  const PlanarField again = synthesize(ctx, lab, st.params, st.eps);
  const ModulationState st2 = decompose(ctx, again, st.params);
  CHECK(std::abs(st2.params.lambda - st.params.lambda) < 1e-10);
  CHECK(std::abs(st2.params.b - st.params.b) < 1e-10);
  CHECK(std::abs(st2.params.x1 - st.params.x1) < 1e-10);
  CHECK(std::abs(st2.params.x2 - st.params.x2) < 1e-10);
  CHECK(st2.iterations == 0);

  // The remainder of phi on its own frame is eps.
  CHECK(max_abs(remainder_on(ctx, phi, st.params, st.frame.y) - st.eps) < 1e-12);
}

TEST_CASE("decompose: preconditions") {
  const auto& ctx = fixture::context();
  const PlanarGrid lab = lab_grid();
  PlanarField phi = soliton(lab, 1.0, 0.0, 0.0);
  const PlanarField far = soliton(lab, 1.0, -20.0, 10.0);
  CHECK_THROWS_AS(decompose(ctx, phi + far, initial_guess(phi, q0())), PreconditionError);
  ModulationParams bad;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(decompose(ctx, phi, bad), PreconditionError);
  DecomposeOptions strict;
  strict.max_iter = 0;
  ModulationParams off = initial_guess(phi, q0());
  off.x1 += 0.3;
  CHECK_THROWS_AS(decompose(ctx, phi, off, strict), NumericalError);
}

TEST_CASE("J functionals, rho fields and the constants c1, c2") {
  const auto& ctx = fixture::context();
  const auto& s = fixture::profiles();
  // P is interpolated onto the frame; the rho2 identity needs h = 3/16 (2e-7 at h = 1/4).
  const PlanarGrid lab = lab_grid(512, 256);
  const PlanarField phi = soliton(lab, 1.0, 0.0, 0.0);
  const ModulationState st = decompose(ctx, phi, initial_guess(phi, q0()));
  const JValues z = j_functionals(RhoFields{PlanarField(st.frame.y), PlanarField(st.frame.y), PlanarField(st.frame.y)},
                                  s.theta, st.eps);
  CHECK(z.J == 0.0);
  const RhoFields rho = rho_fields(ctx, st.profile);
  const JValues j0 = j_functionals(rho, s.theta, PlanarField(st.frame.y));
  CHECK(j0.J == 0.0);
  CHECK(j0.J1 == 0.0);
  CHECK(j0.J2 == 0.0);
  CHECK(j0.J3 == 0.0);

  // c2 = (1/2) int (d/dy2 int Q dy1)^2 dy2 by finite differences and the trapezoid rule.
  auto line = [](double y2) { return full_line_integral(fixture::ground_state(), LineIntegrand::Q, y2); };
  double c2 = 0.0;
  const double h = 0.02, d = 1e-3;
  for (double y2 = -20.0; y2 <= 20.0 + 1e-12; y2 += h) {
    const double g = (line(y2 + d) - line(y2 - d)) / (2 * d);
    c2 += 0.5 * g * g * h;
  }
  CHECK(s.c2 > 0.0);
  CHECK(s.c2 == doctest::Approx(c2).epsilon(1e-5));

  // c1 is fixed so that rho2 is orthogonal to Lambda Q.
  const auto& fp = st.profile;
  CHECK(std::abs(inner_product(rho.rho2, fp.gs.LambdaQ)) < 1e-8);
  // int G d1G dy1 = G(+inf)^2 / 2 for G the left antiderivative: both normalisations give 1/2 and 1.
  CHECK(inner_product(rho.rho1, fp.gs.LambdaQ) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(inner_product(rho.rho3, fp.gs.d2Q) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("weighted norms N_i") {
  const auto& w = fixture::weights();
  const auto& ctx = fixture::context();
  const PlanarGrid lab = lab_grid(256, 128);
  const Frame fr = ctx.frame(lab, ModulationParams{});
  CHECK(weighted_norm(w, PlanarField(fr.y), 0) == 0.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PlanarField e = random_smooth_field(fr.y, seed);
    const double n0 = weighted_norm(w, e, 0), n1 = weighted_norm(w, e, 1), n2 = weighted_norm(w, e, 2);
    CHECK(n0 > 0.0);
    CHECK(n0 <= n1);
    CHECK(n1 <= n2);
  }
  CHECK_THROWS_AS(weighted_norm(w, PlanarField(fr.y), 3), PreconditionError);
}

TEST_CASE("N_i of a bump translated far left follows the tail of psi_B") {
  const auto& w = fixture::weights();
  const double B = w.B(), c = std::cbrt(B);
  // Closed-form tail: psi_B = (1/2) exp(2 (y/B + 1/3 - 1/(2 B^{1/3}))), phi_{i,B} = sqrt(2 psi_B) / 2.
  auto psi = [&](double y) { return 0.5 * std::exp(2.0 * (y / B + 1.0 / 3.0 - 0.5 / c)); };
  std::vector<double> centres, logs;
  for (double yc : {-3 * B, -4 * B, -5 * B, -6 * B}) {
    const PlanarGrid g(32.0, 32.0, 128, 64, yc - 16.0, -16.0);
    const PlanarField e = PlanarField::sample(g, [&](double x, double y) {
      return std::exp(-((x - yc) * (x - yc) + y * y) / 4.0);
    });
    const PlanarField e1 = spectral_derivative(e, 1), e2 = spectral_derivative(e, 2);
    double oracle = 0.0;
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j) {
        const double p = psi(g.x1(i));
        oracle += (e1(i, j) * e1(i, j) + e2(i, j) * e2(i, j)) * p + e(i, j) * e(i, j) * 0.5 * std::sqrt(2 * p);
      }
    oracle *= g.cell_area();
    const double n = weighted_norm(w, e, 0);
    CHECK(n == doctest::Approx(oracle).epsilon(1e-10));
    centres.push_back(yc);
    logs.push_back(std::log(n));
  }
  // Dominant term exp(y/B); the gradient part adds exp(2y/B) and is already small at -3B.
  const double slope = (logs.back() - logs.front()) / (centres.back() - centres.front());
  CHECK(slope * B == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("Lyapunov functional") {
  const auto& ctx = fixture::context();
  const auto& w = fixture::weights();
  const double theta = fixture::profiles().theta;
  // The eta relations lean on LQ = -2Q^3 and L grad Q = 0 holding on the grid.
  const PlanarGrid lab = lab_grid(768, 384);
  const Frame fr = ctx.frame(lab, ModulationParams{});
  const FrameProfile fp = ctx.profile_on(fr.y, 0.0);

  const Lyapunov zero = lyapunov(w, fp, PlanarField(fr.y), 0.0, theta, 1, 1);
  CHECK(zero.F == 0.0);
  CHECK(zero.P == 0.0);
  CHECK(zero.M == 0.0);
  CHECK(zero.Jij == 0.0);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) CHECK(j_weight(0.0, theta, i, j) == 0.0);
  CHECK(j_weight(0.1, theta, 2, 2) == doctest::Approx(std::pow(0.9, -2.0 * theta - 16.0) - 1.0));
  CHECK_THROWS_AS(lyapunov(w, fp, PlanarField(fr.y), 1.0, theta, 1, 1), PreconditionError);
  CHECK_THROWS_AS(lyapunov(w, fp, PlanarField(fr.y), 0.0, theta, 0, 1), PreconditionError);

  double lo = 1e300, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const PlanarField e = admissible_eps(fp, 0.05, 100 + seed);
    const Lyapunov L = lyapunov(w, fp, e, 0.0, theta, 1, 2);
    for (double o : L.eta_orthogonality) CHECK(std::abs(o) < 1e-8);
    const double ratio = L.M / weighted_norm(w, e, 1);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  INFO("M/N band [" << lo << ", " << hi << "]");
  CHECK(lo > 0.0);
  CHECK(hi < 10.0);
}

TEST_CASE("Mod and the remainders vanish where every factor does") {
  const auto& ctx = fixture::context();
  const PlanarGrid lab = lab_grid(256, 128);
  const Frame fr = ctx.frame(lab, ModulationParams{});
  const FrameProfile fp = ctx.profile_on(fr.y, 0.0);
  ParameterRates r;
  r.x1_s_over_lambda = 1.0;
  const ModVectors zero = mod_vectors(fp, PlanarField(fr.y), r);
  CHECK(max_abs(zero.Mod) == 0.0);
  CHECK(max_abs(zero.Mod_eta) == 0.0);
  const PlanarField e = admissible_eps(fp, 0.05, 9);
  const ModVectors mv = mod_vectors(fp, e, r);
  CHECK(max_abs(mv.R_b) == 0.0);
  CHECK(max_abs(mv.R_NL) > 0.0);
  CHECK(local_norm(PlanarField(fr.y)) == 0.0);
}

TEST_CASE("the eps equation holds to finite-difference order along a simulated run") {
  const auto& ctx = fixture::context();
  const PlanarGrid lab = lab_grid(512, 256);
  const ModulationParams m0{1.0, -0.02, 0.0, 0.0};
  EvolutionOptions o;
  o.dt = 0.005;
  o.stride = 1;
  o.frame_speed = 1.0;
  const Trajectory tr = evolve(synthesize(ctx, lab, m0), 8 * o.dt, o);
  REQUIRE(tr.snapshots.size() == 9);
  std::vector<ModulationParams> m;
  for (const auto& f : tr.snapshots) m.push_back(decompose(ctx, f, initial_guess(f, q0(), -0.02)).params);
  const ModulationState mid = decompose(ctx, tr.snapshots[4], m[4]);
  const PlanarGrid& y = mid.frame.y;

  // s by the trapezoid rule on lambda^{-3}.
  std::vector<double> s(9, 0.0);
  for (int k = 1; k < 9; ++k)
    s[k] = s[k - 1] + 0.5 * o.dt * (std::pow(m[k].lambda, -3.0) + std::pow(m[k - 1].lambda, -3.0));

  const double cut = 2.0;
  std::vector<double> res;
  for (int w : {1, 2, 4}) {
    const double ds = s[4 + w] - s[4 - w];
    const PlanarField eps_s =
        (1.0 / ds) * (remainder_on(ctx, tr.snapshots[4 + w], m[4 + w], y) - remainder_on(ctx, tr.snapshots[4 - w], m[4 - w], y));
    ParameterRates r;
    r.lambda_s_over_lambda = (m[4 + w].lambda - m[4 - w].lambda) / ds / m[4].lambda;
    r.x1_s_over_lambda = (m[4 + w].x1 - m[4 - w].x1) / ds / m[4].lambda;
    r.x2_s_over_lambda = (m[4 + w].x2 - m[4 - w].x2) / ds / m[4].lambda;
    r.b_s = (m[4 + w].b - m[4 - w].b) / ds;
    const PlanarField rhs = eps_equation_rhs(mid.profile, mid.eps, r);
    res.push_back(norm_l2(low_pass(eps_s - rhs, cut)));
  }
  INFO("low-pass residuals " << res[0] << " " << res[1] << " " << res[2]);
  CHECK(res[1] / res[0] > 3.0);
  CHECK(res[1] / res[0] < 5.0);
  CHECK(res[2] / res[1] > 3.0);
  CHECK(res[2] / res[1] < 5.0);
}

TEST_CASE("pure-soliton trace and mass monotonicity") {
  const auto& ctx = fixture::context();
  const auto& w = fixture::weights();
  const PlanarGrid lab = lab_grid(512, 256);
  const PlanarField phi = soliton(lab, 1.0, -10.0, 0.0);
  EvolutionOptions o;
  o.dt = 0.01;
  o.stride = 10;
  o.frame_speed = 1.0;
  const Trajectory tr = evolve(phi, 1.0, o);
  TraceOptions to;
  to.jobs = 2;
  const ModulationTrace mt = trace(ctx, tr, to);
  REQUIRE(mt.rows.size() == tr.snapshots.size());
  for (std::size_t k = 0; k < mt.rows.size(); ++k) {
    const TraceRow& r = mt.rows[k];
    REQUIRE(r.ok);
    CHECK(std::abs(r.params.b) < 1e-6);
    CHECK(std::abs(r.params.lambda - 1.0) < 1e-6);
    CHECK(std::abs(mt.lambda_law[k]) < 1e-6);
    if (k > 0) CHECK(r.s > mt.rows[k - 1].s);
  }
  CHECK(mt.rows.back().params.x1 == doctest::Approx(-9.0).epsilon(1e-6));

  const double A = w.A(), x0 = 10 * A;
  const std::vector<double> I = mass_monotonicity(tr, mt, x0, w);
  REQUIRE(I.size() == tr.snapshots.size());
  for (double v : I) CHECK(v <= I.back() + A * std::exp(-x0 / A));

  Trajectory zero = tr;
  for (auto& f : zero.snapshots) f = PlanarField(f.grid);
  for (double v : mass_monotonicity(zero, mt, x0, w)) CHECK(v == 0.0);
}

TEST_CASE("differentiate is exact on quadratics over uneven nodes") {
  const std::vector<double> s{0.0, 0.1, 0.35, 0.4, 0.9, 1.3};
  std::vector<double> f;
  for (double v : s) f.push_back(2 * v * v - 3 * v + 1);
  const std::vector<double> d = differentiate(s, f);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(d[k] == doctest::Approx(4 * s[k] - 3).epsilon(1e-12));
}

TEST_CASE("blow-up rate series on a self-similar family") {
  const auto& p = fixture::ground_state();
  const PlanarGrid g = PlanarGrid::centered(48, 48, 384, 384);
  const double T = 0.0;
  std::vector<double> t, grad;
  for (double tt : {0.5, 1.0, 2.0, 4.0}) {
    const double lam = std::cbrt(tt - T);
    const PlanarField f = PlanarField::sample(g, [&](double x, double y) { return p.value(std::hypot(x, y) / lam) / lam; });
    t.push_back(tt);
    grad.push_back(std::sqrt(gradient_norm_sq(f)));
  }
  const std::vector<double> series = blowup_rate_bound(t, grad, T);
  for (double v : series) CHECK(v == doctest::Approx(series.front()).epsilon(1e-8));
  CHECK_THROWS_AS(blowup_rate_bound(t, grad, 5.0), PreconditionError);
}
