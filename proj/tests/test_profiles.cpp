#include <cmath>
#include <cstdio>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "zklab/error.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/spectral.hpp"
#include "zklab/transverse.hpp"

using namespace zk;
constexpr double kPi = std::numbers::pi;

namespace {

const TransverseProfile& transverse() {
  static const TransverseProfile t = transverse_profile(fixture::ground_state());
  return t;
}

double line_Q(double y2) { return full_line_integral(fixture::ground_state(), LineIntegrand::Q, y2); }

}  // namespace

TEST_CASE("F(y2) = y2 d/dy2 int Q dy1") {
  const double h = 5e-3;
  double worst = 0.0;
  for (double y2 : {0.0, 0.3, 1.0, 2.5, 4.0, 7.0}) {
    const double d = (-line_Q(y2 + 2 * h) + 8 * line_Q(y2 + h) - 8 * line_Q(y2 - h) + line_Q(y2 - 2 * h)) / (12 * h);
    const double F = full_line_integral(fixture::ground_state(), LineIntegrand::LambdaQ, y2);
    worst = std::max(worst, std::abs(F - y2 * d));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("F is even, vanishes at 0, and integrates to -int Q") {
  const auto& t = transverse();
  const int n = static_cast<int>(t.F.size());
  double asym = 0.0;
  for (int j = 1; j < n / 2; ++j) asym = std::max(asym, std::abs(t.F[j] - t.F[n - j]));
  CHECK(asym < 1e-12);
  CHECK(std::abs(t.F[n / 2]) < 1e-12);
  double sum = 0.0;
  for (double v : t.F) sum += v;
  sum *= t.y2[1] - t.y2[0];
  const PlanarField Q = sample_to_plane(fixture::ground_state(), fixture::square(48, 384));
  CHECK(sum == doctest::Approx(-integral(Q)).epsilon(1e-8));
}

TEST_CASE("theta") {
  const double theta = compute_theta(transverse());
  CHECK(theta == doctest::Approx(1.66).epsilon(0.02 / 1.66));
  CHECK(theta > 0.0);
  CHECK(theta < 2.0);
  CHECK(fixture::profiles().theta == doctest::Approx(theta).epsilon(1e-14));
}

TEST_CASE("theta tends to 2 as F_hat concentrates at xi = 0") {
  // F = exp(-y^2 / (2 s^2)) has |F_hat|^2 = s^2 exp(-s^2 xi^2); the ratio only sees those two integrals.
  double previous = 0.0;
  for (double s : {2.0, 8.0, 32.0}) {
    TransverseProfile t;
    t.F = {0.0};
    t.F_sq = s * std::sqrt(kPi);
    const int n = 200000;
    const double cut = 12.0 / s, d = 2 * cut / n;
    double w = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double xi = -cut + k * d;
      w += (k == 0 || k == n ? 0.5 : 1.0) * s * s * std::exp(-s * s * xi * xi) / (1 + xi * xi);
    }
    t.weighted = w * d;
    const double theta = compute_theta(t);
    CHECK(theta > previous);
    CHECK(theta < 2.0);
    previous = theta;
  }
  CHECK(previous == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("P: identities, orthogonality and decay") {
  const auto& s = fixture::profiles();
  CHECK(s.PQ > 0.0);
  CHECK(std::abs(s.PQ - 0.25 * s.F_sq) / s.PQ < 1e-4);
  CHECK(std::abs(inner_product(s.P, s.gs.d1Q)) < 1e-10);
  CHECK(std::abs(inner_product(s.P, s.gs.d2Q)) < 1e-10);
  CHECK(s.interior_residual < 1e-6);
  CHECK(s.decay.right_half_plane >= 0.25);
  CHECK(std::abs(s.c1 - s.c1_closed_form) < 1e-8);
}

TEST_CASE("Q_b at b = 0 is Q bit-exactly and Psi_0 vanishes") {
  const auto& s = fixture::profiles();
  const LocalizedProfile q0 = build_Qb(s, 0.0);
  CHECK(q0.Qb.values == s.gs.Q.values);
  // Three derivatives of Q sit at the spectral floor of h = 1/8 (about 4e-9); h = 1/16 clears 1e-9.
  CHECK(norm_l2(psi_b(s, q0)) < 1e-8);
  LocalizedProfile fine;
  fine.Qb = sample_to_plane(fixture::ground_state(), fixture::square(64, 1024));
  CHECK(norm_l2(psi_b(s, fine)) < 1e-9);
}

TEST_CASE("Q_b preconditions") {
  const auto& s = fixture::profiles();
  CHECK_THROWS_AS(build_Qb(s, 0.11), PreconditionError);
  const double bmin = min_admissible_b(s);
  CHECK(bmin < 0.01);
  CHECK_THROWS_AS(build_Qb(s, 0.5 * bmin), PreconditionError);
  CHECK_NOTHROW(build_Qb(s, 0.5 * bmin, false));
}

TEST_CASE("dQ_b/db against a central difference in b") {
  const auto& s = fixture::profiles();
  for (double b : {-0.03, 0.02}) {
    // The cutoff edge is steep: the stencil error constant there is large.
    const double d = 1e-5;
    auto Qb = [&](double bb) { return build_Qb(s, bb).Qb; };
    const PlanarField fd = (1.0 / (12 * d)) * (Qb(b - 2 * d) - Qb(b + 2 * d) + 8.0 * (Qb(b + d) - Qb(b - d)));
    const PlanarField an = dQb_db(s, b);
    CHECK(max_abs(fd - an) < 1e-6 * max_abs(an));
  }
}

TEST_CASE("pointwise bound on Q_b") {
  const auto& s = fixture::profiles();
  for (double b : {-0.05, -0.03, -0.01, 0.01, 0.03, 0.05}) {
    const RemainderSample r = remainder_sample(s, b);
    INFO("b = " << b << ", constant " << r.bound_constant);
    CHECK(r.bound_constant <= 20.0);
  }
}

TEST_CASE("(Psi_b, Q) defect is cubic in b") {
  const auto& s = fixture::profiles();
  std::vector<double> bs{-0.05, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.05}, psi;
  for (double b : bs) psi.push_back(remainder_sample(s, b).psi_defect);
  CHECK(fit_power_law(bs, psi).exponent >= 2.9);
}

TEST_CASE("power-law fit recovers a synthetic law") {
  std::vector<double> b{-0.05, -0.02, 0.01, 0.03}, y;
  for (double v : b) y.push_back(3.0 * std::pow(std::abs(v), 2.5));
  const PowerFit f = fit_power_law(b, y);
  CHECK(f.exponent == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.constant == doctest::Approx(3.0).epsilon(1e-10));
}
