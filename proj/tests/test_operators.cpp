#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "zklab/certify.hpp"
#include "zklab/krylov.hpp"
#include "zklab/operators.hpp"
#include "zklab/spectral.hpp"

using namespace zk;

namespace {

const GroundStateFields& fields() {
  static const GroundStateFields gs = sample_fields(fixture::ground_state(), fixture::square(48, 384));
  return gs;
}

double h1_relative(const PlanarField& residual, const PlanarField& ref) {
  return norm_l2(residual) / std::sqrt(h1_norm_sq(ref));
}

}  // namespace

TEST_CASE("L: translation kernel, scaling identity and LQ = -2Q^3") {
  const auto& gs = fields();
  CHECK(h1_relative(apply_L(gs, gs.d1Q), gs.d1Q) < 1e-6);
  CHECK(h1_relative(apply_L(gs, gs.d2Q), gs.d2Q) < 1e-6);
  CHECK(h1_relative(apply_L(gs, gs.LambdaQ) + 2.0 * gs.Q, gs.LambdaQ) < 1e-6);
  CHECK(max_abs(apply_L(gs, gs.Q) + 2.0 * gs.Q3) < 1e-9);
}

TEST_CASE("L and A are symmetric on random pairs") {
  const auto& gs = fields();
  CHECK(symmetry_defect(assemble(OperatorKind::L, gs), 10, 1) < 1e-10);
  CHECK(symmetry_defect(assemble(OperatorKind::A, gs), 10, 2) < 1e-10);
}

TEST_CASE("A on the constant field: parity removes both projections") {
  const auto& gs = fields();
  const PlanarField one(gs.grid, 1.0);
  PlanarField expected(gs.grid);
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const double q = gs.Q.values[k];
    expected.values[k] = -1.5 * q * q - 3.0 * gs.y1Q.values[k] * gs.d1Q.values[k];
  }
  CHECK(max_abs(apply_A(gs, one) - expected) < 1e-9 * max_abs(expected));
}

TEST_CASE("A's rank-two term on y1 Q") {
  const auto& gs = fields();
  const auto& p = fixture::ground_state();
  const PlanarField f = gs.y1Q;
  // Local part of A written out independently.
  PlanarField local = -1.5 * spectral_derivative(f, 1, 2) - 0.5 * spectral_derivative(f, 2, 2);
  for (std::size_t k = 0; k < local.size(); ++k) {
    const double q = gs.Q.values[k];
    local.values[k] -= 0.5 * (3 * q * q + 6 * gs.y1Q.values[k] * gs.d1Q.values[k]) * f.values[k];
  }
  // (y1 Q, Q^2 d1Q) = (1/4) int y1 d1(Q^4) = -(1/4) int Q^4.
  const double a = -0.25 * p.l4();
  CHECK(inner_product(f, gs.Q2d1Q) == doctest::Approx(a).epsilon(1e-10));
  const double c = 3.0 / p.mass();
  const PlanarField expected = c * (a * f + inner_product(f, f) * gs.Q2d1Q);
  CHECK(max_abs(apply_A(gs, f) - local - expected) < 1e-10 * max_abs(expected));
}

TEST_CASE("Helmholtz inverse round-trips") {
  const PlanarGrid g = fixture::square(24, 96);
  const PlanarField f = random_smooth_field(g, 5);
  const double gamma = std::pow(128.0, -3.0) * 1e5;
  const PlanarField back = apply_helmholtz(elliptic_inverse(f, 1.0, gamma, gamma), gamma);
  CHECK(max_abs(back - f) < 1e-12 * max_abs(f));
}

TEST_CASE("projection excludes d2Q from the constrained quotient") {
  const auto& gs = fields();
  const ConstraintProjector P({gs.Q3, gs.d1Q, gs.d2Q});
  const PlanarField f = gs.d2Q;
  const double before = inner_product(apply_L(gs, f), f) / h1_norm_sq(f);
  CHECK(std::isfinite(before));
  CHECK(norm_l2(P.apply(f)) < 1e-12 * norm_l2(f));
}

TEST_CASE("coarse certification: constraints order the minima") {
  CertifyOptions opt;
  opt.box = 16.0;
  opt.resolutions = {48, 56, 64};
  opt.oracle_n = 40;
  opt.wide_box = 0.0;
  const auto& p = fixture::ground_state();
  const CoercivityReport L = certify(p, OperatorKind::L, opt);
  CHECK(L.positive);
  CHECK(L.mu.back() > 0.0);
  CHECK(L.unconstrained_mu < 0.0);
  CHECK(L.enlarged_mu >= L.mu.back() - 1e-9);
  CHECK(L.oracle_mu == doctest::Approx(L.oracle_lobpcg_mu).epsilon(1e-6));

  const CoercivityReport A = certify(p, OperatorKind::A, opt);
  CHECK(A.positive);
  CHECK(A.unconstrained_mu < A.mu.back());
  CHECK(A.enlarged_mu >= A.mu.back() - 1e-9);
  CHECK(A.oracle_mu == doctest::Approx(A.oracle_lobpcg_mu).epsilon(1e-6));
}
