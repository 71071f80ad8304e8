#include "zklab/operators.hpp"

#include "zklab/error.hpp"
#include "zklab/spectral.hpp"

namespace zk {

OperatorKind parse_operator_kind(const std::string& s) {
  if (s == "L") return OperatorKind::L;
  if (s == "A") return OperatorKind::A;
  if (s == "helmholtz") return OperatorKind::Helmholtz;
  throw ConfigError("unknown operator '" + s + "' (expected L, A or helmholtz)");
}

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::L: return "L";
    case OperatorKind::A: return "A";
    case OperatorKind::Helmholtz: return "helmholtz";
  }
  return "?";
}

PlanarField apply_Lambda(const PlanarField& f) {
  PlanarField out = f;
  out += times_y1(spectral_derivative(f, 1));
  out += times_y2(spectral_derivative(f, 2));
  return out;
}

PlanarField apply_L(const GroundStateFields& gs, const PlanarField& f) {
  require_same_grid(gs.grid, f.grid, "apply_L");
  PlanarField out = laplacian(f);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const double q = gs.Q.values[k];
    out.values[k] = -out.values[k] + (1.0 - 3.0 * q * q) * f.values[k];
  }
  return out;
}

PlanarField apply_A(const GroundStateFields& gs, const PlanarField& f) {
  require_same_grid(gs.grid, f.grid, "apply_A");
  PlanarField out = apply_symbol(f, [](double k1, double k2) { return 1.5 * k1 * k1 + 0.5 * k2 * k2; });
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const double q = gs.Q.values[k];
    out.values[k] -= 0.5 * (3.0 * q * q + 6.0 * gs.y1Q.values[k] * gs.d1Q.values[k]) * f.values[k];
  }
  const double s = 3.0 / gs.mass;
  out.axpy(s * inner_product(f, gs.Q2d1Q), gs.y1Q);
  out.axpy(s * inner_product(f, gs.y1Q), gs.Q2d1Q);
  return out;
}

PlanarField apply_helmholtz(const PlanarField& f, double gamma) {
  PlanarField out = f;
  out.axpy(-gamma, laplacian(f));
  return out;
}

LinearOperator assemble(OperatorKind kind, const GroundStateFields& gs, double gamma) {
  LinearOperator op;
  op.grid = gs.grid;
  op.name = to_string(kind);
  switch (kind) {
    case OperatorKind::L:
      op.apply = [&gs](const PlanarField& f) { return apply_L(gs, f); };
      break;
    case OperatorKind::A:
      op.apply = [&gs](const PlanarField& f) { return apply_A(gs, f); };
      break;
    case OperatorKind::Helmholtz:
      if (!(gamma > 0.0)) throw PreconditionError("assemble: helmholtz needs gamma > 0");
      op.apply = [gamma](const PlanarField& f) { return apply_helmholtz(f, gamma); };
      break;
  }
  return op;
}

}  // namespace zk
