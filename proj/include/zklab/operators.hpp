#pragma once

#include <string>

#include "zklab/krylov.hpp"
#include "zklab/radial.hpp"

namespace zk {

enum class OperatorKind { L, A, Helmholtz };

OperatorKind parse_operator_kind(const std::string& s);
std::string to_string(OperatorKind k);

// Lambda f = f + y . grad f, derivatives taken spectrally.
PlanarField apply_Lambda(const PlanarField& f);

// L = -Laplacian + 1 - 3 Q^2
PlanarField apply_L(const GroundStateFields& gs, const PlanarField& f);
// A = -(3/2) d1^2 - (1/2) d2^2 - (1/2)(3 Q^2 + 6 y1 Q d1Q) plus the rank-two correction
// (3/|Q|^2) [ (f, Q^2 d1Q) y1 Q + (f, y1 Q) Q^2 d1Q ].
PlanarField apply_A(const GroundStateFields& gs, const PlanarField& f);
// (1 - gamma Laplacian) f
PlanarField apply_helmholtz(const PlanarField& f, double gamma);

// gs must outlive the returned operator.
LinearOperator assemble(OperatorKind kind, const GroundStateFields& gs, double gamma = 0.0);

}  // namespace zk
