#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zklab/grid.hpp"

namespace zk {

struct LinearOperator {
  PlanarGrid grid;
  std::function<PlanarField(const PlanarField&)> apply;
  bool symmetric = true;
  std::string name;
};

// Builds the Euclidean projector onto span(ortho)^perp.
class ConstraintProjector {
 public:
  explicit ConstraintProjector(const std::vector<PlanarField>& ortho);
  void apply(std::vector<double>& x) const;
  PlanarField apply(PlanarField f) const;
  // Largest |(f, v)| / (|f| |v|) over the constraints.
  double violation(const PlanarField& f) const;
  std::size_t rank() const { return basis_.size(); }

 private:
  std::vector<std::vector<double>> basis_;
  std::vector<PlanarField> raw_;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 3000;
  bool project_rhs = false;
  double ortho_tol = 1e-8;
  // Defaults to (1 - Laplacian)^{-1} when empty.
  std::function<PlanarField(const PlanarField&)> preconditioner;
};

struct SolveResult {
  PlanarField x;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

// Preconditioned MINRES on span(ortho)^perp. Throws PreconditionError when
// rhs is not orthogonal and project_rhs is false, NumericalError on stall.
SolveResult solve_symmetric(const LinearOperator& op, const PlanarField& rhs,
                            const std::vector<PlanarField>& ortho, const SolveOptions& opt = {});

enum class NormKind { L2, H1 };

struct EigenOptions {
  double tol = 1e-9;
  int max_iter = 500;
  int block = 3;
  std::uint64_t seed = 0;
};

struct RayleighResult {
  double value = 0.0;
  PlanarField vector;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

// inf (op f, f) / |f|^2 over f perp ortho, via block LOBPCG with (1 - Laplacian)^{-1}.
RayleighResult min_rayleigh(const LinearOperator& op, NormKind norm, const std::vector<PlanarField>& ortho,
                            const EigenOptions& opt = {});

// Independent route: assemble op densely, deflate the constraints and call LAPACK.
// Limited to grids with at most max_points points.
double dense_min_rayleigh(const LinearOperator& op, NormKind norm, const std::vector<PlanarField>& ortho,
                          std::size_t max_points = 6400);

// max |(Af, g) - (f, Ag)| / (|Af||g|) over seeded random smooth pairs.
double symmetry_defect(const LinearOperator& op, int pairs, std::uint64_t seed);

// Smooth random field: Gaussian bumps with random centres inside the box.
PlanarField random_smooth_field(const PlanarGrid& grid, std::uint64_t seed, int bumps = 6, double width = 2.0);

}  // namespace zk
