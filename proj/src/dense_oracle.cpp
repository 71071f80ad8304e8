#include <lapacke.h>

#include <Eigen/Dense>
#include <cmath>

#include "zklab/error.hpp"
#include "zklab/krylov.hpp"
#include "zklab/spectral.hpp"

namespace zk {

// Symmetric transform K = M^{-1/2} A M^{-1/2}, built column by column from
// unit vectors, so the H1 pencil becomes a standard problem. Constraints are
// removed by an orthogonal deflation shift instead of projection.
double dense_min_rayleigh(const LinearOperator& op, NormKind norm, const std::vector<PlanarField>& ortho,
                          std::size_t max_points) {
  const PlanarGrid& g = op.grid;
  const std::size_t n = g.size();
  if (n > max_points) throw PreconditionError("dense_min_rayleigh: grid exceeds " + std::to_string(max_points) + " points");
  for (const auto& v : ortho) require_same_grid(g, v.grid, "dense_min_rayleigh");

  auto half = [&](const PlanarField& f) { return norm == NormKind::H1 ? bessel_power(f, -0.5) : f; };
  const Eigen::Index N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd K(N, N);
  PlanarField e(g);
  for (Eigen::Index j = 0; j < N; ++j) {
    std::fill(e.values.begin(), e.values.end(), 0.0);
    e.values[j] = 1.0;
    const PlanarField col = half(op.apply(half(e)));
    K.col(j) = Eigen::Map<const Eigen::VectorXd>(col.values.data(), N);
  }
  K = 0.5 * (K + K.transpose()).eval();

  if (!ortho.empty()) {
    Eigen::MatrixXd W(N, static_cast<Eigen::Index>(ortho.size()));
    for (std::size_t c = 0; c < ortho.size(); ++c) {
      const PlanarField w = half(ortho[c]);
      W.col(c) = Eigen::Map<const Eigen::VectorXd>(w.values.data(), N);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
    const Eigen::MatrixXd U = qr.householderQ() * Eigen::MatrixXd::Identity(N, W.cols());
    const Eigen::MatrixXd KU = K * U;
    const Eigen::MatrixXd UKU = U.transpose() * KU;
    K -= KU * U.transpose();
    K -= U * KU.transpose();
    K += U * UKU * U.transpose();
    const double shift = 10.0 * K.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    K += shift * U * U.transpose();
  }

  lapack_int found = 0;
  double w = 0.0, z = 0.0;
  std::vector<lapack_int> isuppz(2);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'L', static_cast<lapack_int>(N), K.data(),
                                         static_cast<lapack_int>(N), 0.0, 0.0, 1, 1, 0.0, &found, &w, &z, 1,
                                         isuppz.data());
  if (info != 0 || found != 1) throw NumericalError("dense_min_rayleigh: LAPACK dsyevr failed");
  return w;
}

}  // namespace zk
