#include "zklab/krylov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "zklab/error.hpp"
#include "zklab/spectral.hpp"

namespace zk {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

PlanarField default_precond(const PlanarField& f) { return elliptic_inverse(f, 1.0, 1.0, 1.0); }

}  // namespace

ConstraintProjector::ConstraintProjector(const std::vector<PlanarField>& ortho) : raw_(ortho) {
  for (const PlanarField& v : ortho) {
    std::vector<double> u = v.values;
    const double n0 = std::sqrt(dot(u, u));
    if (n0 == 0.0) throw PreconditionError("constraint vector is zero");
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis_) {
        const double c = dot(u, b);
        for (std::size_t k = 0; k < u.size(); ++k) u[k] -= c * b[k];
      }
    const double n1 = std::sqrt(dot(u, u));
    if (n1 < 1e-10 * n0) throw PreconditionError("constraint vectors are linearly dependent");
    for (double& x : u) x /= n1;
    basis_.push_back(std::move(u));
  }
}

void ConstraintProjector::apply(std::vector<double>& x) const {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis_) {
      const double c = dot(x, b);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] -= c * b[k];
    }
}

PlanarField ConstraintProjector::apply(PlanarField f) const {
  apply(f.values);
  return f;
}

double ConstraintProjector::violation(const PlanarField& f) const {
  double worst = 0.0;
  const double nf = norm_l2(f);
  if (nf == 0.0) return 0.0;
  for (const PlanarField& v : raw_) worst = std::max(worst, std::abs(inner_product(f, v)) / (nf * norm_l2(v)));
  return worst;
}

SolveResult solve_symmetric(const LinearOperator& op, const PlanarField& rhs,
                            const std::vector<PlanarField>& ortho, const SolveOptions& opt) {
  const PlanarGrid& g = rhs.grid;
  for (const auto& v : ortho) require_same_grid(g, v.grid, "solve_symmetric");
  ConstraintProjector proj(ortho);
  const double viol = proj.violation(rhs);
  if (viol > opt.ortho_tol && !opt.project_rhs)
    throw PreconditionError("solve_symmetric: rhs not orthogonal to constraints (" + std::to_string(viol) + ")");
  auto precond = opt.preconditioner ? opt.preconditioner : default_precond;
  auto A = [&](const PlanarField& f) { return proj.apply(op.apply(proj.apply(f))); };
  auto T = [&](const PlanarField& f) { return proj.apply(precond(proj.apply(f))); };

  const std::size_t n = g.size();
  PlanarField b = proj.apply(rhs);
  const double bnorm = norm_l2(b);
  SolveResult res{PlanarField(g), 0.0, 0, {}};
  if (bnorm == 0.0) return res;

  PlanarField r1 = b, r2 = b;
  PlanarField y = T(r1);
  double beta1 = inner_product(r1, y);
  if (beta1 <= 0.0) throw NumericalError("solve_symmetric: preconditioner not positive definite");
  beta1 = std::sqrt(beta1);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  PlanarField w(g), w1(g), w2(g), v(g);
  PlanarField& x = res.x;
  const double eps = std::numeric_limits<double>::epsilon();

  auto true_residual = [&]() { return norm_l2(b - A(x)) / bnorm; };

  for (int itn = 1; itn <= opt.max_iter; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t k = 0; k < n; ++k) v.values[k] = s * y.values[k];
    y = A(v);
    if (itn >= 2) y.axpy(-beta / oldb, r1);
    const double alfa = inner_product(v, y);
    y.axpy(-alfa / beta, r2);
    r1 = r2;
    r2 = y;
    y = T(r2);
    oldb = beta;
    const double bb = inner_product(r2, y);
    if (bb < 0.0) throw NumericalError("solve_symmetric: preconditioner not positive definite", res.history);
    beta = std::sqrt(bb);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1 = w2;
    w2 = w;
    for (std::size_t k = 0; k < n; ++k)
      w.values[k] = (v.values[k] - oldeps * w1.values[k] - delta * w2.values[k]) / gamma;
    x.axpy(phi, w);
    res.iterations = itn;
    const double est = phibar / beta1;
    res.history.push_back(est);
    if (!std::isfinite(est)) throw NumericalError("solve_symmetric: non-finite residual", res.history);
    if (est < opt.tol || beta < eps * beta1) {
      const double tr = true_residual();
      if (tr < opt.tol) {
        res.residual = tr;
        return res;
      }
      if (beta < eps * beta1) break;
    }
  }
  res.residual = true_residual();
  if (res.residual < opt.tol) return res;
  res.history.push_back(res.residual);
  throw NumericalError("solve_symmetric: no convergence after " + std::to_string(res.iterations) +
                           " iterations (residual " + std::to_string(res.residual) + ")",
                       res.history);
}

namespace {

using Mat = Eigen::MatrixXd;

Mat apply_cols(const std::function<PlanarField(const PlanarField&)>& fn, const PlanarGrid& g, const Mat& X) {
  Mat out(X.rows(), X.cols());
  PlanarField f(g);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::Map<Eigen::VectorXd>(f.values.data(), X.rows()) = X.col(c);
    PlanarField r = fn(f);
    out.col(c) = Eigen::Map<const Eigen::VectorXd>(r.values.data(), X.rows());
  }
  return out;
}

void project_cols(const ConstraintProjector& proj, Mat& X) {
  std::vector<double> tmp(X.rows());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::Map<Eigen::VectorXd>(tmp.data(), X.rows()) = X.col(c);
    proj.apply(tmp);
    X.col(c) = Eigen::Map<Eigen::VectorXd>(tmp.data(), X.rows());
  }
}

// Rayleigh-Ritz on span(S) for the pencil (GA, GB); drops near-dependent directions.
void rayleigh_ritz(const Mat& GA, const Mat& GB, int m, Eigen::VectorXd& vals, Mat& C) {
  Eigen::SelfAdjointEigenSolver<Mat> eb(GB);
  const Eigen::VectorXd& d = eb.eigenvalues();
  const double dmax = d.maxCoeff();
  std::vector<int> keep;
  for (int k = 0; k < d.size(); ++k)
    if (d(k) > 1e-13 * dmax) keep.push_back(k);
  Mat Z(GB.rows(), keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) Z.col(k) = eb.eigenvectors().col(keep[k]) / std::sqrt(d(keep[k]));
  Mat K = Z.transpose() * GA * Z;
  K = 0.5 * (K + K.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> ek(K);
  const int mm = std::min<int>(m, K.rows());
  vals = ek.eigenvalues().head(mm);
  C = Z * ek.eigenvectors().leftCols(mm);
}

}  // namespace

RayleighResult min_rayleigh(const LinearOperator& op, NormKind norm, const std::vector<PlanarField>& ortho,
                            const EigenOptions& opt) {
  const PlanarGrid& g = op.grid;
  for (const auto& v : ortho) require_same_grid(g, v.grid, "min_rayleigh");
  if (opt.block < 1) throw PreconditionError("min_rayleigh: block size must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  const int m = opt.block;
  if (static_cast<Eigen::Index>(3 * m + ortho.size()) >= n) throw PreconditionError("min_rayleigh: grid too small");
  ConstraintProjector proj(ortho);

  auto applyA = [&](const Mat& X) { return apply_cols(op.apply, g, X); };
  auto applyB = [&](const Mat& X) -> Mat {
    if (norm == NormKind::L2) return X;
    return apply_cols([](const PlanarField& f) { return f - laplacian(f); }, g, X);
  };
  auto applyT = [&](const Mat& X) { return apply_cols(default_precond, g, X); };

  // Seeded smooth start vectors.
  Mat X(n, m);
  for (int c = 0; c < m; ++c) {
    PlanarField f = random_smooth_field(g, opt.seed * 7919 + c, 8, 1.5);
    X.col(c) = Eigen::Map<const Eigen::VectorXd>(f.values.data(), n);
  }
  project_cols(proj, X);
  Mat AX = applyA(X), BX = applyB(X);
  Eigen::VectorXd lam;
  Mat C;
  {
    Mat GA = X.transpose() * AX, GB = X.transpose() * BX;
    rayleigh_ritz(0.5 * (GA + GA.transpose()), 0.5 * (GB + GB.transpose()), m, lam, C);
    X = X * C;
    AX = AX * C;
    BX = BX * C;
  }
  Mat P, AP, BP;
  RayleighResult res;
  const double area = g.cell_area();

  for (int it = 1; it <= opt.max_iter; ++it) {
    const int mx = static_cast<int>(X.cols());
    Mat R = AX - BX * lam.head(mx).asDiagonal();
    project_cols(proj, R);
    const double denom = AX.col(0).norm() + std::abs(lam(0)) * BX.col(0).norm();
    const double rel = R.col(0).norm() / std::max(denom, 1e-300);
    res.history.push_back(lam(0));
    res.iterations = it;
    res.residual = rel;
    if (!std::isfinite(lam(0))) throw NumericalError("min_rayleigh: non-finite Ritz value", res.history);
    if (rel < opt.tol) break;
    if (it == opt.max_iter)
      throw NumericalError("min_rayleigh: no convergence after " + std::to_string(it) + " iterations (residual " +
                               std::to_string(rel) + ")",
                           res.history);

    Mat W = applyT(R);
    project_cols(proj, W);
    for (Eigen::Index c = 0; c < W.cols(); ++c) W.col(c) /= std::max(W.col(c).norm(), 1e-300);
    Mat AW = applyA(W), BW = applyB(W);

    const Eigen::Index np = P.cols();
    Mat S(n, mx + W.cols() + np), AS(n, S.cols()), BS(n, S.cols());
    S.leftCols(mx) = X;
    S.middleCols(mx, W.cols()) = W;
    AS.leftCols(mx) = AX;
    AS.middleCols(mx, W.cols()) = AW;
    BS.leftCols(mx) = BX;
    BS.middleCols(mx, W.cols()) = BW;
    if (np > 0) {
      S.rightCols(np) = P;
      AS.rightCols(np) = AP;
      BS.rightCols(np) = BP;
    }
    Mat GA = S.transpose() * AS, GB = S.transpose() * BS;
    rayleigh_ritz(0.5 * (GA + GA.transpose()), 0.5 * (GB + GB.transpose()), m, lam, C);
    const Eigen::Index tail = S.cols() - mx;
    Mat Ct = C.bottomRows(tail);
    Mat Sw = S.rightCols(tail), ASw = AS.rightCols(tail), BSw = BS.rightCols(tail);
    P = Sw * Ct;
    AP = ASw * Ct;
    BP = BSw * Ct;
    X = S * C;
    AX = AS * C;
    BX = BS * C;
    for (Eigen::Index c = 0; c < P.cols(); ++c) {
      const double s = P.col(c).norm();
      if (s > 0.0) {
        P.col(c) /= s;
        AP.col(c) /= s;
        BP.col(c) /= s;
      }
    }
    // Refresh products periodically to limit drift from the recurrences.
    if (it % 25 == 0) {
      project_cols(proj, X);
      AX = applyA(X);
      BX = applyB(X);
      AP = applyA(P);
      BP = applyB(P);
    }
  }
  res.value = lam(0);
  res.vector = PlanarField(g);
  Eigen::VectorXd x0 = X.col(0);
  const double bn = std::sqrt(x0.dot(BX.col(0)) * area);
  Eigen::Map<Eigen::VectorXd>(res.vector.values.data(), n) = x0 / bn;
  return res;
}

PlanarField random_smooth_field(const PlanarGrid& g, std::uint64_t seed, int bumps, double width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u1(g.origin1 + 0.25 * g.length1, g.origin1 + 0.75 * g.length1);
  std::uniform_real_distribution<double> u2(g.origin2 + 0.25 * g.length2, g.origin2 + 0.75 * g.length2);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<std::array<double, 3>> c(bumps);
  for (auto& b : c) b = {u1(rng), u2(rng), amp(rng)};
  const double s2 = 1.0 / (width * width);
  return PlanarField::sample(g, [&](double x, double y) {
    double v = 0.0;
    for (const auto& b : c) {
      const double d1 = x - b[0], d2 = y - b[1];
      v += b[2] * std::exp(-(d1 * d1 + d2 * d2) * s2);
    }
    return v;
  });
}

double symmetry_defect(const LinearOperator& op, int pairs, std::uint64_t seed) {
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const PlanarField f = random_smooth_field(op.grid, seed + 2 * p);
    const PlanarField h = random_smooth_field(op.grid, seed + 2 * p + 1);
    const PlanarField af = op.apply(f), ah = op.apply(h);
    const double d = std::abs(inner_product(af, h) - inner_product(f, ah));
    worst = std::max(worst, d / (norm_l2(af) * norm_l2(h) + norm_l2(ah) * norm_l2(f)));
  }
  return worst;
}

}  // namespace zk
