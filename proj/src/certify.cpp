#include "zklab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "zklab/error.hpp"

namespace zk {
namespace {

struct Constrained {
  GroundStateFields gs;
  std::vector<PlanarField> ortho, enlarged;
  std::vector<std::string> names;
};

Constrained setup(const RadialProfile& p, OperatorKind kind, double box, int n) {
  Constrained c;
  c.gs = sample_fields(p, PlanarGrid::centered(box, box, n, n));
  if (kind == OperatorKind::L) {
    c.ortho = {c.gs.Q3, c.gs.d1Q, c.gs.d2Q};
    c.names = {"Q^3", "d1 Q", "d2 Q"};
    c.enlarged = c.ortho;
    c.enlarged.push_back(c.gs.Q);
  } else if (kind == OperatorKind::A) {
    c.ortho = {c.gs.Q, c.gs.d1Q, c.gs.d2Q};
    c.names = {"Q", "d1 Q", "d2 Q"};
    c.enlarged = c.ortho;
    c.enlarged.push_back(c.gs.Q3);
  } else {
    throw PreconditionError("certify: only L and A carry coercivity claims");
  }
  return c;
}

}  // namespace

double richardson_extrapolate(const std::vector<double>& h, const std::vector<double>& mu) {
  if (h.size() != 3 || mu.size() != 3) return mu.empty() ? 0.0 : mu.back();
  const double d12 = mu[0] - mu[1], d23 = mu[1] - mu[2];
  if (std::abs(d23) <= 1e-12 * std::max(1.0, std::abs(mu[2])) || d12 * d23 <= 0.0) return mu[2];
  auto g = [&](double p) {
    return d12 / d23 - (std::pow(h[0], p) - std::pow(h[1], p)) / (std::pow(h[1], p) - std::pow(h[2], p));
  };
  double a = 0.25, b = 40.0;
  if (g(a) * g(b) > 0.0) return mu[2];
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    (g(a) * g(m) <= 0.0 ? b : a) = m;
  }
  const double p = 0.5 * (a + b);
  const double C = d23 / (std::pow(h[1], p) - std::pow(h[2], p));
  return mu[2] - C * std::pow(h[2], p);
}

CoercivityReport certify(const RadialProfile& p, OperatorKind kind, const CertifyOptions& opt) {
  if (opt.resolutions.empty()) throw PreconditionError("certify: no resolutions");
  CoercivityReport rep;
  rep.op = to_string(kind);
  rep.box = opt.box;
  rep.resolutions = opt.resolutions;

  auto run = [&](int n) {
    Constrained c = setup(p, kind, opt.box, n);
    const LinearOperator op = assemble(kind, c.gs);
    return min_rayleigh(op, NormKind::H1, c.ortho, opt.eigen);
  };
  std::vector<RayleighResult> results(opt.resolutions.size());
  if (opt.jobs > 1) {
    std::vector<std::future<RayleighResult>> fut;
    for (int n : opt.resolutions) fut.push_back(std::async(std::launch::async, run, n));
    for (std::size_t k = 0; k < fut.size(); ++k) results[k] = fut[k].get();
  } else {
    for (std::size_t k = 0; k < opt.resolutions.size(); ++k) results[k] = run(opt.resolutions[k]);
  }
  std::vector<double> hs;
  for (std::size_t k = 0; k < results.size(); ++k) {
    rep.mu.push_back(results[k].value);
    rep.residuals.push_back(results[k].residual);
    rep.iterations.push_back(results[k].iterations);
    hs.push_back(opt.box / opt.resolutions[k]);
  }
  rep.mu_extrapolated = richardson_extrapolate(hs, rep.mu);
  const auto [lo, hi] = std::minmax_element(rep.mu.begin(), rep.mu.end());
  rep.relative_variation = (*hi - *lo) / std::abs(rep.mu.back());

  const int nf = opt.resolutions.back();
  Constrained fine = setup(p, kind, opt.box, nf);
  rep.constraints = fine.names;
  const LinearOperator op = assemble(kind, fine.gs);
  rep.symmetry_defect = symmetry_defect(op, 4, opt.eigen.seed + 101);
  rep.unconstrained_mu = min_rayleigh(op, NormKind::H1, {}, opt.eigen).value;
  rep.enlarged_mu = min_rayleigh(op, NormKind::H1, fine.enlarged, opt.eigen).value;
  if (kind == OperatorKind::L) {
    rep.kernel_residual = std::max(norm_l2(apply_L(fine.gs, fine.gs.d1Q)) / norm_l2(fine.gs.d1Q),
                                   norm_l2(apply_L(fine.gs, fine.gs.d2Q)) / norm_l2(fine.gs.d2Q));
  } else {
    rep.kernel_residual = symmetry_defect(op, 2, opt.eigen.seed + 7);
  }
  if (opt.wide_box > 0.0) {
    const int nw = 2 * static_cast<int>(std::lround(0.5 * nf * opt.wide_box / opt.box));
    Constrained w = setup(p, kind, opt.wide_box, nw);
    rep.wide_box_mu = min_rayleigh(assemble(kind, w.gs), NormKind::H1, w.ortho, opt.eigen).value;
  }
  if (opt.oracle_n > 0) {
    Constrained o = setup(p, kind, opt.box, opt.oracle_n);
    const LinearOperator oop = assemble(kind, o.gs);
    rep.oracle_n = opt.oracle_n;
    rep.oracle_mu = dense_min_rayleigh(oop, NormKind::H1, o.ortho);
    rep.oracle_lobpcg_mu = min_rayleigh(oop, NormKind::H1, o.ortho, opt.eigen).value;
  }
  rep.positive = std::all_of(rep.mu.begin(), rep.mu.end(), [](double m) { return m > 0.0; });
  return rep;
}

nlohmann::json to_json(const CoercivityReport& r) {
  nlohmann::json grid = {{"box", r.box}, {"points_per_axis", r.resolutions}};
  return {{"operator", r.op},
          {"norm", r.norm},
          {"grid", grid},
          {"constraints", r.constraints},
          {"mu", r.mu},
          {"residuals", r.residuals},
          {"resolutions", r.resolutions},
          {"iterations", r.iterations},
          {"mu_extrapolated", r.mu_extrapolated},
          {"relative_variation", r.relative_variation},
          {"oracle", {{"points_per_axis", r.oracle_n}, {"dense_mu", r.oracle_mu}, {"lobpcg_mu", r.oracle_lobpcg_mu}}},
          {"unconstrained_mu", r.unconstrained_mu},
          {"enlarged_constraint_mu", r.enlarged_mu},
          {"wide_box_mu", r.wide_box_mu},
          {"symmetry_defect", r.symmetry_defect},
          {"kernel_residual", r.kernel_residual},
          {"positive", r.positive}};
}

}  // namespace zk
