#include "zklab/trace.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "zklab/error.hpp"
#include "zklab/ground_state.hpp"

namespace zk {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TraceRow analyse(const ModulationContext& ctx, const PlanarField& phi, const ModulationParams& guess,
                 const TraceOptions& opt) {
  TraceRow r;
  try {
    const ModulationState st = decompose(ctx, phi, guess, opt.decompose);
    const WeightFamily& w = ctx.weights();
    const double theta = ctx.profiles().theta;
    r.params = st.params;
    r.residuals = st.residuals;
    r.iterations = st.iterations;
    r.eps_l2 = st.eps_l2;
    r.local = local_norm(st.eps);
    r.J = j_functionals(ctx, st);
    for (int i = 0; i < 3; ++i) r.N[i] = weighted_norm(w, st.eps, i);
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j <= 2; ++j) r.M[i - 1][j - 1] = lyapunov(w, st.profile, st.eps, r.J.J1, theta, i, j).M;
    r.H = bootstrap_flags(st.params.b, st.params.lambda, st.eps_l2, r.N[2], st.eps, theta, opt.kappa);
    r.mass_expansion = st.eps_l2 * st.eps_l2 + 2.0 * st.params.b * ctx.profiles().PQ -
                       (mass(phi) - ctx.radial().mass());
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

double unwrap(double x, double previous, double period) {
  return x - period * std::round((x - previous) / period);
}

void put(std::ostream& os, double v) {
  if (std::isnan(v))
    os << "nan";
  else
    os << v;
}

}  // namespace

std::vector<double> differentiate(const std::vector<double>& s, const std::vector<double>& f) {
  const std::size_t n = s.size();
  if (f.size() != n) throw PreconditionError("differentiate: size mismatch");
  std::vector<double> d(n, kNaN);
  if (n < 3) {
    if (n == 2) d[0] = d[1] = (f[1] - f[0]) / (s[1] - s[0]);
    return d;
  }
  // Three-point Lagrange derivative at node c of (a, b, c) = (s[i], s[i+1], s[i+2]).
  auto three = [&](std::size_t i, std::size_t at) {
    const double x0 = s[i], x1 = s[i + 1], x2 = s[i + 2], x = s[at];
    const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return l0 * f[i] + l1 * f[i + 1] + l2 * f[i + 2];
  };
  d[0] = three(0, 0);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = three(i - 1, i);
  d[n - 1] = three(n - 3, n - 1);
  return d;
}

ModulationTrace trace(const ModulationContext& ctx, const Trajectory& tr, const TraceOptions& opt) {
  const std::size_t n = tr.snapshots.size();
  if (n == 0) throw PreconditionError("trace: trajectory has no snapshots");
  ModulationTrace mt;
  mt.theta = ctx.profiles().theta;
  mt.B = ctx.weights().B();
  mt.E0 = energy(tr.snapshots.front());

  std::vector<ModulationParams> guesses(n);
  for (std::size_t k = 0; k < n; ++k) guesses[k] = initial_guess(tr.snapshots[k], ctx.radial().q0);

  mt.rows.resize(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) mt.rows[k] = analyse(ctx, tr.snapshots[k], guesses[k], opt);
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(n)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Positions continue across the periodic seam.
  const PlanarGrid& g = tr.grid;
  const TraceRow* prev = nullptr;
  for (std::size_t k = 0; k < n; ++k) {
    TraceRow& r = mt.rows[k];
    r.t = tr.snapshot_times[k];
    if (!r.ok) continue;
    if (prev) {
      r.params.x1 = unwrap(r.params.x1, prev->params.x1, g.length1);
      r.params.x2 = unwrap(r.params.x2, prev->params.x2, g.length2);
    }
    prev = &r;
  }

  // ds/dt = lambda^{-3}, trapezoid between snapshots.
  for (std::size_t k = 1; k < n; ++k) {
    const TraceRow &a = mt.rows[k - 1], &b = mt.rows[k];
    const double la = a.ok ? a.params.lambda : kNaN, lb = b.ok ? b.params.lambda : kNaN;
    mt.rows[k].s = a.s + 0.5 * (b.t - a.t) * (std::pow(la, -3.0) + std::pow(lb, -3.0));
  }

  std::vector<double> s(n), loglam(n), x1(n), x2(n), b(n);
  for (std::size_t k = 0; k < n; ++k) {
    const TraceRow& r = mt.rows[k];
    s[k] = r.s;
    loglam[k] = r.ok ? std::log(r.params.lambda) : kNaN;
    x1[k] = r.ok ? r.params.x1 : kNaN;
    x2[k] = r.ok ? r.params.x2 : kNaN;
    b[k] = r.ok ? r.params.b : kNaN;
  }
  const std::vector<double> dl = differentiate(s, loglam), dx1 = differentiate(s, x1), dx2 = differentiate(s, x2),
                            db = differentiate(s, b);
  const double B5 = std::pow(mt.B, 5.0);
  std::vector<double> refined(n);
  mt.rates.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const TraceRow& r = mt.rows[k];
    const double lam = r.ok ? r.params.lambda : kNaN;
    ParameterRates& q = mt.rates[k];
    q.lambda_s_over_lambda = dl[k];
    q.x1_s_over_lambda = dx1[k] / lam;
    q.x2_s_over_lambda = dx2[k] / lam;
    q.b_s = db[k];
    mt.lambda_law.push_back(dl[k] + b[k]);
    mt.b_law.push_back(db[k] + mt.theta * b[k] * b[k]);
    mt.x1_law.push_back(q.x1_s_over_lambda - 1.0);
    const double blt = b[k] / std::pow(lam, mt.theta);
    mt.b_over_lambda_theta.push_back(blt);
    mt.b_over_lambda2.push_back(b[k] / (lam * lam));
    refined[k] = r.ok ? blt * std::exp(r.J.J) : kNaN;
    const double ab = std::abs(b[k]);
    mt.refined_rhs.push_back(r.ok ? std::exp(r.J.J) / std::pow(lam, mt.theta) *
                                        (B5 * ab * ab * ab + (B5 * ab + 1.0) * r.N[0])
                                  : kNaN);
  }
  mt.refined = refined;
  mt.refined_rate = differentiate(s, refined);
  return mt;
}

const std::vector<std::string>& trace_csv_columns() {
  static const std::vector<std::string> cols{"t",   "s",   "lambda", "b",   "x1",  "x2",  "J",
                                             "J1",  "J2",  "J3",     "N0",  "N1",  "N2",  "M11",
                                             "M12", "M21", "M22",    "b/lambda^theta",  "b/lambda^2",
                                             "H1flag", "H2flag", "H3flag"};
  return cols;
}

void write_trace_csv(const ModulationTrace& tr, std::ostream& os) {
  const auto& cols = trace_csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < tr.rows.size(); ++k) {
    const TraceRow& r = tr.rows[k];
    const double nan = kNaN;
    const std::vector<double> v{r.t,
                                r.s,
                                r.ok ? r.params.lambda : nan,
                                r.ok ? r.params.b : nan,
                                r.ok ? r.params.x1 : nan,
                                r.ok ? r.params.x2 : nan,
                                r.ok ? r.J.J : nan,
                                r.ok ? r.J.J1 : nan,
                                r.ok ? r.J.J2 : nan,
                                r.ok ? r.J.J3 : nan,
                                r.ok ? r.N[0] : nan,
                                r.ok ? r.N[1] : nan,
                                r.ok ? r.N[2] : nan,
                                r.ok ? r.M[0][0] : nan,
                                r.ok ? r.M[0][1] : nan,
                                r.ok ? r.M[1][0] : nan,
                                r.ok ? r.M[1][1] : nan,
                                tr.b_over_lambda_theta[k],
                                tr.b_over_lambda2[k]};
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (c) os << ",";
      put(os, v[c]);
    }
    if (r.ok)
      os << "," << int(r.H.H1) << "," << int(r.H.H2) << "," << int(r.H.H3) << "\n";
    else
      os << ",nan,nan,nan\n";
  }
}

void write_rates_csv(const ModulationTrace& tr, std::ostream& os) {
  os << "t,s,lambda_s/lambda+b,b_s+theta*b^2,x1_s/lambda-1,x2_s/lambda,b/lambda^theta*e^J,"
        "d/ds(b/lambda^theta*e^J),refined_rhs,local_norm,mass_expansion\n"
     << std::setprecision(17);
  for (std::size_t k = 0; k < tr.rows.size(); ++k) {
    const TraceRow& r = tr.rows[k];
    const std::vector<double> v{r.t,
                                r.s,
                                tr.lambda_law[k],
                                tr.b_law[k],
                                tr.x1_law[k],
                                tr.rates[k].x2_s_over_lambda,
                                tr.refined[k],
                                tr.refined_rate[k],
                                tr.refined_rhs[k],
                                r.ok ? r.local : kNaN,
                                r.ok ? r.mass_expansion : kNaN};
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (c) os << ",";
      put(os, v[c]);
    }
    os << "\n";
  }
}

std::vector<double> mass_monotonicity(const Trajectory& tr, const ModulationTrace& mt, double x0,
                                      const WeightFamily& w) {
  if (!(x0 > 0.0)) throw PreconditionError("mass_monotonicity: x0 must be positive");
  const std::size_t n = tr.snapshots.size();
  if (mt.rows.size() != n) throw PreconditionError("mass_monotonicity: trace does not match the trajectory");
  if (!mt.rows.back().ok) throw PreconditionError("mass_monotonicity: last snapshot has no decomposition");
  const double xe = mt.rows.back().params.x1;
  std::vector<double> out(n, kNaN);
  const PlanarGrid& g = tr.grid;
  for (std::size_t k = 0; k < n; ++k) {
    if (!mt.rows[k].ok) continue;
    const double c = x0 + xe + 0.25 * (mt.rows[k].params.x1 - xe);
    const PlanarField& f = tr.snapshots[k];
    double acc = 0.0;
    for (int i = 0; i < g.n1; ++i) {
      const double wt = w.psi_A(g.x1(i) - c);
      for (int j = 0; j < g.n2; ++j) acc += f(i, j) * f(i, j) * wt;
    }
    out[k] = acc * g.cell_area();
  }
  return out;
}

std::vector<double> blowup_rate_bound(const std::vector<double>& t, const std::vector<double>& gradient, double T) {
  if (t.size() != gradient.size()) throw PreconditionError("blowup_rate_bound: size mismatch");
  if (t.empty()) return {};
  if (T > t.back()) throw PreconditionError("blowup_rate_bound: T lies after the last sample");
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = gradient[k] * std::cbrt(t[k] - T);
  return out;
}

}  // namespace zk
