#include "zklab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft_plans.hpp"
#include "zklab/error.hpp"
#include "zklab/ground_state.hpp"

namespace zk {

EtdRk4::EtdRk4(const PlanarGrid& g, double dt, bool nonlinear, int contour, double frame_speed)
    : grid_(g), dt_(dt), nonlinear_(nonlinear) {
  if (!(dt > 0.0)) throw PreconditionError("EtdRk4: dt must be positive");
  if (contour < 8) throw PreconditionError("EtdRk4: contour needs at least 8 points");
  const int h2 = g.half2();
  k1_.resize(g.n1);
  for (int i = 0; i < g.n1; ++i) k1_[i] = (i == g.n1 / 2) ? 0.0 : g.k1(i);

  const std::size_t n = static_cast<std::size_t>(g.n1) * h2;
  E_.resize(n);
  E2_.resize(n);
  Q_.resize(n);
  f1_.resize(n);
  f2_.resize(n);
  f3_.resize(n);
  std::vector<cplx> roots(contour);
  for (int m = 0; m < contour; ++m)
    roots[m] = std::polar(1.0, std::numbers::pi * (m + 0.5) / (0.5 * contour));

  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < h2; ++j) {
      const double k2 = g.k2(j);
      const double kk = k1_[i] * k1_[i] + k2 * k2;
      const cplx z(0.0, k1_[i] * (kk + frame_speed) * dt);
      const std::size_t idx = static_cast<std::size_t>(i) * h2 + j;
      E_[idx] = std::exp(z);
      E2_[idx] = std::exp(0.5 * z);
      // Contour averages avoid the cancellation of the closed forms near z = 0.
      cplx q = 0.0, a = 0.0, b = 0.0, c = 0.0;
      for (const cplx& w : roots) {
        const cplx r = z + w;
        const cplx er = std::exp(r);
        const cplx r3 = r * r * r;
        q += (std::exp(0.5 * r) - 1.0) / r;
        a += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        b += (2.0 + r + er * (r - 2.0)) / r3;
        c += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
      }
      const double s = dt / contour;
      Q_[idx] = s * q;
      f1_[idx] = s * a;
      f2_[idx] = s * b;
      f3_[idx] = s * c;
    }
}

void EtdRk4::nonlinear_term(const std::vector<cplx>& v, std::vector<cplx>& out) const {
  const PlanarGrid& g = grid_;
  const int n1 = g.n1, n2 = g.n2, h2 = g.half2();
  const int p1 = 2 * n1, p2 = 2 * n2, ph2 = n2 + 1;
  auto plan = detail::plan_2d(p1, p2);
  thread_local detail::FftwPtr<std::complex<double>> spec;
  thread_local detail::FftwPtr<double> phys;
  thread_local std::size_t spec_cap = 0, phys_cap = 0;
  const std::size_t ns = static_cast<std::size_t>(p1) * ph2;
  const std::size_t np = static_cast<std::size_t>(p1) * p2;
  if (spec_cap < ns) {
    spec = detail::alloc_complex(ns);
    spec_cap = ns;
  }
  if (phys_cap < np) {
    phys = detail::alloc_real(np);
    phys_cap = np;
  }
  std::fill(spec.get(), spec.get() + ns, std::complex<double>(0.0));
  // Zero padding to twice the points in each direction; Nyquist rows dropped.
  for (int i = 0; i < n1; ++i) {
    if (i == n1 / 2) continue;
    const int ip = i < n1 / 2 ? i : i + n1;
    for (int j = 0; j < n2 / 2; ++j) spec[static_cast<std::size_t>(ip) * ph2 + j] = v[static_cast<std::size_t>(i) * h2 + j];
  }
  plan->backward(spec.get(), phys.get());
  const double scale = 1.0 / (static_cast<double>(n1) * n2);
  for (std::size_t k = 0; k < np; ++k) {
    const double u = phys[k] * scale;
    phys[k] = u * u * u;
  }
  plan->forward(phys.get(), spec.get());
  out.assign(v.size(), 0.0);
  for (int i = 0; i < n1; ++i) {
    if (i == n1 / 2) continue;
    const int ip = i < n1 / 2 ? i : i + n1;
    const cplx m(0.0, -0.25 * k1_[i]);
    for (int j = 0; j < n2 / 2; ++j)
      out[static_cast<std::size_t>(i) * h2 + j] = m * spec[static_cast<std::size_t>(ip) * ph2 + j];
  }
}

void EtdRk4::advance(Spectrum& state) const {
  require_same_grid(state.grid, grid_, "EtdRk4::advance");
  std::vector<cplx>& v = state.coeffs;
  const std::size_t n = v.size();
  if (!nonlinear_) {
    for (std::size_t k = 0; k < n; ++k) v[k] *= E_[k];
    return;
  }
  std::vector<cplx> Nv, Na, Nb, Nc, a(n), b(n), c(n);
  nonlinear_term(v, Nv);
  for (std::size_t k = 0; k < n; ++k) a[k] = E2_[k] * v[k] + Q_[k] * Nv[k];
  nonlinear_term(a, Na);
  for (std::size_t k = 0; k < n; ++k) b[k] = E2_[k] * v[k] + Q_[k] * Na[k];
  nonlinear_term(b, Nb);
  for (std::size_t k = 0; k < n; ++k) c[k] = E2_[k] * a[k] + Q_[k] * (2.0 * Nb[k] - Nv[k]);
  nonlinear_term(c, Nc);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = E_[k] * v[k] + f1_[k] * Nv[k] + 2.0 * f2_[k] * (Na[k] + Nb[k]) + f3_[k] * Nc[k];
}

PlanarField step(const PlanarField& f, double dt, bool nonlinear) {
  EtdRk4 s(f.grid, dt, nonlinear);
  Spectrum v = forward(f);
  s.advance(v);
  PlanarField out = inverse(v);
  if (!all_finite(out)) throw NumericalError("step 1: non-finite values");
  return out;
}

Invariants invariants(const PlanarField& f) {
  Invariants r;
  r.mass = mass(f);
  r.energy = energy(f);
  r.gradient = std::sqrt(gradient_norm_sq(f));
  return r;
}

double Trajectory::mass_drift() const {
  if (mass.empty() || mass.front() == 0.0) return 0.0;
  double worst = 0.0;
  for (double m : mass) worst = std::max(worst, std::abs(m - mass.front()));
  return worst / mass.front();
}

// Relative to the initial kinetic energy, since E vanishes on the soliton.
double Trajectory::energy_drift() const {
  if (energy.empty() || gradient.front() == 0.0) return 0.0;
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
  return worst / (0.5 * gradient.front() * gradient.front());
}

Trajectory evolve(const PlanarField& f0, double t_end, const EvolutionOptions& opt) {
  if (!(t_end >= 0.0)) throw PreconditionError("evolve: t_end must be nonnegative");
  if (opt.stride < 1) throw PreconditionError("evolve: stride must be positive");
  if (!all_finite(f0)) throw PreconditionError("evolve: initial field is not finite");
  Trajectory tr;
  tr.grid = f0.grid;
  tr.dt = opt.dt;
  tr.stride = opt.stride;

  auto record = [&](double t, const PlanarField& f, bool snap) {
    const Invariants inv = invariants(f);
    tr.times.push_back(t);
    tr.mass.push_back(inv.mass);
    tr.energy.push_back(inv.energy);
    tr.gradient.push_back(inv.gradient);
    if (snap) {
      tr.snapshot_times.push_back(t);
      tr.snapshots.push_back(f);
    }
  };
  record(0.0, f0, true);

  const long full = static_cast<long>(std::floor(t_end / opt.dt * (1.0 + 1e-12)));
  const double rest = t_end - full * opt.dt;
  const bool tail = rest > 1e-12 * std::max(1.0, t_end);
  const EtdRk4 stepper(f0.grid, opt.dt, opt.nonlinear, opt.contour, opt.frame_speed);
  const PlanarGrid& g = f0.grid;
  auto lab_field = [&](const Spectrum& w, double t) {
    if (opt.frame_speed == 0.0) return inverse(w);
    Spectrum s = w;
    for (int i = 0; i < g.n1; ++i) {
      const double k = (i == g.n1 / 2) ? 0.0 : g.k1(i);
      const cplx shift = std::polar(1.0, -k * opt.frame_speed * t);
      for (int j = 0; j < g.half2(); ++j) s.at(i, j) *= shift;
    }
    return inverse(s);
  };
  Spectrum v = forward(f0);
  const long total = full + (tail ? 1 : 0);
  for (long n = 1; n <= total; ++n) {
    double t;
    if (n <= full) {
      stepper.advance(v);
      t = n * opt.dt;
    } else {
      EtdRk4(f0.grid, rest, opt.nonlinear, opt.contour, opt.frame_speed).advance(v);
      t = t_end;
    }
    PlanarField f = lab_field(v, t);
    if (!all_finite(f)) throw NumericalError("evolve: non-finite values at step " + std::to_string(n));
    const bool last = n == total;
    record(t, f, n % opt.stride == 0 || last);
    if (opt.halt_mass_drift > 0.0 && tr.mass_drift() > opt.halt_mass_drift) {
      tr.halted = true;
      tr.halt_reason = "mass drift above threshold at step " + std::to_string(n);
    } else if (tr.gradient.front() > 0.0 && tr.gradient.back() > opt.halt_gradient_growth * tr.gradient.front()) {
      tr.halted = true;
      tr.halt_reason = "gradient growth above threshold at step " + std::to_string(n);
    }
    if (tr.halted) {
      if (tr.snapshot_times.back() != t) {
        tr.snapshot_times.push_back(t);
        tr.snapshots.push_back(f);
      }
      break;
    }
  }
  return tr;
}

}  // namespace zk
