#include "zklab/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "fft_plans.hpp"
#include "zklab/error.hpp"

namespace zk {
namespace detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Plan2D::~Plan2D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (r2c) fftw_destroy_plan(r2c);
  if (c2r) fftw_destroy_plan(c2r);
}

void Plan2D::forward(double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(r2c, in, reinterpret_cast<fftw_complex*>(out));
}

void Plan2D::backward(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(c2r, reinterpret_cast<fftw_complex*>(in), out);
}

Plan1D::~Plan1D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (r2c) fftw_destroy_plan(r2c);
  if (c2r) fftw_destroy_plan(c2r);
}

void Plan1D::forward(double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(r2c, in, reinterpret_cast<fftw_complex*>(out));
}

void Plan1D::backward(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(c2r, reinterpret_cast<fftw_complex*>(in), out);
}

std::shared_ptr<const Plan2D> plan_2d(int n1, int n2) {
  static std::map<std::pair<int, int>, std::shared_ptr<const Plan2D>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find({n1, n2});
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<Plan2D>();
  p->n1 = n1;
  p->n2 = n2;
  const std::size_t nr = static_cast<std::size_t>(n1) * n2;
  const std::size_t nc = static_cast<std::size_t>(n1) * (n2 / 2 + 1);
  auto r = alloc_real(nr);
  auto c = alloc_complex(nc);
  auto* cc = reinterpret_cast<fftw_complex*>(c.get());
  p->r2c = fftw_plan_dft_r2c_2d(n1, n2, r.get(), cc, FFTW_ESTIMATE);
  p->c2r = fftw_plan_dft_c2r_2d(n1, n2, cc, r.get(), FFTW_ESTIMATE);
  if (!p->r2c || !p->c2r) throw NumericalError("fftw planning failed");
  cache.emplace(std::make_pair(n1, n2), p);
  return p;
}

std::shared_ptr<const Plan1D> plan_1d(int n) {
  static std::map<int, std::shared_ptr<const Plan1D>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<Plan1D>();
  p->n = n;
  auto r = alloc_real(n);
  auto c = alloc_complex(n / 2 + 1);
  auto* cc = reinterpret_cast<fftw_complex*>(c.get());
  p->r2c = fftw_plan_dft_r2c_1d(n, r.get(), cc, FFTW_ESTIMATE);
  p->c2r = fftw_plan_dft_c2r_1d(n, cc, r.get(), FFTW_ESTIMATE);
  if (!p->r2c || !p->c2r) throw NumericalError("fftw planning failed");
  cache.emplace(n, p);
  return p;
}

}  // namespace detail

namespace {

std::mutex warn_mutex;
WarningHandler warn_handler = [](const std::string& msg) {
  static std::atomic<int> count{0};
  if (count.fetch_add(1) < 5) std::cerr << "zklab warning: " << msg << "\n";
};

std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void warn(const std::string& msg) {
  WarningHandler h;
  {
    std::lock_guard<std::mutex> lock(warn_mutex);
    h = warn_handler;
  }
  if (h) h(msg);
}

// Fraction of the energy in the outer third of the band, and that tail's L2 norm.
std::pair<double, double> tail_stats(const Spectrum& s) {
  const PlanarGrid& g = s.grid;
  double total = 0.0, tail = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    const int m1 = std::abs(i <= g.n1 / 2 ? i : i - g.n1);
    for (int j = 0; j < g.half2(); ++j) {
      const double w = (j == 0 || 2 * j == g.n2) ? 1.0 : 2.0;
      const double e = w * std::norm(s.at(i, j));
      total += e;
      if (3 * m1 > g.n1 || 3 * j > g.n2) tail += e;
    }
  }
  const double l2 = std::sqrt(tail * g.cell_area() / static_cast<double>(g.size()));
  return {total > 0.0 ? tail / total : 0.0, l2};
}

double tail_fraction(const Spectrum& s) { return tail_stats(s).first; }

template <typename Fn>
PlanarField filtered(const PlanarField& f, Fn&& mult) {
  Spectrum s = forward(f);
  const PlanarGrid& g = f.grid;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.half2(); ++j) s.at(i, j) *= mult(i, j);
  return inverse(s);
}

}  // namespace

void set_warning_handler(WarningHandler h) {
  std::lock_guard<std::mutex> lock(warn_mutex);
  warn_handler = std::move(h);
}

Spectrum forward(const PlanarField& f) {
  const PlanarGrid& g = f.grid;
  auto plan = detail::plan_2d(g.n1, g.n2);
  const std::size_t nc = static_cast<std::size_t>(g.n1) * g.half2();
  auto r = detail::alloc_real(g.size());
  auto c = detail::alloc_complex(nc);
  std::memcpy(r.get(), f.values.data(), g.size() * sizeof(double));
  plan->forward(r.get(), c.get());
  Spectrum s{g, std::vector<cplx>(c.get(), c.get() + nc)};
  return s;
}

PlanarField inverse(const Spectrum& s) {
  const PlanarGrid& g = s.grid;
  auto plan = detail::plan_2d(g.n1, g.n2);
  const std::size_t nc = static_cast<std::size_t>(g.n1) * g.half2();
  auto r = detail::alloc_real(g.size());
  auto c = detail::alloc_complex(nc);
  std::copy(s.coeffs.begin(), s.coeffs.end(), c.get());
  plan->backward(c.get(), r.get());
  PlanarField out(g);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) out.values[k] = r[k] * scale;
  return out;
}

PlanarField spectral_derivative(const PlanarField& f, int axis, int order) {
  if (axis != 1 && axis != 2) throw PreconditionError("spectral_derivative: axis must be 1 or 2");
  if (order < 0) throw PreconditionError("spectral_derivative: negative order");
  Spectrum s = forward(f);
  // Round-off sized fields are all tail; only a tail with real content is worth reporting.
  const auto [frac, tail_l2] = tail_stats(s);
  if (frac > 1e-8 && tail_l2 > 1e-12) warn("field under-resolved for differentiation (tail fraction " + format_fraction(frac) + ")");
  const PlanarGrid& g = f.grid;
  const cplx iu(0.0, 1.0);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.half2(); ++j) {
      const bool nyq = axis == 1 ? 2 * i == g.n1 : 2 * j == g.n2;
      if (nyq && order % 2 == 1) {
        s.at(i, j) = 0.0;
        continue;
      }
      const double k = axis == 1 ? g.k1(i) : g.k2(j);
      s.at(i, j) *= std::pow(iu * k, order);
    }
  return inverse(s);
}

PlanarField laplacian(const PlanarField& f) {
  const PlanarGrid& g = f.grid;
  return filtered(f, [&](int i, int j) {
    const double a = g.k1(i), b = g.k2(j);
    return -(a * a + b * b);
  });
}

PlanarField elliptic_inverse(const PlanarField& f, double a, double b1, double b2) {
  if (!(a > 0.0) || b1 < 0.0 || b2 < 0.0) throw PreconditionError("elliptic_inverse: symbol not positive");
  const PlanarGrid& g = f.grid;
  return filtered(f, [&](int i, int j) {
    const double k1 = g.k1(i), k2 = g.k2(j);
    return 1.0 / (a + b1 * k1 * k1 + b2 * k2 * k2);
  });
}

PlanarField apply_symbol(const PlanarField& f, const std::function<double(double, double)>& sym) {
  const PlanarGrid& g = f.grid;
  return filtered(f, [&](int i, int j) { return sym(g.k1(i), g.k2(j)); });
}

PlanarField bessel_power(const PlanarField& f, double p) {
  const PlanarGrid& g = f.grid;
  return filtered(f, [&](int i, int j) {
    const double k1 = g.k1(i), k2 = g.k2(j);
    return std::pow(1.0 + k1 * k1 + k2 * k2, p);
  });
}

double gradient_norm_sq(const PlanarField& f) {
  const Spectrum s = forward(f);
  const PlanarGrid& g = f.grid;
  double acc = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    const double k1 = 2 * i == g.n1 ? 0.0 : g.k1(i);
    for (int j = 0; j < g.half2(); ++j) {
      const double k2 = 2 * j == g.n2 ? 0.0 : g.k2(j);
      const double w = (j == 0 || 2 * j == g.n2) ? 1.0 : 2.0;
      acc += w * (k1 * k1 + k2 * k2) * std::norm(s.at(i, j));
    }
  }
  return acc * g.cell_area() / static_cast<double>(g.size());
}

double h1_norm_sq(const PlanarField& f) { return gradient_norm_sq(f) + inner_product(f, f); }

double band_tail_fraction(const PlanarField& f) { return tail_fraction(forward(f)); }

std::vector<cplx> forward_1d(const std::vector<double>& f) {
  const int n = static_cast<int>(f.size());
  auto plan = detail::plan_1d(n);
  auto r = detail::alloc_real(n);
  auto c = detail::alloc_complex(n / 2 + 1);
  std::copy(f.begin(), f.end(), r.get());
  plan->forward(r.get(), c.get());
  return std::vector<cplx>(c.get(), c.get() + n / 2 + 1);
}

std::vector<double> inverse_1d(const std::vector<cplx>& coeffs, int n) {
  auto plan = detail::plan_1d(n);
  auto r = detail::alloc_real(n);
  auto c = detail::alloc_complex(n / 2 + 1);
  std::copy(coeffs.begin(), coeffs.end(), c.get());
  plan->backward(c.get(), r.get());
  std::vector<double> out(r.get(), r.get() + n);
  for (double& v : out) v /= n;
  return out;
}

std::vector<double> apply_symbol_1d(const std::vector<double>& f, double len,
                                    const std::function<double(double)>& sym) {
  const int n = static_cast<int>(f.size());
  if (n < 4 || n % 2) throw PreconditionError("apply_symbol_1d: even length >= 4 required");
  auto c = forward_1d(f);
  for (int j = 0; j <= n / 2; ++j) c[j] *= sym(2.0 * std::numbers::pi * j / len);
  return inverse_1d(c, n);
}

namespace {

// Rows of the periodic cardinal function sin(pi t) / (n tan(pi t / n)), t in points.
Eigen::MatrixXd cardinal_matrix(int n, double origin, double h, const std::vector<double>& targets, bool wrap) {
  if (n % 2 != 0) throw PreconditionError("trig_interpolate: point count must be even");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(targets.size()), n);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    double t = (targets[r] - origin) / h;
    if (!wrap && (t < 0.0 || t >= n)) continue;
    t -= n * std::floor(t / n);
    // sin(pi (t - m)) from the offset to the nearest node, so large t keeps full precision.
    long near = std::lround(t);
    const double f = t - near;
    if (near == n) near = 0;
    if (std::abs(f) < 1e-15) {
      S(r, static_cast<int>(near % n)) = 1.0;
      continue;
    }
    const double s = std::sin(std::numbers::pi * f);
    for (int m = 0; m < n; ++m) {
      const double d = (near - m) + f;
      S(r, m) = (((near - m) % 2 != 0) ? -s : s) / (n * std::tan(std::numbers::pi * d / n));
    }
  }
  return S;
}

std::vector<double> axis_points(const PlanarGrid& g, int axis) {
  const int n = axis == 1 ? g.n1 : g.n2;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = axis == 1 ? g.x1(k) : g.x2(k);
  return x;
}

}  // namespace

std::vector<double> trig_interpolate_1d(const std::vector<double>& f, double origin, double h,
                                        const std::vector<double>& targets, bool wrap) {
  const Eigen::MatrixXd S = cardinal_matrix(static_cast<int>(f.size()), origin, h, targets, wrap);
  const Eigen::VectorXd out = S * Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  return {out.data(), out.data() + out.size()};
}

PlanarField trig_interpolate(const PlanarField& src, const PlanarGrid& dst, bool wrap) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const PlanarGrid& g = src.grid;
  const Eigen::MatrixXd S1 = cardinal_matrix(g.n1, g.origin1, g.h1(), axis_points(dst, 1), wrap);
  const Eigen::MatrixXd S2 = cardinal_matrix(g.n2, g.origin2, g.h2(), axis_points(dst, 2), wrap);
  Eigen::Map<const RowMajor> F(src.values.data(), g.n1, g.n2);
  PlanarField out(dst);
  Eigen::Map<RowMajor> O(out.values.data(), dst.n1, dst.n2);
  const double d1 = dst.n1, d2 = dst.n2, m1 = g.n1, m2 = g.n2;
  if (d1 * m1 * m2 + d1 * m2 * d2 <= m1 * m2 * d2 + d1 * m1 * d2)
    O.noalias() = (S1 * F) * S2.transpose();
  else
    O.noalias() = S1 * (F * S2.transpose());
  return out;
}

}  // namespace zk
