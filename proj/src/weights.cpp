#include "zklab/weights.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "zklab/cutoff.hpp"
#include "zklab/error.hpp"

namespace zk {
namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-15);
}

// exp(1 - 1/(4t(1-t))) on (0, 1), peak 1 at t = 1/2.
double bump(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (4.0 * t * (1.0 - t)));
}

constexpr double kZetaIn = 0.1;
constexpr double kZetaOut = 1.0 / 6.0;

double zeta_blend(double y) {
  const double t = (y - kZetaIn) / (kZetaOut - kZetaIn);
  const double s = smoothstep(t);
  return (1.0 - s) + s * std::exp(-2.0 * y);
}

// int_{-1}^{-1/2} psi0
double psi0_transition_integral() {
  static const double v = integrate([](double y) { return WeightFamily::psi0(y); }, -1.0, -0.5);
  return v;
}

// int_0^u psi0
double psi0_antiderivative(double u) {
  if (u >= -0.5) return 0.5 * u;
  double tail;
  if (u >= -1.0)
    tail = integrate([](double y) { return WeightFamily::psi0(y); }, u, -0.5);
  else
    tail = psi0_transition_integral() + (std::exp(-6.0) - std::exp(6.0 * u)) / 6.0;
  return -0.25 - tail;
}

}  // namespace

double WeightFamily::zeta_dip() {
  static const double a = [] {
    const double w = kZetaOut - kZetaIn;
    const double blend = integrate(zeta_blend, kZetaIn, kZetaOut);
    const double b = integrate(bump, 0.0, 1.0) * w;
    // 2 [ 1/10 + blend - a b + exp(-1/3)/2 ] = 1
    return (kZetaIn + blend + 0.5 * std::exp(-2.0 * kZetaOut) - 0.5) / b;
  }();
  return a;
}

double WeightFamily::zeta(double y) {
  y = std::abs(y);
  if (y <= kZetaIn) return 1.0;
  if (y >= kZetaOut) return std::exp(-2.0 * y);
  const double t = (y - kZetaIn) / (kZetaOut - kZetaIn);
  return zeta_blend(y) - zeta_dip() * bump(t);
}

double WeightFamily::vartheta(int i, double y) {
  if (i < 0 || i > 2) throw PreconditionError("vartheta: index must be 0, 1 or 2");
  const double p = i + 6.0;
  // Start the blend where y^p = 1/2 so the blended difference stays nonnegative.
  const double y0 = std::pow(0.5, 1.0 / p);
  if (y <= y0) return 0.5;
  const double yp = std::pow(y, p);
  if (y >= 1.0) return yp;
  return 0.5 + smoothstep((y - y0) / (1.0 - y0)) * (yp - 0.5);
}

double WeightFamily::psi0(double y) {
  if (y <= -1.0) return std::exp(6.0 * y);
  if (y >= -0.5) return 0.5;
  const double e = std::exp(6.0 * y);
  return e + smoothstep(2.0 * (y + 1.0)) * (0.5 - e);
}

double WeightFamily::chi_tilde(double y) {
  const double a = std::abs(y);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return 1.0 - smoothstep(a - 1.0);
}

WeightFamily::WeightFamily(double B, double A) : B_(B), A_(A), gamma_(std::pow(B, -3.0)) {
  if (!(B > 100.0)) throw PreconditionError("WeightFamily: B must exceed 100");
  if (!(A > 1.0)) throw PreconditionError("WeightFamily: A must exceed 1");
  const double c = std::cbrt(B);
  const double b23 = c * c;
  left_end_ = B * (-0.5 + 0.5 / c);           // left argument reaches -1/6
  right_start_ = b23 / 6.0 - B / 3.0;         // right argument reaches 1/6
  std::vector<double> k{left_end_, B * (-kZetaIn - 1.0 / 3.0 + 0.5 / c), -B / 3.0, b23 * (kZetaIn - c / 3.0),
                        right_start_};
  std::sort(k.begin(), k.end());
  for (double x : k)
    if (x >= left_end_ && x <= right_start_ && (knots_.empty() || x > knots_.back())) knots_.push_back(x);
  knot_values_.resize(knots_.size());
  knot_values_[0] = 0.5 * std::exp(-1.0 / 3.0);
  auto d = [this](double y) { return psi_B_prime(y); };
  for (std::size_t m = 1; m < knots_.size(); ++m)
    knot_values_[m] = knot_values_[m - 1] + integrate(d, knots_[m - 1], knots_[m]);
}

double WeightFamily::vartheta_B(int i, double y) const { return vartheta(i, y / std::pow(B_, 10.0)); }

double WeightFamily::psi_B_prime(double y) const {
  const double c = std::cbrt(B_);
  if (y < -B_ / 3.0) return zeta(y / B_ + 1.0 / 3.0 - 0.5 / c) / B_;
  return zeta(y / (c * c) + c / 3.0) / B_;
}

double WeightFamily::psi_B(double y) const {
  const double c = std::cbrt(B_);
  if (y <= left_end_) return 0.5 * std::exp(2.0 * (y / B_ + 1.0 / 3.0 - 0.5 / c));
  if (y >= right_start_) {
    const double a = y / (c * c) + c / 3.0;
    return knot_values_.back() + (c * c) / (2.0 * B_) * (std::exp(-1.0 / 3.0) - std::exp(-2.0 * a));
  }
  const std::size_t m = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), y) - knots_.begin()) - 1;
  return knot_values_[m] + integrate([this](double s) { return psi_B_prime(s); }, knots_[m], y);
}

double WeightFamily::phi_B(int i, double y) const { return std::sqrt(2.0 * psi_B(y)) * vartheta_B(i, y); }

double WeightFamily::psi0_B(double y) const { return psi0(y / B_); }

double WeightFamily::chi_tilde_B(double y) const {
  const double cut = y <= 0.0 ? chi_tilde(y / (2.0 * B_)) : chi_tilde(y / (10.0 * std::pow(B_, 10.0)));
  if (cut == 0.0) return 0.0;
  // int_0^y (2/B) psi0(s/B) ds = 2 int_0^{y/B} psi0
  return cut * 2.0 * psi0_antiderivative(y / B_);
}

double WeightFamily::psi_A(double x) const { return 2.0 / std::numbers::pi * std::atan(std::exp(-x / A_)); }

double WeightFamily::psi_A_derivative(double x, int order) const {
  const double u = x / A_;
  const double sech = 1.0 / std::cosh(u);
  const double th = std::tanh(u);
  const double ip = 1.0 / std::numbers::pi;
  switch (order) {
    case 0:
      return psi_A(x);
    case 1:
      return -ip * sech / A_;
    case 2:
      return ip * sech * th / (A_ * A_);
    case 3:
      return ip * (sech * sech * sech - sech * th * th) / (A_ * A_ * A_);
    default:
      throw PreconditionError("psi_A_derivative: order must be 0..3");
  }
}

std::vector<double> WeightFamily::sample_psi_B(double o, double h, int n) const {
  using GL = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> out(n);
  if (n == 0) return out;
  auto d = [this](double s) { return psi_B_prime(s); };
  out[0] = psi_B(o);
  // Steps of h are short against the B^{2/3} scale of psi_B'.
  for (int k = 1; k < n; ++k) {
    const double a = o + (k - 1) * h, b = o + k * h;
    out[k] = (b <= left_end_ || a >= right_start_) ? psi_B(b) : out[k - 1] + GL::integrate(d, a, b);
  }
  return out;
}

}  // namespace zk
