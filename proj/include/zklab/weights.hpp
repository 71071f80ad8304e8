#pragma once

#include <vector>

namespace zk {

// One-dimensional weights in y1. All transitions use the C-infinity smoothstep.
class WeightFamily {
 public:
  explicit WeightFamily(double B = 128.0, double A = 64.0);

  double B() const { return B_; }
  double A() const { return A_; }
  double gamma() const { return gamma_; }

  // 1/2 left of 1/2, y^{i+6} right of 1, nondecreasing.
  static double vartheta(int i, double y);
  // Even, exp(-2|y|) for |y| > 1/6, 1 on |y| < 1/10, unit integral.
  static double zeta(double y);
  // Amplitude of the bump subtracted on 1/10 < |y| < 1/6 to normalise zeta.
  static double zeta_dip();
  // e^{6y} left of -1, 1/2 right of -1/2, nondecreasing.
  static double psi0(double y);
  // 1 on |y| <= 1, 0 on |y| >= 2.
  static double chi_tilde(double y);

  double vartheta_B(int i, double y) const;
  double psi_B(double y) const;
  double psi_B_prime(double y) const;
  double phi_B(int i, double y) const;  // sqrt(2 psi_B vartheta_B^2)
  double psi0_B(double y) const;
  double chi_tilde_B(double y) const;

  // psi_A(x) = (2/pi) arctan(exp(-x/A)) and its first three derivatives.
  double psi_A(double x) const;
  double psi_A_derivative(double x, int order) const;

  // psi_B on y1 = o + k h, k < n, by accumulating short Gauss-Legendre steps.
  std::vector<double> sample_psi_B(double o, double h, int n) const;

 private:
  double B_, A_, gamma_;
  // psi_B is integrated from the analytic left tail; values cached at the breakpoints.
  std::vector<double> knots_, knot_values_;
  double left_end_ = 0.0, right_start_ = 0.0;
};

}  // namespace zk
