#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace zk {

// Periodic tensor grid on [o1, o1 + L1) x [o2, o2 + L2).
struct PlanarGrid {
  double length1 = 0.0;
  double length2 = 0.0;
  int n1 = 0;
  int n2 = 0;
  double origin1 = 0.0;
  double origin2 = 0.0;

  PlanarGrid() = default;
  PlanarGrid(double l1, double l2, int m1, int m2, double o1, double o2);

  // Box [-L1/2, L1/2) x [-L2/2, L2/2).
  static PlanarGrid centered(double l1, double l2, int m1, int m2);
  // Box [a1, b1) x [a2, b2) with spacing as close to h as the even point count allows.
  static PlanarGrid spanning(double a1, double b1, double a2, double b2, double h);

  double h1() const { return length1 / n1; }
  double h2() const { return length2 / n2; }
  double cell_area() const { return h1() * h2(); }
  double x1(int i) const { return origin1 + i * h1(); }
  double x2(int j) const { return origin2 + j * h2(); }
  std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }

  // Angular wavenumbers in FFT order; the Nyquist entry carries +pi/h.
  double k1(int i) const;
  double k2(int j) const;
  int half2() const { return n2 / 2 + 1; }

  bool same_as(const PlanarGrid& o) const;
};

struct PlanarField {
  PlanarGrid grid;
  std::vector<double> values;

  PlanarField() = default;
  explicit PlanarField(const PlanarGrid& g, double fill = 0.0);
  PlanarField(const PlanarGrid& g, std::vector<double> v);

  static PlanarField sample(const PlanarGrid& g, const std::function<double(double, double)>& f);

  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  std::size_t size() const { return values.size(); }

  PlanarField& operator+=(const PlanarField& o);
  PlanarField& operator-=(const PlanarField& o);
  PlanarField& operator*=(double s);
  // a += s * x
  PlanarField& axpy(double s, const PlanarField& x);
};

PlanarField operator+(PlanarField a, const PlanarField& b);
PlanarField operator-(PlanarField a, const PlanarField& b);
PlanarField operator*(double s, PlanarField a);
PlanarField hadamard(const PlanarField& a, const PlanarField& b);

void require_same_grid(const PlanarGrid& a, const PlanarGrid& b, const char* where);

// Trapezoid quadrature, spectrally accurate for smooth periodic integrands.
double inner_product(const PlanarField& f, const PlanarField& g);
double integral(const PlanarField& f);
double norm_l2(const PlanarField& f);
double max_abs(const PlanarField& f);
bool all_finite(const PlanarField& f);

// y1 * f and y2 * f with grid coordinates.
PlanarField times_y1(const PlanarField& f);
PlanarField times_y2(const PlanarField& f);

}  // namespace zk
