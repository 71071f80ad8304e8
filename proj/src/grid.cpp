#include "zklab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "zklab/error.hpp"

namespace zk {

PlanarGrid::PlanarGrid(double l1, double l2, int m1, int m2, double o1, double o2)
    : length1(l1), length2(l2), n1(m1), n2(m2), origin1(o1), origin2(o2) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw PreconditionError("grid: box lengths must be positive");
  if (m1 < 4 || m2 < 4 || m1 % 2 || m2 % 2)
    throw PreconditionError("grid: point counts must be even and >= 4");
}

PlanarGrid PlanarGrid::centered(double l1, double l2, int m1, int m2) {
  return PlanarGrid(l1, l2, m1, m2, -0.5 * l1, -0.5 * l2);
}

PlanarGrid PlanarGrid::spanning(double a1, double b1, double a2, double b2, double h) {
  if (!(h > 0.0)) throw PreconditionError("grid: spacing must be positive");
  auto count = [h](double len) {
    int m = static_cast<int>(std::lround(len / h));
    return m + (m % 2);
  };
  return PlanarGrid(b1 - a1, b2 - a2, count(b1 - a1), count(b2 - a2), a1, a2);
}

double PlanarGrid::k1(int i) const {
  const int m = i <= n1 / 2 ? i : i - n1;
  return 2.0 * std::numbers::pi * m / length1;
}

double PlanarGrid::k2(int j) const {
  const int m = j <= n2 / 2 ? j : j - n2;
  return 2.0 * std::numbers::pi * m / length2;
}

bool PlanarGrid::same_as(const PlanarGrid& o) const {
  return n1 == o.n1 && n2 == o.n2 && length1 == o.length1 && length2 == o.length2 &&
         origin1 == o.origin1 && origin2 == o.origin2;
}

void require_same_grid(const PlanarGrid& a, const PlanarGrid& b, const char* where) {
  if (!a.same_as(b)) throw PreconditionError(std::string(where) + ": grids differ");
}

PlanarField::PlanarField(const PlanarGrid& g, double fill) : grid(g), values(g.size(), fill) {}

PlanarField::PlanarField(const PlanarGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw PreconditionError("field: value count does not match grid");
}

PlanarField PlanarField::sample(const PlanarGrid& g, const std::function<double(double, double)>& f) {
  PlanarField out(g);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) out(i, j) = f(g.x1(i), g.x2(j));
  return out;
}

PlanarField& PlanarField::operator+=(const PlanarField& o) {
  require_same_grid(grid, o.grid, "field +=");
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
  return *this;
}

PlanarField& PlanarField::operator-=(const PlanarField& o) {
  require_same_grid(grid, o.grid, "field -=");
  for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
  return *this;
}

PlanarField& PlanarField::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

PlanarField& PlanarField::axpy(double s, const PlanarField& x) {
  require_same_grid(grid, x.grid, "field axpy");
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += s * x.values[k];
  return *this;
}

PlanarField operator+(PlanarField a, const PlanarField& b) { return a += b; }
PlanarField operator-(PlanarField a, const PlanarField& b) { return a -= b; }
PlanarField operator*(double s, PlanarField a) { return a *= s; }

PlanarField hadamard(const PlanarField& a, const PlanarField& b) {
  require_same_grid(a.grid, b.grid, "hadamard");
  PlanarField out(a.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] * b.values[k];
  return out;
}

double inner_product(const PlanarField& f, const PlanarField& g) {
  require_same_grid(f.grid, g.grid, "inner_product");
  double s = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) s += f.values[k] * g.values[k];
  return s * f.grid.cell_area();
}

double integral(const PlanarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_area();
}

double norm_l2(const PlanarField& f) { return std::sqrt(inner_product(f, f)); }

double max_abs(const PlanarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const PlanarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

PlanarField times_y1(const PlanarField& f) {
  PlanarField out(f.grid);
  for (int i = 0; i < f.grid.n1; ++i) {
    const double y = f.grid.x1(i);
    for (int j = 0; j < f.grid.n2; ++j) out(i, j) = y * f(i, j);
  }
  return out;
}

PlanarField times_y2(const PlanarField& f) {
  PlanarField out(f.grid);
  for (int i = 0; i < f.grid.n1; ++i)
    for (int j = 0; j < f.grid.n2; ++j) out(i, j) = f.grid.x2(j) * f(i, j);
  return out;
}

}  // namespace zk
