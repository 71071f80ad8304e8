#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "zklab/grid.hpp"

namespace zk {

using cplx = std::complex<double>;

// Unnormalized r2c coefficients, n1 x (n2/2 + 1), row-major.
struct Spectrum {
  PlanarGrid grid;
  std::vector<cplx> coeffs;
  cplx& at(int i, int j) { return coeffs[static_cast<std::size_t>(i) * grid.half2() + j]; }
  cplx at(int i, int j) const { return coeffs[static_cast<std::size_t>(i) * grid.half2() + j]; }
};

Spectrum forward(const PlanarField& f);
PlanarField inverse(const Spectrum& s);

// axis is 1 or 2. Odd orders drop the Nyquist mode of that axis.
PlanarField spectral_derivative(const PlanarField& f, int axis, int order = 1);
PlanarField laplacian(const PlanarField& f);
// (a - b1 d1^2 - b2 d2^2)^(-1) f; the symbol must stay positive.
PlanarField elliptic_inverse(const PlanarField& f, double a, double b1, double b2);
// Multiplies by a real symbol s(k1, k2).
PlanarField apply_symbol(const PlanarField& f, const std::function<double(double, double)>& s);
// Diagonal operator M^p with M = 1 - Laplacian.
PlanarField bessel_power(const PlanarField& f, double p);

double gradient_norm_sq(const PlanarField& f);
double h1_norm_sq(const PlanarField& f);
// Fraction of spectral energy in the top third of either axis.
double band_tail_fraction(const PlanarField& f);

using WarningHandler = std::function<void(const std::string&)>;
// Receives resolution warnings from derivative calls; pass nullptr to silence.
void set_warning_handler(WarningHandler h);

// Periodic 1D helpers on n equispaced samples of a box of length len.
std::vector<cplx> forward_1d(const std::vector<double>& f);
std::vector<double> inverse_1d(const std::vector<cplx>& c, int n);
// Band-limited interpolation of periodic samples at arbitrary points. With wrap
// the targets are reduced modulo the box; without it, targets outside the box give 0.
std::vector<double> trig_interpolate_1d(const std::vector<double>& f, double origin, double h,
                                        const std::vector<double>& targets, bool wrap);
PlanarField trig_interpolate(const PlanarField& src, const PlanarGrid& dst, bool wrap);

std::vector<double> apply_symbol_1d(const std::vector<double>& f, double len,
                                    const std::function<double(double)>& s);

}  // namespace zk
