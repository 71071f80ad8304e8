#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zklab/evolution.hpp"
#include "zklab/modulation.hpp"

namespace zk {

struct TraceRow {
  double t = 0.0;
  double s = 0.0;
  bool ok = false;
  std::string error;  // decomposition failure, if any
  ModulationParams params;
  std::array<double, 4> residuals{};
  int iterations = 0;
  double eps_l2 = 0.0;
  double local = 0.0;  // int eps^2 e^{-|y|/10}
  JValues J;
  std::array<double, 3> N{};
  std::array<std::array<double, 2>, 2> M{};
  BootstrapFlags H;
  double mass_expansion = 0.0;  // |eps|^2 + 2 b (P,Q) - (|phi|^2 - |Q|^2)
};

struct ModulationTrace {
  double theta = 0.0;
  double B = 0.0;
  double E0 = 0.0;  // energy of the first snapshot
  std::vector<TraceRow> rows;
  // Central differences in s, one-sided at the ends; NaN next to failed rows.
  std::vector<ParameterRates> rates;
  std::vector<double> lambda_law;    // lambda_s/lambda + b
  std::vector<double> b_law;         // b_s + theta b^2
  std::vector<double> x1_law;        // x1_s/lambda - 1
  std::vector<double> refined;       // b/lambda^theta e^J
  std::vector<double> refined_rate;  // d/ds of refined
  std::vector<double> refined_rhs;   // e^J lambda^{-theta} (B^5 |b|^3 + (B^5 |b| + 1) N0)
  std::vector<double> b_over_lambda_theta, b_over_lambda2;
};

struct TraceOptions {
  DecomposeOptions decompose;
  double kappa = 0.1;  // bootstrap smallness in (H1), (H2)
  int jobs = 1;
};

// Guesses come from each snapshot's peak; the decompositions then run on `jobs` threads.
ModulationTrace trace(const ModulationContext& ctx, const Trajectory& tr, const TraceOptions& opt = {});

// Derivative of f at every node of s, second order on nonuniform nodes.
std::vector<double> differentiate(const std::vector<double>& s, const std::vector<double>& f);

const std::vector<std::string>& trace_csv_columns();
void write_trace_csv(const ModulationTrace& tr, std::ostream& os);
// t, s and the law series, for the diagnostic figures.
void write_rates_csv(const ModulationTrace& tr, std::ostream& os);

// I(t) = int phi^2 psi_A(x1 - x0 - x1(t1) - (x1(t) - x1(t1))/4) per snapshot, t1 the last one.
std::vector<double> mass_monotonicity(const Trajectory& tr, const ModulationTrace& mt, double x0,
                                      const WeightFamily& w);

// |grad phi(t)| (t - T)^{1/3}; throws PreconditionError if T is after the last sample.
std::vector<double> blowup_rate_bound(const std::vector<double>& t, const std::vector<double>& gradient, double T);

}  // namespace zk
