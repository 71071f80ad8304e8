#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "zklab/krylov.hpp"
#include "zklab/operators.hpp"
#include "zklab/radial.hpp"

namespace zk {

struct CertifyOptions {
  double box = 24.0;
  std::vector<int> resolutions{96, 128, 160};
  int oracle_n = 64;  // 0 disables the dense cross-check
  double wide_box = 32.0;  // box-sensitivity probe at the finest spacing; 0 disables
  EigenOptions eigen{};
  int jobs = 1;
};

struct CoercivityReport {
  std::string op;
  std::string norm = "H1";
  std::vector<std::string> constraints;
  double box = 0.0;
  std::vector<int> resolutions;
  std::vector<double> mu;
  std::vector<double> residuals;
  std::vector<int> iterations;
  double mu_extrapolated = 0.0;
  double relative_variation = 0.0;
  int oracle_n = 0;
  double oracle_mu = 0.0;
  double oracle_lobpcg_mu = 0.0;
  double unconstrained_mu = 0.0;
  double enlarged_mu = 0.0;
  double wide_box_mu = 0.0;
  double symmetry_defect = 0.0;
  double kernel_residual = 0.0;
  bool positive = false;
};

// L with {Q^3, d1Q, d2Q}, A with {Q, d1Q, d2Q}; both in the H1 norm.
CoercivityReport certify(const RadialProfile& p, OperatorKind kind, const CertifyOptions& opt = {});

// Fits mu(h) = mu* + C h^p through three points; returns the finest value when no fit exists.
double richardson_extrapolate(const std::vector<double>& h, const std::vector<double>& mu);

nlohmann::json to_json(const CoercivityReport& r);

}  // namespace zk
