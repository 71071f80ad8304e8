#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace zk {

// Every run is described by one of these. On disk it is a line per key,
//   key = value [unit]
// with '#' comments; unknown keys, missing or wrong units and malformed values are
// ConfigError. Keys not present keep their defaults.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "runs";

  struct {
    double tol = 1e-9;
    double r_max = 20.0;
    double fine_step = 1e-3;
    double plane_box = 48.0;  // planar identity checks
    int plane_n = 384;
  } ground_state;

  struct {
    double box1_left = -96.0;
    double box1_right = 32.0;
    double half_width2 = 32.0;
    double h = 0.125;
    double taper_margin = 8.0;
    double taper_width = 8.0;
    double solve_tol = 1e-11;
    std::vector<double> b_sweep{-0.05, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.05};
  } profiles;

  struct {
    double box = 24.0;
    std::vector<int> resolutions{96, 128, 160};
    int oracle_n = 64;
    double wide_box = 32.0;
    double eigen_tol = 1e-9;
  } certify;

  struct {
    double B = 128.0;
    double A = 64.0;
  } weights;

  struct {
    std::string initial = "qb";  // soliton | qb
    double lambda0 = 1.0;
    double b0 = -0.02;
    double perturbation = 0.0;  // amplitude of a seeded smooth perturbation
    double box1 = 96.0;
    double box2 = 48.0;
    int n1 = 512;
    int n2 = 256;
    double dt = 0.005;
    double horizon = 5.0;
    int stride = 40;
    double frame_speed = 1.0;
    double halt_mass_drift = 0.0;
  } simulate;

  struct {
    double tol = 1e-10;
    double abs_floor = 1e-13;
    int max_iter = 50;
    double smallness = 0.5;
    double kappa = 0.1;
    std::vector<double> x0_over_A{1.0, 5.0, 10.0};
  } modulation;
};

// Canonical text: every key in schema order, shortest round-trip numbers.
std::string to_text(const RunConfig& c);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Throws ConfigError naming the first offending key.
void validate(const RunConfig& c);
// SHA-256 of to_text(c), lower-case hex.
std::string config_hash(const RunConfig& c);
nlohmann::json to_json(const RunConfig& c);

struct ConfigKey {
  std::string name, unit;
};
const std::vector<ConfigKey>& config_schema();

}  // namespace zk
