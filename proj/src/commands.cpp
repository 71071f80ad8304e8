#include "zklab/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "zklab/certify.hpp"
#include "zklab/error.hpp"
#include "zklab/evolution.hpp"
#include "zklab/field_io.hpp"
#include "zklab/ground_state.hpp"
#include "zklab/profiles.hpp"
#include "zklab/trace.hpp"

namespace zk {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig effective(RunConfig c, const CommandOptions& o) {
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  validate(c);
  return c;
}

fs::path fresh_dir(const fs::path& root, const std::string& verb) {
  fs::create_directories(root);
  for (int n = 1;; ++n) {
    const fs::path p = root / (n == 1 ? verb : verb + "." + std::to_string(n));
    if (fs::create_directory(p)) return p;
  }
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + p.string());
  out << s;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DependencyError("missing " + p.string());
  return json::parse(in);
}

// Shared framing for every verb: fresh directory, config copy, report, timing.
template <class Body>
CommandResult run(const std::string& verb, const RunConfig& cfg, Body body) {
  const auto t0 = std::chrono::steady_clock::now();
  json results = json::object();
  json artifacts = json::array();
  // Dependencies are resolved before the output directory exists, so a failed
  // lookup leaves nothing behind.
  auto work = body(results, artifacts);
  const fs::path dir = fresh_dir(cfg.out, verb);
  for (auto& [name, writer] : work) {
    writer(dir / name);
    artifacts.push_back(name);
  }
  CommandResult r;
  r.dir = dir;
  r.report = {{"command", verb},
              {"config", to_json(cfg)},
              {"config_sha256", config_hash(cfg)},
              {"results", results},
              {"artifacts", artifacts}};
  write_text(dir / "config.txt", to_text(cfg));
  write_text(dir / "report.json", r.report.dump(2) + "\n");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(dir / "timing.json", json{{"seconds", secs}}.dump(2) + "\n");
  return r;
}

using Writers = std::vector<std::pair<std::string, std::function<void(const fs::path&)>>>;

GroundStateOptions ground_state_options(const RunConfig& c) {
  GroundStateOptions o;
  o.tol = c.ground_state.tol;
  o.r_max = c.ground_state.r_max;
  o.fine_step = c.ground_state.fine_step;
  return o;
}

ProfileOptions profile_options(const RunConfig& c) {
  ProfileOptions o;
  o.box1_left = c.profiles.box1_left;
  o.box1_right = c.profiles.box1_right;
  o.half_width2 = c.profiles.half_width2;
  o.h = c.profiles.h;
  o.taper_margin = c.profiles.taper_margin;
  o.taper_width = c.profiles.taper_width;
  o.solve_tol = c.profiles.solve_tol;
  return o;
}

double finite_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

json profile_summary(const ProfileSet& s) {
  return {{"theta", s.theta},
          {"F_sq", s.F_sq},
          {"F_weighted", s.F_weighted},
          {"PQ", s.PQ},
          {"PQ_identity_defect", std::abs(s.PQ - 0.25 * s.F_sq) / std::abs(s.PQ)},
          {"LambdaP_Q", s.LambdaP_Q},
          {"LambdaQ_Q3", s.LambdaQ_Q3},
          {"c1", s.c1},
          {"c1_closed_form", s.c1_closed_form},
          {"c2", s.c2},
          {"taper_end", s.taper_end},
          {"solve_iterations", s.solve_iterations},
          {"solve_residual", s.solve_residual},
          {"interior_residual", s.interior_residual},
          {"transverse_tail_fraction", s.transverse.tail_fraction}};
}

// Smooth random field: a few low Fourier modes under a Gaussian envelope, unit L2 norm.
PlanarField seeded_perturbation(const PlanarGrid& g, double cx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 4>> modes(8);
  for (auto& m : modes) m = {u(rng), u(rng), 0.5 * u(rng), 0.5 * u(rng)};
  PlanarField f = PlanarField::sample(g, [&](double x, double y) {
    double acc = 0.0;
    for (const auto& m : modes) acc += m[0] * std::cos(m[2] * (x - cx) + m[3] * y) + m[1] * std::sin(m[2] * (x - cx) + m[3] * y);
    return acc * std::exp(-((x - cx) * (x - cx) + y * y) / 16.0);
  });
  f *= 1.0 / norm_l2(f);
  return f;
}

const char* kPlotScript = R"(import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


def panel(table, x, ys, name, logy=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    for y in ys:
        v = [abs(a) if logy else a for a in table[y]]
        ax.plot(table[x], v, label=y)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.legend()
    fig.tight_layout()
    fig.savefig(name)
    plt.close(fig)


here = sys.argv[1] if len(sys.argv) > 1 else "."
ratios = load(f"{here}/b_over_lambda.csv")
panel(ratios, "s", ["b/lambda^theta", "b/lambda^theta*e^J"], f"{here}/b_over_lambda_theta.png")
panel(ratios, "s", ["b/lambda^2"], f"{here}/b_over_lambda2.png")
laws = load(f"{here}/laws.csv")
panel(laws, "s", ["lambda_s/lambda+b", "b_s+theta*b^2"], f"{here}/laws.png", logy=True)
)";

}  // namespace

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v{"ground-state", "theta", "certify", "profiles", "simulate", "diagnose"};
  return v;
}

fs::path latest_run(const fs::path& out, const std::string& verb) {
  fs::path best;
  for (int n = 1;; ++n) {
    const fs::path p = out / (n == 1 ? verb : verb + "." + std::to_string(n));
    if (!fs::exists(p)) break;
    if (fs::exists(p / "report.json")) best = p;
  }
  if (best.empty())
    throw DependencyError("no " + verb + " run under " + out.string() + "; run `zklab " + verb + "` first");
  return best;
}

RadialProfile load_ground_state(const fs::path& out) {
  const fs::path dir = latest_run(out, "ground-state");
  const json rep = read_json(dir / "report.json");
  const CsvTable t = read_csv((dir / "profile.csv").string());
  RadialProfile p;
  const std::size_t cr = t.column("r"), cq = t.column("q"), cd = t.column("dq");
  for (const auto& row : t.rows) {
    p.r.push_back(row[cr]);
    p.q.push_back(row[cq]);
    p.dq.push_back(row[cd]);
  }
  const json& g = rep.at("results").at("profile");
  p.q0 = g.at("q0");
  p.tail_coeff = g.at("tail_coeff");
  p.r_max = g.at("r_max");
  p.residual = g.at("residual");
  p.bisection_steps = g.at("bisection_steps");
  p.newton_steps = g.at("newton_steps");
  if (p.r.size() < 2) throw DependencyError("ground-state profile in " + dir.string() + " is empty");
  return p;
}

CommandResult cmd_ground_state(const RunConfig& c0, const CommandOptions& o) {
  const RunConfig c = effective(c0, o);
  return run("ground-state", c, [&](json& res, json&) {
    const RadialProfile p = solve_ground_state(ground_state_options(c));
    const GroundStateSummary s = summarize(p);
    res["profile"] = {{"q0", p.q0},
                      {"tail_coeff", p.tail_coeff},
                      {"r_max", p.r_max},
                      {"residual", p.residual},
                      {"bisection_steps", p.bisection_steps},
                      {"newton_steps", p.newton_steps},
                      {"nodes", p.r.size()}};
    res["radial"] = {{"mass", s.mass},
                     {"gradient_sq", s.gradient_sq},
                     {"l4", s.l4},
                     {"energy", s.energy},
                     {"pohozaev_defect", s.pohozaev_defect},
                     {"tail_constant", s.tail_constant}};
    const int n = c.ground_state.plane_n;
    const PlanarGrid g = PlanarGrid::centered(c.ground_state.plane_box, c.ground_state.plane_box, n, n);
    const PlanarField Q = sample_to_plane(p, g);
    json gn = json::object();
    for (double a : {0.5, 1.0, 3.0}) gn[format_double(a)] = gagliardo_nirenberg_defect(a * Q, p.mass());
    res["identities"] = {{"mass", mass(Q)}, {"energy", energy(Q)}, {"gn_defect", gn}, {"grid", {{"box", g.length1}, {"n", n}}}};
    Writers w;
    w.emplace_back("profile.csv", [p](const fs::path& path) {
      CsvTable t{{"r", "q", "dq"}, {}};
      for (std::size_t k = 0; k < p.r.size(); ++k) t.rows.push_back({p.r[k], p.q[k], p.dq[k]});
      write_csv(path.string(), t);
    });
    return w;
  });
}

CommandResult cmd_theta(const RunConfig& c0, const CommandOptions& o) {
  const RunConfig c = effective(c0, o);
  return run("theta", c, [&](json& res, json&) {
    const RadialProfile p = load_ground_state(c.out);
    const ProfileSet s = build_profiles(p, profile_options(c));
    res = profile_summary(s);
    Writers w;
    CsvTable t{{"y2", "F", "h2", "Pinf"}, {}};
    for (int j = 0; j < s.grid.n2; ++j) t.rows.push_back({s.grid.x2(j), s.F_row[j], s.h2_row[j], s.Pinf_row[j]});
    w.emplace_back("transverse.csv", [t](const fs::path& path) { write_csv(path.string(), t); });
    return w;
  });
}

CommandResult cmd_profiles(const RunConfig& c0, const CommandOptions& o) {
  const RunConfig c = effective(c0, o);
  return run("profiles", c, [&](json& res, json&) {
    const RadialProfile p = load_ground_state(c.out);
    const auto s = std::make_shared<ProfileSet>(build_profiles(p, profile_options(c)));
    res["profile"] = profile_summary(*s);
    res["decay"] = {{"right_half_plane", s->decay.right_half_plane},
                    {"transverse", s->decay.transverse},
                    {"d1P", s->decay.d1P}};
    res["min_admissible_b"] = min_admissible_b(*s);
    std::vector<RemainderSample> samples;
    for (double b : c.profiles.b_sweep) samples.push_back(remainder_sample(*s, b));
    std::vector<double> bs, md, ed, pd;
    json rows = json::array();
    for (const auto& r : samples) {
      bs.push_back(r.b);
      md.push_back(r.mass_defect);
      ed.push_back(r.energy_defect);
      pd.push_back(r.psi_defect);
      rows.push_back({{"b", r.b},
                      {"mass_defect", r.mass_defect},
                      {"energy_defect", r.energy_defect},
                      {"psi_defect", r.psi_defect},
                      {"bound_constant", r.bound_constant}});
    }
    res["remainders"] = rows;
    auto fit = [&](const std::vector<double>& y) {
      const PowerFit f = fit_power_law(bs, y);
      return json{{"exponent", f.exponent}, {"constant", f.constant}};
    };
    res["fits"] = {{"psi_defect", fit(pd)}, {"energy_defect", fit(ed)}, {"mass_defect", fit(md)}};
    Writers w;
    w.emplace_back("P.bin", [s](const fs::path& path) { write_field(path.string(), s->P); });
    w.emplace_back("remainders.csv", [samples](const fs::path& path) {
      CsvTable t{{"b", "mass_defect", "energy_defect", "psi_defect", "bound_constant"}, {}};
      for (const auto& r : samples) t.rows.push_back({r.b, r.mass_defect, r.energy_defect, r.psi_defect, r.bound_constant});
      write_csv(path.string(), t);
    });
    return w;
  });
}

CommandResult cmd_certify(const RunConfig& c0, const CommandOptions& o) {
  const RunConfig c = effective(c0, o);
  return run("certify", c, [&](json& res, json&) {
    const RadialProfile p = load_ground_state(c.out);
    CertifyOptions opt;
    opt.box = c.certify.box;
    opt.resolutions = c.certify.resolutions;
    opt.oracle_n = c.certify.oracle_n;
    opt.wide_box = c.certify.wide_box;
    opt.eigen.tol = c.certify.eigen_tol;
    opt.eigen.seed = c.seed;
    opt.jobs = o.jobs;
    const CoercivityReport L = certify(p, OperatorKind::L, opt);
    const CoercivityReport A = certify(p, OperatorKind::A, opt);
    res["L"] = to_json(L);
    res["A"] = to_json(A);
    res["mu1"] = L.mu.back();
    res["mu2"] = A.mu.back();
    return Writers{};
  });
}

CommandResult cmd_simulate(const RunConfig& c0, const CommandOptions& o) {
  const RunConfig c = effective(c0, o);
  return run("simulate", c, [&](json& res, json&) {
    const auto& sc = c.simulate;
    const RadialProfile p = load_ground_state(c.out);
    const ProfileSet s = build_profiles(p, profile_options(c));
    const WeightFamily w(c.weights.B, c.weights.A);
    const ModulationContext ctx(p, s, w);
    const PlanarGrid lab = PlanarGrid::centered(sc.box1, sc.box2, sc.n1, sc.n2);
    const ModulationParams m0{sc.lambda0, sc.initial == "qb" ? sc.b0 : 0.0, 0.0, 0.0};
    PlanarField f0 = synthesize(ctx, lab, m0);
    if (sc.perturbation > 0.0) f0.axpy(sc.perturbation, seeded_perturbation(lab, 0.0, c.seed));

    EvolutionOptions eo;
    eo.dt = sc.dt;
    eo.stride = sc.stride;
    eo.frame_speed = sc.frame_speed;
    eo.halt_mass_drift = sc.halt_mass_drift;
    const auto traj = std::make_shared<Trajectory>(evolve(f0, sc.horizon, eo));

    TraceOptions to;
    to.decompose.tol = c.modulation.tol;
    to.decompose.abs_floor = c.modulation.abs_floor;
    to.decompose.max_iter = c.modulation.max_iter;
    to.decompose.smallness = c.modulation.smallness;
    to.kappa = c.modulation.kappa;
    to.jobs = o.jobs;
    const auto mt = std::make_shared<ModulationTrace>(trace(ctx, *traj, to));

    const std::size_t n = mt->rows.size();
    int failed = 0;
    double lam_ratio = 0.0, b_ratio = 0.0, refined_ratio = 0.0, b_max = 0.0, lam_dev = 0.0, mass_exp = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const TraceRow& r = mt->rows[k];
      if (!r.ok) {
        ++failed;
        continue;
      }
      const double b2 = r.params.b * r.params.b;
      if (std::isfinite(mt->lambda_law[k]))
        lam_ratio = std::max(lam_ratio, std::abs(mt->lambda_law[k]) / (b2 + std::sqrt(r.local)));
      if (std::isfinite(mt->b_law[k])) b_ratio = std::max(b_ratio, std::abs(mt->b_law[k]) / (b2 + r.local));
      if (std::isfinite(mt->refined_rate[k]) && mt->refined_rhs[k] > 0.0)
        refined_ratio = std::max(refined_ratio, std::abs(mt->refined_rate[k]) / mt->refined_rhs[k]);
      b_max = std::max(b_max, std::abs(r.params.b));
      lam_dev = std::max(lam_dev, std::abs(r.params.lambda - mt->rows.front().params.lambda));
      mass_exp = std::max(mass_exp, std::abs(r.mass_expansion) / (r.eps_l2 * r.eps_l2 + std::abs(r.params.b)));
    }
    json mono = json::array();
    std::vector<std::vector<double>> I;
    if (mt->rows.back().ok) {
      for (double xa : c.modulation.x0_over_A) {
        const double x0 = xa * c.weights.A;
        I.push_back(mass_monotonicity(*traj, *mt, x0, w));
        const double slack = c.weights.A * std::exp(-x0 / c.weights.A);
        double excess = -INFINITY;
        for (double v : I.back())
          if (std::isfinite(v)) excess = std::max(excess, v - I.back().back() - slack);
        mono.push_back({{"x0", x0}, {"slack", slack}, {"max_excess", excess}, {"holds", excess <= 0.0}});
      }
    }
    res["evolution"] = {{"steps", traj->times.size() - 1},
                        {"snapshots", n},
                        {"mass_drift", traj->mass_drift()},
                        {"energy_drift", traj->energy_drift()},
                        {"halted", traj->halted},
                        {"halt_reason", traj->halt_reason}};
    res["trace"] = {{"theta", mt->theta},
                    {"B", mt->B},
                    {"E0", mt->E0},
                    {"failed_rows", failed},
                    {"max_abs_b", b_max},
                    {"max_lambda_deviation", lam_dev},
                    {"max_lambda_law", finite_max(mt->lambda_law)},
                    {"max_b_law", finite_max(mt->b_law)},
                    {"lambda_law_ratio", lam_ratio},
                    {"b_law_ratio", b_ratio},
                    {"refined_ratio", refined_ratio},
                    {"max_b_over_lambda2", finite_max(mt->b_over_lambda2)},
                    {"mass_expansion_ratio", mass_exp}};
    res["mass_monotonicity"] = mono;

    Writers wr;
    wr.emplace_back("initial.bin", [f0](const fs::path& path) { write_field(path.string(), f0); });
    wr.emplace_back("final.bin", [traj](const fs::path& path) { write_field(path.string(), traj->snapshots.back()); });
    wr.emplace_back("invariants.csv", [traj](const fs::path& path) {
      CsvTable t{{"t", "mass", "energy", "gradient"}, {}};
      for (std::size_t k = 0; k < traj->times.size(); ++k)
        t.rows.push_back({traj->times[k], traj->mass[k], traj->energy[k], traj->gradient[k]});
      write_csv(path.string(), t);
    });
    wr.emplace_back("trace.csv", [mt](const fs::path& path) {
      std::ofstream os(path);
      write_trace_csv(*mt, os);
    });
    wr.emplace_back("rates.csv", [mt](const fs::path& path) {
      std::ofstream os(path);
      write_rates_csv(*mt, os);
    });
    if (!I.empty()) {
      const auto xs = c.modulation.x0_over_A;
      wr.emplace_back("mass_monotonicity.csv", [traj, I, xs](const fs::path& path) {
        CsvTable t{{"t"}, {}};
        for (double xa : xs) t.header.push_back("I_x0=" + format_double(xa) + "A");
        for (std::size_t k = 0; k < traj->snapshot_times.size(); ++k) {
          std::vector<double> row{traj->snapshot_times[k]};
          for (const auto& series : I) row.push_back(series[k]);
          t.rows.push_back(row);
        }
        write_csv(path.string(), t);
      });
    }
    return wr;
  });
}

CommandResult cmd_diagnose(const RunConfig& c0, const CommandOptions& o) {
  const RunConfig c = effective(c0, o);
  return run("diagnose", c, [&](json& res, json&) {
    const fs::path src = latest_run(c.out, "simulate");
    const json rep = read_json(src / "report.json");
    const double theta = rep.at("results").at("trace").at("theta");
    const CsvTable tr = read_csv((src / "trace.csv").string());
    if (tr.header != trace_csv_columns()) throw NumericalError("trace.csv in " + src.string() + " does not match the trace schema");
    const std::size_t n = tr.rows.size();
    auto col = [&](const std::string& name) {
      std::vector<double> v;
      const std::size_t k = tr.column(name);
      for (const auto& r : tr.rows) v.push_back(r[k]);
      return v;
    };
    const auto t = col("t"), s = col("s"), lam = col("lambda"), b = col("b"), J = col("J");
    std::vector<double> loglam(n);
    for (std::size_t k = 0; k < n; ++k) loglam[k] = std::log(lam[k]);
    const auto dl = differentiate(s, loglam), db = differentiate(s, b);
    CsvTable ratios{{"t", "s", "b/lambda^theta", "b/lambda^theta*e^J", "b/lambda^2"}, {}};
    CsvTable laws{{"t", "s", "lambda_s/lambda+b", "b_s+theta*b^2"}, {}};
    std::vector<double> blt(n), bl2(n), ll(n), bll(n);
    for (std::size_t k = 0; k < n; ++k) {
      blt[k] = b[k] / std::pow(lam[k], theta);
      bl2[k] = b[k] / (lam[k] * lam[k]);
      ll[k] = dl[k] + b[k];
      bll[k] = db[k] + theta * b[k] * b[k];
      ratios.rows.push_back({t[k], s[k], blt[k], blt[k] * std::exp(J[k]), bl2[k]});
      laws.rows.push_back({t[k], s[k], ll[k], bll[k]});
    }
    res = {{"source", src.filename().string()},
           {"source_config_sha256", rep.at("config_sha256")},
           {"rows", n},
           {"theta", theta},
           {"max_abs_b_over_lambda_theta", finite_max(blt)},
           {"max_abs_b_over_lambda2", finite_max(bl2)},
           {"max_abs_lambda_law", finite_max(ll)},
           {"max_abs_b_law", finite_max(bll)}};
    Writers w;
    const fs::path trace_src = src / "trace.csv";
    w.emplace_back("trace.csv", [trace_src](const fs::path& path) { fs::copy_file(trace_src, path); });
    w.emplace_back("b_over_lambda.csv", [ratios](const fs::path& path) { write_csv(path.string(), ratios); });
    w.emplace_back("laws.csv", [laws](const fs::path& path) { write_csv(path.string(), laws); });
    w.emplace_back("plot_diagnostics.py", [](const fs::path& path) { write_text(path, kPlotScript); });
    return w;
  });
}

CommandResult run_verb(const std::string& verb, const RunConfig& c, const CommandOptions& o) {
  if (verb == "ground-state") return cmd_ground_state(c, o);
  if (verb == "theta") return cmd_theta(c, o);
  if (verb == "certify") return cmd_certify(c, o);
  if (verb == "profiles") return cmd_profiles(c, o);
  if (verb == "simulate") return cmd_simulate(c, o);
  if (verb == "diagnose") return cmd_diagnose(c, o);
  throw ConfigError("unknown verb '" + verb + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return 2;
  if (dynamic_cast<const DependencyError*>(&e)) return 4;
  return 3;
}

}  // namespace zk
