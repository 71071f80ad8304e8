#include "zklab/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "zklab/error.hpp"
#include "zklab/field_io.hpp"

namespace zk {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(key + ": not a finite number: '" + s + "'");
  return v;
}

template <class I>
I parse_integer(const std::string& key, const std::string& s) {
  I v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(key + ": not an integer: '" + s + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& key, const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

struct Entry {
  std::string name, unit;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<nlohmann::json(const RunConfig&)> json;
};

template <class M>
Entry real(std::string name, std::string unit, M member) {
  return {name, std::move(unit), [member](const RunConfig& c) { return format_double(member(c)); },
          [member, name](RunConfig& c, const std::string& v) { member(c) = parse_double(name, v); },
          [member](const RunConfig& c) { return nlohmann::json(member(c)); }};
}

template <class M>
Entry integer(std::string name, M member) {
  using I = std::remove_reference_t<decltype(member(std::declval<RunConfig&>()))>;
  return {name, "", [member](const RunConfig& c) { return std::to_string(member(c)); },
          [member, name](RunConfig& c, const std::string& v) { member(c) = parse_integer<I>(name, v); },
          [member](const RunConfig& c) { return nlohmann::json(member(c)); }};
}

template <class M>
Entry text(std::string name, M member) {
  return {name, "", [member](const RunConfig& c) { return member(c); },
          [member, name](RunConfig& c, const std::string& v) {
            if (v.empty() || v.find_first_of(" \t#") != std::string::npos)
              throw ConfigError(name + ": expected a single word");
            member(c) = v;
          },
          [member](const RunConfig& c) { return nlohmann::json(member(c)); }};
}

template <class M>
Entry real_list(std::string name, std::string unit, M member) {
  return {name, std::move(unit),
          [member](const RunConfig& c) {
            std::string s;
            for (double v : member(c)) s += (s.empty() ? "" : ",") + format_double(v);
            return s;
          },
          [member, name](RunConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const auto& item : split_list(name, v)) out.push_back(parse_double(name, item));
            member(c) = out;
          },
          [member](const RunConfig& c) { return nlohmann::json(member(c)); }};
}

template <class M>
Entry int_list(std::string name, M member) {
  return {name, "",
          [member](const RunConfig& c) {
            std::string s;
            for (int v : member(c)) s += (s.empty() ? "" : ",") + std::to_string(v);
            return s;
          },
          [member, name](RunConfig& c, const std::string& v) {
            std::vector<int> out;
            for (const auto& item : split_list(name, v)) out.push_back(parse_integer<int>(name, item));
            member(c) = out;
          },
          [member](const RunConfig& c) { return nlohmann::json(member(c)); }};
}

#define ZK_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = {
      integer("seed", ZK_FIELD(seed)),
      text("out", ZK_FIELD(out)),
      real("ground_state.tol", "", ZK_FIELD(ground_state.tol)),
      real("ground_state.r_max", "length", ZK_FIELD(ground_state.r_max)),
      real("ground_state.fine_step", "length", ZK_FIELD(ground_state.fine_step)),
      real("ground_state.plane_box", "length", ZK_FIELD(ground_state.plane_box)),
      integer("ground_state.plane_n", ZK_FIELD(ground_state.plane_n)),
      real("profiles.box1_left", "length", ZK_FIELD(profiles.box1_left)),
      real("profiles.box1_right", "length", ZK_FIELD(profiles.box1_right)),
      real("profiles.half_width2", "length", ZK_FIELD(profiles.half_width2)),
      real("profiles.h", "length", ZK_FIELD(profiles.h)),
      real("profiles.taper_margin", "length", ZK_FIELD(profiles.taper_margin)),
      real("profiles.taper_width", "length", ZK_FIELD(profiles.taper_width)),
      real("profiles.solve_tol", "", ZK_FIELD(profiles.solve_tol)),
      real_list("profiles.b_sweep", "", ZK_FIELD(profiles.b_sweep)),
      real("certify.box", "length", ZK_FIELD(certify.box)),
      int_list("certify.resolutions", ZK_FIELD(certify.resolutions)),
      integer("certify.oracle_n", ZK_FIELD(certify.oracle_n)),
      real("certify.wide_box", "length", ZK_FIELD(certify.wide_box)),
      real("certify.eigen_tol", "", ZK_FIELD(certify.eigen_tol)),
      real("weights.B", "length", ZK_FIELD(weights.B)),
      real("weights.A", "length", ZK_FIELD(weights.A)),
      text("simulate.initial", ZK_FIELD(simulate.initial)),
      real("simulate.lambda0", "", ZK_FIELD(simulate.lambda0)),
      real("simulate.b0", "", ZK_FIELD(simulate.b0)),
      real("simulate.perturbation", "", ZK_FIELD(simulate.perturbation)),
      real("simulate.box1", "length", ZK_FIELD(simulate.box1)),
      real("simulate.box2", "length", ZK_FIELD(simulate.box2)),
      integer("simulate.n1", ZK_FIELD(simulate.n1)),
      integer("simulate.n2", ZK_FIELD(simulate.n2)),
      real("simulate.dt", "time", ZK_FIELD(simulate.dt)),
      real("simulate.horizon", "time", ZK_FIELD(simulate.horizon)),
      integer("simulate.stride", ZK_FIELD(simulate.stride)),
      real("simulate.frame_speed", "velocity", ZK_FIELD(simulate.frame_speed)),
      real("simulate.halt_mass_drift", "", ZK_FIELD(simulate.halt_mass_drift)),
      real("modulation.tol", "", ZK_FIELD(modulation.tol)),
      real("modulation.abs_floor", "", ZK_FIELD(modulation.abs_floor)),
      integer("modulation.max_iter", ZK_FIELD(modulation.max_iter)),
      real("modulation.smallness", "", ZK_FIELD(modulation.smallness)),
      real("modulation.kappa", "", ZK_FIELD(modulation.kappa)),
      real_list("modulation.x0_over_A", "", ZK_FIELD(modulation.x0_over_A)),
  };
  return e;
}

#undef ZK_FIELD

const Entry& find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.name == key) return e;
  throw ConfigError("unknown config key '" + key + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

bool even_positive(int n) { return n > 0 && n % 2 == 0; }

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> s = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back({e.name, e.unit});
    return out;
  }();
  return s;
}

std::string to_text(const RunConfig& c) {
  std::string out;
  for (const auto& e : entries()) {
    out += e.name + " = " + e.get(c);
    if (!e.unit.empty()) out += " " + e.unit;
    out += "\n";
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const Entry& e = find_entry(key);
    if (!seen.insert(key).second) throw ConfigError(key + ": given twice");
    // The unit is the last word; lists never contain spaces after trimming items.
    std::string unit;
    if (const auto sp = value.find_last_of(" \t"); sp != std::string::npos) {
      unit = value.substr(sp + 1);
      value = trim(value.substr(0, sp));
    }
    if (unit != e.unit) {
      if (e.unit.empty()) throw ConfigError(key + ": dimensionless, got unit '" + unit + "'");
      throw ConfigError(key + ": expected unit '" + e.unit + "'" + (unit.empty() ? "" : ", got '" + unit + "'"));
    }
    e.set(c, value);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  const auto& g = c.ground_state;
  require(g.tol > 0.0, "ground_state.tol", "must be positive");
  require(g.r_max > 5.0, "ground_state.r_max", "must exceed 5");
  require(g.fine_step > 0.0 && g.fine_step < 0.1, "ground_state.fine_step", "must lie in (0, 0.1)");
  require(g.plane_box > 0.0, "ground_state.plane_box", "must be positive");
  require(even_positive(g.plane_n), "ground_state.plane_n", "must be positive and even");

  const auto& p = c.profiles;
  require(p.box1_left < 0.0 && p.box1_right > 0.0, "profiles.box1_left", "box must contain 0");
  require(p.half_width2 > 0.0, "profiles.half_width2", "must be positive");
  require(p.h > 0.0, "profiles.h", "must be positive");
  require(p.taper_margin >= 0.0 && p.taper_width > 0.0, "profiles.taper_width", "taper must be nonnegative/positive");
  require(p.solve_tol > 0.0, "profiles.solve_tol", "must be positive");
  for (double b : p.b_sweep) require(b != 0.0 && std::abs(b) <= 0.1, "profiles.b_sweep", "entries in 0 < |b| <= 0.1");

  const auto& k = c.certify;
  require(k.box > 0.0, "certify.box", "must be positive");
  require(!k.resolutions.empty(), "certify.resolutions", "need at least one");
  for (int n : k.resolutions) require(even_positive(n), "certify.resolutions", "entries must be positive and even");
  require(k.oracle_n == 0 || even_positive(k.oracle_n), "certify.oracle_n", "must be 0 or positive and even");
  require(k.wide_box >= 0.0, "certify.wide_box", "must be nonnegative");
  require(k.eigen_tol > 0.0, "certify.eigen_tol", "must be positive");

  require(c.weights.B > 100.0, "weights.B", "must exceed 100");
  require(c.weights.A > 1.0, "weights.A", "must exceed 1");

  const auto& s = c.simulate;
  require(s.initial == "soliton" || s.initial == "qb", "simulate.initial", "must be soliton or qb");
  require(s.lambda0 > 0.0, "simulate.lambda0", "must be positive");
  require(std::abs(s.b0) <= 0.1, "simulate.b0", "must satisfy |b0| <= 0.1");
  require(s.perturbation >= 0.0, "simulate.perturbation", "must be nonnegative");
  require(s.box1 > 0.0 && s.box2 > 0.0, "simulate.box1", "box must be positive");
  require(even_positive(s.n1) && even_positive(s.n2), "simulate.n1", "point counts must be positive and even");
  require(s.dt > 0.0, "simulate.dt", "must be positive");
  require(s.horizon > 0.0, "simulate.horizon", "must be positive");
  require(s.stride > 0, "simulate.stride", "must be positive");
  require(s.halt_mass_drift >= 0.0, "simulate.halt_mass_drift", "must be nonnegative");

  const auto& m = c.modulation;
  require(m.tol > 0.0, "modulation.tol", "must be positive");
  require(m.abs_floor >= 0.0, "modulation.abs_floor", "must be nonnegative");
  require(m.max_iter > 0, "modulation.max_iter", "must be positive");
  require(m.smallness > 0.0, "modulation.smallness", "must be positive");
  require(m.kappa > 0.0, "modulation.kappa", "must be positive");
  for (double x : m.x0_over_A) require(x > 0.0, "modulation.x0_over_A", "entries must be positive");
  require(!c.out.empty(), "out", "must be nonempty");
}

std::string config_hash(const RunConfig& c) {
  const std::string t = to_text(c);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(t.data(), t.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("config_hash: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : entries()) {
    nlohmann::json v = e.json(c);
    if (!e.unit.empty()) v = {{"value", v}, {"unit", e.unit}};
    j[e.name] = v;
  }
  return j;
}

}  // namespace zk
