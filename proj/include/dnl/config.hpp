#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/report.hpp"
#include "dnl/stepper.hpp"

namespace dnl {

/// Fully resolved experiment configuration. Defaults are documented in the
/// README; unknown keys are rejected at load time.
struct RunConfig {
  // [problem]
  double p = 0.0;  // required
  double domain_a = 0.0;
  double domain_b = 1.0;
  double final_time = 1.0;
  std::string boundary_family = "constant";
  std::vector<double> boundary_params = {1.0};

  // [discretization]
  std::size_t time_steps = 100;
  std::size_t elements = 32;
  int quadrature_order = 4;
  bool lumped_time = true;

  // [solver]
  SolveConfig solver;

  // [experiment]
  std::vector<double> gammas = {0.2, 0.1, 0.05};
  std::size_t ladder_rungs = 3;
  std::size_t ladder_time_steps = 50;
  std::size_t ladder_elements = 16;
  std::vector<double> cutoffs;  // empty: T/4, T/2, T
  std::string zeta_family = "bump";
  std::vector<double> zeta_params = {1.0};
  double window_t1 = 0.0;
  double window_t2 = -1.0;  // -1: the final time
  std::size_t ineq_samples = 10000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string oracle = "none";  // none | heat | separable
  std::size_t oracle_resolution = 4096;
  std::string solution_csv;  // optional: verify a stored solution

  // [output]
  std::string out_dir = "out";
  std::string format = "both";  // csv | json | both

  std::vector<double> resolved_cutoffs() const {
    if (!cutoffs.empty()) return cutoffs;
    return {final_time / 4.0, final_time / 2.0, final_time};
  }
  double resolved_window_t2() const { return window_t2 < 0.0 ? final_time : window_t2; }
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem", {"p", "domain_a", "domain_b", "final_time", "boundary_family", "boundary_params"}},
      {"discretization", {"time_steps", "elements", "quadrature_order", "lumped_time"}},
      {"solver",
       {"gradient_tol", "max_iterations", "eps_reg_scale", "eps_reg_floor", "backtrack_factor",
        "sufficient_decrease", "max_backtracks"}},
      {"experiment",
       {"gammas", "ladder_rungs", "ladder_time_steps", "ladder_elements", "cutoffs", "zeta_family",
        "zeta_params", "window_t1", "window_t2", "ineq_samples", "seed", "oracle",
        "oracle_resolution", "solution_csv"}},
      {"output", {"directory", "format"}},
  };
  return keys;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string suggest_key(const std::string& section, const std::string& key) {
  const auto it = known_keys().find(section);
  if (it == known_keys().end()) return {};
  std::string best;
  std::size_t best_d = key.size() + 1;
  for (const auto& k : it->second) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return (best_d <= std::max<std::size_t>(2, key.size() / 2)) ? best : std::string();
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct RawConfig {
  // section -> key -> (value text, line number)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> entries;
};

inline RawConfig parse_ini(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section))
        throw config_error("config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw config_error("config line " + std::to_string(line_no) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().at(section).count(key)) {
      std::string msg = "config line " + std::to_string(line_no) + ": unknown key '" + section + "." + key + "'";
      const std::string hint = suggest_key(section, key);
      if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
      throw config_error(msg);
    }
    if (raw.entries[section].count(key))
      throw config_error("config line " + std::to_string(line_no) + ": duplicate key '" + section + "." + key + "'");
    raw.entries[section][key] = {value, line_no};
  }
  return raw;
}

struct ValueReader {
  const RawConfig& raw;

  bool has(const std::string& section, const std::string& key) const {
    const auto s = raw.entries.find(section);
    return s != raw.entries.end() && s->second.count(key);
  }
  std::string text(const std::string& section, const std::string& key) const {
    return raw.entries.at(section).at(key).first;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string t = text(section, key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw config_error("config: key '" + section + "." + key + "' is not a number: '" + t + "'");
    }
  }
  std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) const {
    const double v = number(section, key, static_cast<double>(fallback));
    if (v < 0.0 || v != std::floor(v))
      throw config_error("config: key '" + section + "." + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string t = text(section, key);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw config_error("config: key '" + section + "." + key + "' must be true or false");
  }
  std::string str(const std::string& section, const std::string& key, std::string fallback) const {
    return has(section, key) ? text(section, key) : fallback;
  }
  std::vector<double> list(const std::string& section, const std::string& key,
                           std::vector<double> fallback) const {
    if (!has(section, key)) return fallback;
    std::string t = text(section, key);
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream in(t);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw config_error("config: key '" + section + "." + key + "' has a non-numeric entry '" + tok + "'");
      }
    }
    return out;
  }
};

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
  const detail::RawConfig raw = detail::parse_ini(text);
  const detail::ValueReader rd{raw};
  RunConfig cfg;

  if (!rd.has("problem", "p")) throw config_error("config: required key 'problem.p' is missing");
  cfg.p = rd.number("problem", "p", 0.0);
  cfg.domain_a = rd.number("problem", "domain_a", cfg.domain_a);
  cfg.domain_b = rd.number("problem", "domain_b", cfg.domain_b);
  cfg.final_time = rd.number("problem", "final_time", cfg.final_time);
  cfg.boundary_family = rd.str("problem", "boundary_family", cfg.boundary_family);
  cfg.boundary_params = rd.list("problem", "boundary_params", cfg.boundary_params);

  cfg.time_steps = rd.count("discretization", "time_steps", cfg.time_steps);
  cfg.elements = rd.count("discretization", "elements", cfg.elements);
  cfg.quadrature_order = static_cast<int>(rd.count("discretization", "quadrature_order",
                                                   static_cast<std::size_t>(cfg.quadrature_order)));
  cfg.lumped_time = rd.flag("discretization", "lumped_time", cfg.lumped_time);

  cfg.solver.gradient_tol = rd.number("solver", "gradient_tol", cfg.solver.gradient_tol);
  cfg.solver.max_iterations = static_cast<int>(rd.count("solver", "max_iterations",
                                                        static_cast<std::size_t>(cfg.solver.max_iterations)));
  cfg.solver.eps_reg_scale = rd.number("solver", "eps_reg_scale", cfg.solver.eps_reg_scale);
  cfg.solver.eps_reg_floor = rd.number("solver", "eps_reg_floor", cfg.solver.eps_reg_floor);
  cfg.solver.backtrack_factor = rd.number("solver", "backtrack_factor", cfg.solver.backtrack_factor);
  cfg.solver.sufficient_decrease = rd.number("solver", "sufficient_decrease", cfg.solver.sufficient_decrease);
  cfg.solver.max_backtracks = static_cast<int>(rd.count("solver", "max_backtracks",
                                                        static_cast<std::size_t>(cfg.solver.max_backtracks)));

  cfg.gammas = rd.list("experiment", "gammas", cfg.gammas);
  cfg.ladder_rungs = rd.count("experiment", "ladder_rungs", cfg.ladder_rungs);
  cfg.ladder_time_steps = rd.count("experiment", "ladder_time_steps", cfg.ladder_time_steps);
  cfg.ladder_elements = rd.count("experiment", "ladder_elements", cfg.ladder_elements);
  cfg.cutoffs = rd.list("experiment", "cutoffs", cfg.cutoffs);
  cfg.zeta_family = rd.str("experiment", "zeta_family", cfg.zeta_family);
  cfg.zeta_params = rd.list("experiment", "zeta_params", cfg.zeta_params);
  cfg.window_t1 = rd.number("experiment", "window_t1", cfg.window_t1);
  cfg.window_t2 = rd.number("experiment", "window_t2", cfg.window_t2);
  cfg.ineq_samples = rd.count("experiment", "ineq_samples", cfg.ineq_samples);
  if (rd.has("experiment", "seed")) {
    cfg.seed = static_cast<std::uint64_t>(rd.count("experiment", "seed", 0));
    cfg.seed_set = true;
  }
  cfg.oracle = rd.str("experiment", "oracle", cfg.oracle);
  cfg.oracle_resolution = rd.count("experiment", "oracle_resolution", cfg.oracle_resolution);
  cfg.solution_csv = rd.str("experiment", "solution_csv", cfg.solution_csv);

  cfg.out_dir = rd.str("output", "directory", cfg.out_dir);
  cfg.format = rd.str("output", "format", cfg.format);

  // validation
  if (!std::isfinite(cfg.p) || !(cfg.p > 2.0))
    throw config_error("config: 'problem.p' must be > 2 (use 2 + 1e-12 for the heat-mode studies), got " +
                       std::to_string(cfg.p));
  if (!(cfg.domain_a < cfg.domain_b))
    throw config_error("config: 'problem.domain_a' must be below 'problem.domain_b'");
  if (!(cfg.final_time > 0.0)) throw config_error("config: 'problem.final_time' must be positive");
  {
    bool known = false;
    for (const auto& fam : boundary_families()) known = known || fam == cfg.boundary_family;
    if (!known)
      throw config_error("config: 'problem.boundary_family' names an unknown family '" +
                         cfg.boundary_family + "'");
    try {
      make_boundary(cfg.boundary_family, cfg.boundary_params);  // parameter count check
    } catch (const std::invalid_argument& err) {
      throw config_error(std::string("config: 'problem.boundary_params': ") + err.what());
    }
  }
  if (cfg.time_steps == 0) throw config_error("config: 'discretization.time_steps' must be >= 1");
  if (cfg.elements == 0) throw config_error("config: 'discretization.elements' must be >= 1");
  if (cfg.quadrature_order < 1 || cfg.quadrature_order > 10)
    throw config_error("config: 'discretization.quadrature_order' must lie in 1..10");
  if (!(cfg.solver.gradient_tol > 0.0)) throw config_error("config: 'solver.gradient_tol' must be positive");
  if (cfg.solver.max_iterations < 1) throw config_error("config: 'solver.max_iterations' must be >= 1");
  for (std::size_t i = 0; i < cfg.gammas.size(); ++i) {
    if (!(cfg.gammas[i] > 0.0)) throw config_error("config: 'experiment.gammas' must be positive");
    if (i > 0 && !(cfg.gammas[i] < cfg.gammas[i - 1]))
      throw config_error("config: 'experiment.gammas' must decrease strictly");
  }
  if (cfg.ladder_rungs < 2) throw config_error("config: 'experiment.ladder_rungs' must be >= 2");
  for (double c : cfg.cutoffs)
    if (!(c > 0.0) || c > cfg.final_time * (1.0 + 1e-12))
      throw config_error("config: 'experiment.cutoffs' must lie in (0, final_time]");
  if (cfg.oracle != "none" && cfg.oracle != "heat" && cfg.oracle != "separable")
    throw config_error("config: 'experiment.oracle' must be none, heat, or separable");
  if (cfg.oracle_resolution < 100)
    throw config_error("config: 'experiment.oracle_resolution' must be >= 100");
  if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both")
    throw config_error("config: 'output.format' must be csv, json, or both");
  const double w2 = cfg.resolved_window_t2();
  if (!(cfg.window_t1 >= 0.0) || !(cfg.window_t1 < w2) || w2 > cfg.final_time * (1.0 + 1e-12))
    throw config_error("config: experiment window must satisfy 0 <= window_t1 < window_t2 <= final_time");

  cfg.solver.lumped_time = cfg.lumped_time;
  cfg.solver.quadrature_order = cfg.quadrature_order;
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Canonical re-emission: loading the result reproduces the configuration.
inline std::string emit_config_ini(const RunConfig& cfg) {
  std::string out;
  auto num = [](double v) { return detail::format_double(v); };
  auto list = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      s += num(v[i]);
      if (i + 1 < v.size()) s += " ";
    }
    return s;
  };
  out += "[problem]\n";
  out += "p = " + num(cfg.p) + "\n";
  out += "domain_a = " + num(cfg.domain_a) + "\n";
  out += "domain_b = " + num(cfg.domain_b) + "\n";
  out += "final_time = " + num(cfg.final_time) + "\n";
  out += "boundary_family = " + cfg.boundary_family + "\n";
  out += "boundary_params = " + list(cfg.boundary_params) + "\n";
  out += "\n[discretization]\n";
  out += "time_steps = " + std::to_string(cfg.time_steps) + "\n";
  out += "elements = " + std::to_string(cfg.elements) + "\n";
  out += "quadrature_order = " + std::to_string(cfg.quadrature_order) + "\n";
  out += std::string("lumped_time = ") + (cfg.lumped_time ? "true" : "false") + "\n";
  out += "\n[solver]\n";
  out += "gradient_tol = " + num(cfg.solver.gradient_tol) + "\n";
  out += "max_iterations = " + std::to_string(cfg.solver.max_iterations) + "\n";
  out += "eps_reg_scale = " + num(cfg.solver.eps_reg_scale) + "\n";
  out += "eps_reg_floor = " + num(cfg.solver.eps_reg_floor) + "\n";
  out += "backtrack_factor = " + num(cfg.solver.backtrack_factor) + "\n";
  out += "sufficient_decrease = " + num(cfg.solver.sufficient_decrease) + "\n";
  out += "max_backtracks = " + std::to_string(cfg.solver.max_backtracks) + "\n";
  out += "\n[experiment]\n";
  out += "gammas = " + list(cfg.gammas) + "\n";
  out += "ladder_rungs = " + std::to_string(cfg.ladder_rungs) + "\n";
  out += "ladder_time_steps = " + std::to_string(cfg.ladder_time_steps) + "\n";
  out += "ladder_elements = " + std::to_string(cfg.ladder_elements) + "\n";
  if (!cfg.cutoffs.empty()) out += "cutoffs = " + list(cfg.cutoffs) + "\n";
  out += "zeta_family = " + cfg.zeta_family + "\n";
  out += "zeta_params = " + list(cfg.zeta_params) + "\n";
  out += "window_t1 = " + num(cfg.window_t1) + "\n";
  out += "window_t2 = " + num(cfg.window_t2) + "\n";
  out += "ineq_samples = " + std::to_string(cfg.ineq_samples) + "\n";
  if (cfg.seed_set) out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "oracle = " + cfg.oracle + "\n";
  out += "oracle_resolution = " + std::to_string(cfg.oracle_resolution) + "\n";
  if (!cfg.solution_csv.empty()) out += "solution_csv = " + cfg.solution_csv + "\n";
  out += "\n[output]\n";
  out += "directory = " + cfg.out_dir + "\n";
  out += "format = " + cfg.format + "\n";
  return out;
}

}  // namespace dnl
