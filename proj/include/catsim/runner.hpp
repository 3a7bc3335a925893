#pragma once

// Table builders and serialization behind the catsim command-line tool.
// Tables are plain numeric data; metadata travels as '#' comment lines (CSV)
// or a "meta" object (JSON).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "catsim/analytics.hpp"
#include "catsim/protocol.hpp"
#include "catsim/states.hpp"

namespace catsim::runner {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

struct RunConfig {
  int cutoff = kDefaultCutoff;
  double eta = 1.0;
  Format format = Format::csv;
  std::optional<std::string> output_path;

  void validate() const {
    if (cutoff < 8) throw ConfigError("cutoff must be at least 8");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  }
};

/// Everything an `amplify` run needs: global settings plus the schedule and source.
struct AmplifyConfig {
  RunConfig run;
  SourceModel source = SourceModel::squeezed();
  double alpha_target = 2.0;
  int n_iterations = 4;
  int max_rank = 16;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("key '" + key + "': expected a real number, got '" + v + "'");
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

}  // namespace detail

inline Format parse_format(const std::string& v) {
  if (v == "csv") return Format::csv;
  if (v == "json") return Format::json;
  throw ConfigError("format must be 'csv' or 'json', got '" + v + "'");
}

inline SourceKind parse_source(const std::string& v) {
  if (v == "ideal-css") return SourceKind::ideal_css;
  if (v == "squeezed-photon") return SourceKind::squeezed_photon;
  if (v == "mixed-photon") return SourceKind::mixed_photon;
  throw ConfigError("source must be ideal-css, squeezed-photon or mixed-photon, got '" + v + "'");
}

inline std::string source_name(SourceKind k) {
  switch (k) {
    case SourceKind::ideal_css: return "ideal-css";
    case SourceKind::squeezed_photon: return "squeezed-photon";
    case SourceKind::mixed_photon: return "mixed-photon";
  }
  return "unknown";
}

/// Flat `key = value` text; '#' starts a comment. Unknown or repeated keys are errors.
inline AmplifyConfig parse_config(std::istream& in) {
  AmplifyConfig cfg;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    try {
      if (key == "cutoff") cfg.run.cutoff = detail::parse_int(key, val);
      else if (key == "eta") cfg.run.eta = detail::parse_double(key, val);
      else if (key == "format") cfg.run.format = parse_format(val);
      else if (key == "out") cfg.run.output_path = val;
      else if (key == "source") cfg.source.kind = parse_source(val);
      else if (key == "r") cfg.source.r = detail::parse_double(key, val);
      else if (key == "p") cfg.source.p = detail::parse_double(key, val);
      else if (key == "phi") cfg.source.phi = detail::parse_double(key, val);
      else if (key == "alpha_target") cfg.alpha_target = detail::parse_double(key, val);
      else if (key == "n_iterations") cfg.n_iterations = detail::parse_int(key, val);
      else if (key == "max_rank") cfg.max_rank = detail::parse_int(key, val);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline AmplifyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void validate(const AmplifyConfig& cfg) {
  cfg.run.validate();
  if (!(cfg.alpha_target > 0.0)) throw ConfigError("alpha_target must be positive");
  if (cfg.n_iterations < 0) throw ConfigError("n_iterations must be non-negative");
  if (cfg.max_rank < 1) throw ConfigError("max_rank must be positive");
  try {
    cfg.source.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

struct Table {
  std::string title;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// 12 significant digits, '.' decimal separator regardless of locale.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, ptr);
}

inline void write_csv(const Table& t, std::ostream& os) {
  os << "# " << t.title << '\n';
  for (const auto& [k, v] : t.meta) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["title"] = t.title;
  j["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.meta) j["meta"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j;
}

inline void write_table(const Table& t, Format f, std::ostream& os) {
  if (f == Format::csv) write_csv(t, os);
  else os << to_json(t).dump(2) << '\n';
}

/// Evaluates fn(0..n-1) on worker threads; results come back in index order.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::optional<R>> slots(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i] = fn(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < n; i += workers) slots[i] = fn(i);
      }));
    for (auto& j : jobs) j.get();  // rethrows the first worker failure
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// start, start + step, ... up to stop inclusive (within half a step).
inline std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw ConfigError("grid: need step > 0 and stop >= start");
  std::vector<double> g;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 0.5));
  for (long i = 0; i <= count; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

inline std::vector<double> default_fig2_grid() { return make_grid(0.05, 2.5, 0.05); }
inline std::vector<double> default_fig3_grid() { return make_grid(0.05, 2.5, 0.05); }
inline std::vector<double> default_fig4_grid() { return make_grid(0.5, 2.5, 0.1); }
inline constexpr int kDefaultMaxIterations = 6;

inline std::vector<std::pair<std::string, std::string>> base_meta(const RunConfig& cfg) {
  return {{"cutoff", std::to_string(cfg.cutoff)}, {"eta", format_number(cfg.eta)}};
}

/// Cutoff large enough for every mode of one iteration: passive optics never
/// move more than the total mean photon number alpha^2 + beta^2 + gamma^2 into one mode.
inline int working_cutoff(double alpha, double beta, int floor_cutoff) {
  const double gamma = 2.0 * alpha * beta / std::hypot(alpha, beta);
  const double total = alpha * alpha + beta * beta + gamma * gamma;
  return std::max(floor_cutoff, static_cast<int>(std::ceil(total + 6.0 * std::sqrt(total) + 8.0)));
}

/// Simulated click-click probability for ideal cat inputs.
inline double simulated_probability(double alpha, double beta, double phi_a, double phi_b, const RunConfig& cfg) {
  const int d = working_cutoff(alpha, beta, cfg.cutoff);
  const auto a = css_state(CssSpec(alpha, phi_a), d);
  const auto b = css_state(CssSpec(beta, phi_b), d);
  return amplify_once(a, b, StageParams::plan(alpha, beta, phi_a, phi_b, cfg.eta)).probability;
}

inline Table fig2_table(const std::vector<double>& grid, const RunConfig& cfg) {
  cfg.validate();
  for (double a : grid)
    if (!(a > 0.0 && a <= kMaxValidatedAlpha + 1e-12)) throw ConfigError("fig2: grid must lie within (0, 2.5]");
  constexpr double pi = std::numbers::pi;
  Table t{"success probability of one amplification step, alpha = beta",
          base_meta(cfg),
          {"alpha", "sim_cutoff", "P_odd_odd", "P_even_even", "P_even_odd", "sim_odd_odd", "sim_even_even", "sim_even_odd"},
          {}};
  t.meta.emplace_back("sim_cutoff", "max(cutoff, M + 6 sqrt(M) + 8), M = 4 alpha^2");
  t.rows = parallel_map(grid.size(), [&](std::size_t i) {
    const double a = grid[i];
    return std::vector<double>{a,
                               static_cast<double>(working_cutoff(a, a, cfg.cutoff)),
                               success_probability_formula(a, a, pi, pi),
                               success_probability_formula(a, a, 0.0, 0.0),
                               success_probability_formula(a, a, 0.0, pi),
                               simulated_probability(a, a, pi, pi, cfg),
                               simulated_probability(a, a, 0.0, 0.0, cfg),
                               simulated_probability(a, a, 0.0, pi, cfg)};
  });
  return t;
}

inline Table fig3_table(const std::vector<double>& grid, const RunConfig& cfg) {
  cfg.validate();
  Table t{"squeezed single photon vs odd cat, fidelity maximized over r", base_meta(cfg),
          {"alpha", "r_star", "F_max", "F_sim"}, {}};
  t.rows = parallel_map(grid.size(), [&](std::size_t i) {
    const double a = grid[i];
    const ScalarMaximum best = optimize_squeezing(a);
    const double sim = fidelity_pure(squeezed_photon(SqueezeSpec(best.x), cfg.cutoff), css_state(CssSpec::odd(a), cfg.cutoff));
    return std::vector<double>{a, best.x, best.value, sim};
  });
  return t;
}

inline Table fig4_table(const std::vector<double>& grid, int max_n, const RunConfig& cfg) {
  cfg.validate();
  if (max_n < 0) throw ConfigError("fig4: max_n must be non-negative");
  Table t{"best achievable fidelity from squeezed photons vs target amplitude", base_meta(cfg),
          {"alpha_target", "n_star", "F_star"}, {}};
  t.meta.emplace_back("max_n", std::to_string(max_n));
  for (int n = 0; n <= max_n; ++n) t.columns.push_back("F_n" + std::to_string(n));
  t.rows = parallel_map(grid.size(), [&](std::size_t i) {
    const BestSchedule best = best_schedule(grid[i], max_n, SourceModel::squeezed(), cfg.cutoff, cfg.eta);
    std::vector<double> row{grid[i], static_cast<double>(best.n_star), best.f_star};
    row.insert(row.end(), best.fidelity_by_n.begin(), best.fidelity_by_n.end());
    return row;
  });
  return t;
}

struct PurifyRow {
  double p;
  double f_initial;
  double f_after;
  double probability;
};

inline PurifyRow purify_point(double p, double alpha_i, const RunConfig& cfg) {
  const SourceModel src = SourceModel::mixed(p);
  const Schedule sched = Schedule::make(alpha_i * std::sqrt(2.0), 1, std::numbers::pi, cfg.eta);
  const auto res = run_schedule(sched, src, cfg.cutoff);
  return {p, res[0].fidelity, res[1].fidelity, res[1].probability};
}

inline Table purify_table(const std::vector<double>& p_list, double alpha_i, const RunConfig& cfg) {
  cfg.validate();
  if (!(alpha_i > 0.0)) throw ConfigError("purify: alpha_i must be positive");
  Table t{"one amplification step on mixed squeezed-photon inputs", base_meta(cfg),
          {"p", "F_initial", "F_after_one_iteration", "probability"}, {}};
  t.meta.emplace_back("alpha_i", format_number(alpha_i));
  t.rows = parallel_map(p_list.size(), [&](std::size_t i) {
    if (!(p_list[i] >= 0.0 && p_list[i] < 1.0)) throw ConfigError("purify: p must lie in [0, 1)");
    const PurifyRow r = purify_point(p_list[i], alpha_i, cfg);
    return std::vector<double>{r.p, r.f_initial, r.f_after, r.probability};
  });
  return t;
}

/// Per-stage report of run_schedule. Stage 0 is the source state.
inline Table amplify_table(const AmplifyConfig& cfg) {
  validate(cfg);
  const Schedule sched = Schedule::make(cfg.alpha_target, cfg.n_iterations, cfg.source.nominal_phi(), cfg.run.eta);
  AmplifyOptions opts;
  opts.max_rank = cfg.max_rank;
  const auto results = run_schedule(sched, cfg.source, cfg.run.cutoff, opts);
  Table t{"amplification schedule", base_meta(cfg.run),
          {"stage", "alpha_nominal", "phi_nominal", "fidelity", "probability", "purity", "leakage", "discarded_weight"},
          {}};
  t.meta.emplace_back("source", source_name(cfg.source.kind));
  t.meta.emplace_back("alpha_target", format_number(cfg.alpha_target));
  t.meta.emplace_back("n_iterations", std::to_string(cfg.n_iterations));
  t.meta.emplace_back("alpha_i", format_number(sched.alpha_i));
  if (cfg.source.kind != SourceKind::ideal_css)
    t.meta.emplace_back("r", format_number(cfg.source.squeezing_for(sched.alpha_i)));
  if (cfg.source.kind == SourceKind::mixed_photon) t.meta.emplace_back("p", format_number(cfg.source.p));
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    t.rows.push_back({static_cast<double>(k), r.nominal_target.alpha, r.nominal_target.reduced_phi(), r.fidelity,
                      r.probability, r.purity, r.leakage_warning.value_or(0.0), r.discarded_weight});
  }
  const bool leaky = std::any_of(results.begin(), results.end(), [](const auto& r) { return r.leakage_warning.has_value(); });
  t.meta.emplace_back("leakage_warning", leaky ? "yes" : "no");
  return t;
}

}  // namespace catsim::runner
