#include "qmux/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qmux/multiserver.hpp"
#include "qmux/qmux_eg.hpp"
#include "qmux/qmux_rsp.hpp"
#include "qmux/rng.hpp"
#include "qmux/scanstats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmux::cli {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct TableData {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::vector<double> make_grid(double lo, double hi, int points, bool log_spacing) {
  if (points < 1) throw ConfigError("grid needs at least one point");
  if (!(lo > 0.0) && log_spacing) throw ConfigError("log grid needs positive bounds");
  if (hi < lo) throw ConfigError("grid upper bound below lower bound");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    out[static_cast<std::size_t>(i)] =
        log_spacing ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  return out;
}

std::vector<double> resolve_grid(kv::Binder& b, const std::string& list_key,
                                 const std::string& prefix, double def_lo, double def_hi,
                                 int def_points, bool def_log) {
  if (b.has(list_key)) {
    std::vector<double> grid = b.list(list_key);
    if (grid.empty()) throw ConfigError("field '" + list_key + "': grid must be non-empty");
    return grid;
  }
  const double lo = b.number(prefix + "_min", def_lo);
  const double hi = b.number(prefix + "_max", def_hi);
  const int points = static_cast<int>(b.integer(prefix + "_points", def_points));
  const bool log_spacing = b.boolean(prefix + "_log", def_log);
  return make_grid(lo, hi, points, log_spacing);
}

std::vector<int> resolve_m_list(kv::Binder& b, int def_max) {
  std::vector<int> ms;
  if (b.has("m_list")) {
    for (double v : b.list("m_list")) {
      if (v < 1 || v != std::floor(v)) throw ConfigError("field 'm_list': entries must be positive integers");
      ms.push_back(static_cast<int>(v));
    }
  } else {
    const int m_max = static_cast<int>(b.integer("m_max", def_max));
    if (m_max < 1) throw ConfigError("field 'm_max': must be >= 1");
    for (int m = 1; m <= m_max; ++m) ms.push_back(m);
  }
  if (ms.empty()) throw ConfigError("field 'm_list': must be non-empty");
  return ms;
}

// ---- window -------------------------------------------------------------

TableData run_window(kv::Binder& b, kv::Node& canon) {
  const bool infinite = b.boolean("infinite", false);
  const long w = infinite ? 0 : b.integer("w");
  const int s = static_cast<int>(b.integer("s"));
  const double p = b.number("p");
  const long max_states = b.integer("max_states", static_cast<long>(scan::kDefaultMaxStates));
  canon.set_boolean("infinite", infinite);
  if (!infinite) canon.set_integer("w", static_cast<std::uint64_t>(w));
  canon.set_integer("s", static_cast<std::uint64_t>(s));
  canon.set_number("p", p);
  canon.set_integer("max_states", static_cast<std::uint64_t>(max_states));

  const scan::WindowSpec spec =
      infinite ? scan::WindowSpec::infinite(s, p) : scan::WindowSpec::finite(w, s, p);
  const double exact =
      scan::expected_attempts_exact(spec, static_cast<std::size_t>(max_states)).expected_attempts;
  const double low_p =
      infinite ? kNan : scan::expected_attempts_low_p(spec).expected_attempts;
  TableData t;
  t.columns = {"w", "s", "p", "expected_exact", "expected_low_p"};
  t.rows.push_back({static_cast<double>(w), static_cast<double>(s), p, exact, low_p});
  return t;
}

// ---- limits -------------------------------------------------------------

TableData run_limits(kv::Binder& b, kv::Node& canon) {
  const int m = static_cast<int>(b.integer("m"));
  const int s = static_cast<int>(b.integer("s", 1));
  const int m_c = static_cast<int>(b.integer("m_c", m));
  canon.set_integer("m", static_cast<std::uint64_t>(m));
  canon.set_integer("s", static_cast<std::uint64_t>(s));
  canon.set_integer("m_c", static_cast<std::uint64_t>(m_c));

  TableData t;
  t.columns = {"m", "s", "m_c", "limit_single", "limit_s", "limit_s_wide_window"};
  t.rows.push_back({static_cast<double>(m), static_cast<double>(s), static_cast<double>(m_c),
                    scan::classical_bound_single(m, m_c), scan::classical_bound_s(m, s),
                    scan::classical_bound_s_wide_window(m, s)});
  return t;
}

// ---- eg-curve -----------------------------------------------------------

TableData run_eg_curve(kv::Binder& b, kv::Node& canon) {
  const int m = static_cast<int>(b.integer("m"));
  const double eta = b.number("eta", kNan);
  const double eta_a = b.number("eta_a", eta);
  const double eta_b = b.number("eta_b", eta);
  if (!std::isfinite(eta_a) || !std::isfinite(eta_b)) {
    throw ConfigError("eg_curve needs 'eta' or both 'eta_a' and 'eta_b'");
  }
  const std::vector<double> grid = resolve_grid(b, "xi_grid", "xi", 1e-4, 0.5, 60, true);
  canon.set_integer("m", static_cast<std::uint64_t>(m));
  canon.set_number("eta_a", eta_a);
  canon.set_number("eta_b", eta_b);
  canon.set_list("xi_grid", grid);

  TableData t;
  t.columns = {"xi_a2", "xi_b2", "fidelity", "rate", "bright_saturation"};
  t.rows.assign(grid.size(), {});
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const RatePoint pt =
        eg::rate_point(eg::EgConfig::make(m, eta_a, eta_b, grid[static_cast<std::size_t>(i)]));
    t.rows[static_cast<std::size_t>(i)] = {pt.params.at("xi_a2"), pt.params.at("xi_b2"),
                                           pt.fidelity, pt.rate,
                                           pt.params.at("bright_saturation")};
  }
  return t;
}

// ---- eg-gain ------------------------------------------------------------

TableData run_eg_gain(kv::Binder& b, kv::Node& canon) {
  const int m_max = static_cast<int>(b.integer("m_max"));
  if (m_max < 1) throw ConfigError("field 'm_max': must be >= 1");
  const double eta = b.number("eta", kNan);
  const double eta_a = b.number("eta_a", eta);
  const double eta_b = b.number("eta_b", eta);
  if (!std::isfinite(eta_a) || !std::isfinite(eta_b)) {
    throw ConfigError("eg_gain needs 'eta' or both 'eta_a' and 'eta_b'");
  }
  const double f_min = b.number("f_min");
  canon.set_integer("m_max", static_cast<std::uint64_t>(m_max));
  canon.set_number("eta_a", eta_a);
  canon.set_number("eta_b", eta_b);
  canon.set_number("f_min", f_min);

  const double baseline = eg::rate_at_fidelity(1, eta_a, eta_b, f_min).rate;
  TableData t;
  t.columns = {"M", "gain", "bound"};
  t.rows.assign(static_cast<std::size_t>(m_max), {});
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int m = 1; m <= m_max; ++m) {
    const double rate = eg::rate_at_fidelity(m, eta_a, eta_b, f_min).rate;
    t.rows[static_cast<std::size_t>(m - 1)] = {static_cast<double>(m), rate / baseline, 1.0};
  }
  return t;
}

// ---- rsp-curve ----------------------------------------------------------

TableData run_rsp_curve(kv::Binder& b, kv::Node& canon) {
  const int m = static_cast<int>(b.integer("m"));
  const double eta_c = b.number("eta_c");
  const double eta_s = b.number("eta_s");
  const rsp::Demand demand = rsp::demand_from_string(b.text("demand", "single_user"));
  const double cap = b.number("alpha2_cap", rsp::kAlpha2Cap);
  const std::vector<double> grid =
      resolve_grid(b, "gamma_grid", "gamma", eta_c * cap * 1e-5, eta_c * cap, 60, true);
  canon.set_integer("m", static_cast<std::uint64_t>(m));
  canon.set_number("eta_c", eta_c);
  canon.set_number("eta_s", eta_s);
  canon.set_text("demand", rsp::to_string(demand));
  canon.set_number("alpha2_cap", cap);
  canon.set_list("gamma_grid", grid);

  const std::vector<RatePoint> points =
      rsp::rate_fidelity_sweep(m, eta_c, eta_s, grid, demand, cap);
  TableData t;
  t.columns = {"gamma", "alpha2", "xi2", "fidelity", "rate", "large_drop"};
  for (const RatePoint& pt : points) {
    const auto drop = pt.params.find("large_drop");
    t.rows.push_back({pt.params.at("gamma"), pt.params.at("alpha2"), pt.params.at("xi2"),
                      pt.fidelity, pt.rate,
                      drop == pt.params.end() ? 0.0 : drop->second});
  }
  return t;
}

// ---- rsp-gain -----------------------------------------------------------

TableData run_rsp_gain(kv::Binder& b, kv::Node& canon) {
  const std::vector<int> ms = resolve_m_list(b, 30);
  const double eta_c = b.number("eta_c");
  const double eta_s = b.number("eta_s");
  const double f_min = b.number("f_min");
  const rsp::Demand demand = rsp::demand_from_string(b.text("demand", "single_user"));
  const double cap = b.number("alpha2_cap", rsp::kAlpha2Cap);
  canon.set_list("m_list", std::vector<double>(ms.begin(), ms.end()));
  canon.set_number("eta_c", eta_c);
  canon.set_number("eta_s", eta_s);
  canon.set_number("f_min", f_min);
  canon.set_text("demand", rsp::to_string(demand));
  canon.set_number("alpha2_cap", cap);

  TableData t;
  t.columns = {"M", "gain", "bound"};
  t.rows.assign(ms.size(), {});
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ms.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const GainReport rep =
        rsp::gain(ms[static_cast<std::size_t>(i)], eta_c, eta_s, f_min, demand, cap);
    t.rows[static_cast<std::size_t>(i)] = {static_cast<double>(ms[static_cast<std::size_t>(i)]),
                                           rep.gain, rep.classical_bound};
  }
  return t;
}

// ---- ms common ----------------------------------------------------------

hub::HubTemplate bind_template(kv::Binder& b, kv::Node& canon) {
  hub::HubTemplate tmpl;
  tmpl.eta_c = b.number("eta_c", 1e-3);
  tmpl.eta_s = b.number("eta_s", 1e-1);
  tmpl.tau_e = b.number("tau_e", 300e-9);
  tmpl.tau_ce = b.number("tau_ce", 20e-3);
  tmpl.tau_co = b.number("tau_co", 2.8);
  tmpl.cutoff_active = b.integer("n_e", 1000);
  canon.set_number("eta_c", tmpl.eta_c);
  canon.set_number("eta_s", tmpl.eta_s);
  canon.set_number("tau_e", tmpl.tau_e);
  canon.set_number("tau_ce", tmpl.tau_ce);
  canon.set_number("tau_co", tmpl.tau_co);
  canon.set_integer("n_e", static_cast<std::uint64_t>(tmpl.cutoff_active));
  return tmpl;
}

hub::HubGrids bind_grids(kv::Binder& b, kv::Node& canon) {
  hub::HubGrids grids;
  grids.alpha2_cap = b.number("alpha2_cap", 0.5);
  grids.alpha2 = b.list("alpha2_grid",
                        {0.00625, 0.0125, 0.025, 0.05, 0.1, 0.2, 0.35, 0.5});
  grids.cutoff_idle =
      b.list("n_o_grid", {30, 100, 300, 1000, 3000, 10000, 100000, 300000});
  const std::string link = b.text("link", "preset");
  if (link == "preset") {
    grids.link.kind = hub::ServerLinkModel::Kind::fixed;
    grids.link.p_fixed = b.number("p_ss", 0.44);
    grids.link.f0_fixed = b.number("f0_ss", 1.0 - 1e-3);
    canon.set_number("p_ss", grids.link.p_fixed);
    canon.set_number("f0_ss", grids.link.f0_fixed);
  } else if (link == "single_click_eg") {
    grids.link.kind = hub::ServerLinkModel::Kind::single_click_eg;
    grids.link.xi2_grid = b.list("xi2_grid", {0.01, 0.02, 0.05, 0.1, 0.2});
    canon.set_list("xi2_grid", grids.link.xi2_grid);
  } else {
    throw ConfigError("field 'link': expected 'preset' or 'single_click_eg'");
  }
  canon.set_text("link", link);
  canon.set_number("alpha2_cap", grids.alpha2_cap);
  canon.set_list("alpha2_grid", grids.alpha2);
  canon.set_list("n_o_grid", grids.cutoff_idle);
  return grids;
}

// ---- ms-sample ----------------------------------------------------------

TableData run_ms_sample(kv::Binder& b, kv::Node& canon, std::uint64_t seed) {
  hub::SamplerConfig cfg;
  cfg.hub.servers = static_cast<int>(b.integer("m"));
  cfg.hub.qubits = static_cast<int>(b.integer("s"));
  cfg.hub.p_server_client = b.number("p_sc");
  cfg.hub.p_server_server = b.number("p_ss", 1.0);
  cfg.hub.cutoff_active = b.integer("n_e", 1000);
  cfg.hub.cutoff_idle = b.integer("n_o", 100);
  cfg.hub.tau_e = b.number("tau_e", 300e-9);
  cfg.hub.tau_ce = b.number("tau_ce", 20e-3);
  cfg.hub.tau_co = b.number("tau_co", 2.8);
  cfg.hub.f0_rsp = b.number("f0_sc", 1.0);
  cfg.hub.f0_eg = b.number("f0_ss_intrinsic", 1.0);
  cfg.rounds = b.integer("n", 100000);
  cfg.f_min = b.number("f_min", 0.0);
  cfg.seed = seed;
  const std::string strategy_name = b.text("strategy", "multiplex");

  canon.set_integer("m", static_cast<std::uint64_t>(cfg.hub.servers));
  canon.set_integer("s", static_cast<std::uint64_t>(cfg.hub.qubits));
  canon.set_number("p_sc", cfg.hub.p_server_client);
  canon.set_number("p_ss", cfg.hub.p_server_server);
  canon.set_integer("n_e", static_cast<std::uint64_t>(cfg.hub.cutoff_active));
  canon.set_integer("n_o", static_cast<std::uint64_t>(cfg.hub.cutoff_idle));
  canon.set_number("tau_e", cfg.hub.tau_e);
  canon.set_number("tau_ce", cfg.hub.tau_ce);
  canon.set_number("tau_co", cfg.hub.tau_co);
  canon.set_number("f0_sc", cfg.hub.f0_rsp);
  canon.set_number("f0_ss_intrinsic", cfg.hub.f0_eg);
  canon.set_integer("n", static_cast<std::uint64_t>(cfg.rounds));
  canon.set_number("f_min", cfg.f_min);
  canon.set_text("strategy", strategy_name);

  hub::SamplerResult res;
  double analytic = kNan;
  if (strategy_name == "baseline") {
    res = hub::run_baseline_sampler(cfg);
  } else if (strategy_name == "multiplex" || strategy_name == "try_and_commit") {
    const hub::Strategy strategy = strategy_name == "multiplex"
                                       ? hub::Strategy::multiplex
                                       : hub::Strategy::try_and_commit;
    res = hub::run_sampler(cfg, strategy);
    if (cfg.hub.qubits == 2) {
      analytic = hub::analytic_rate_s2(cfg.hub, strategy).rate;
    }
  } else {
    throw ConfigError("field 'strategy': expected multiplex, try_and_commit, or baseline");
  }

  TableData t;
  t.columns = {"p_succ", "mean_attempts", "rate", "stderr_rate", "worst_case_fidelity",
               "n_success", "n_rounds", "gated", "analytic_rate_s2"};
  t.rows.push_back({res.p_succ, res.mean_attempts, res.rate, res.stderr_rate,
                    res.worst_case_fidelity, static_cast<double>(res.n_success),
                    static_cast<double>(res.n_rounds), res.gated ? 1.0 : 0.0, analytic});
  return t;
}

// ---- ms-curve -----------------------------------------------------------

TableData run_ms_curve(kv::Binder& b, kv::Node& canon, std::uint64_t seed) {
  const int m = static_cast<int>(b.integer("m"));
  const int s = static_cast<int>(b.integer("s"));
  const std::vector<double> fmins = b.list("f_min_list");
  const std::int64_t rounds = b.integer("n", 100000);
  canon.set_integer("m", static_cast<std::uint64_t>(m));
  canon.set_integer("s", static_cast<std::uint64_t>(s));
  canon.set_list("f_min_list", fmins);
  canon.set_integer("n", static_cast<std::uint64_t>(rounds));
  const hub::HubTemplate tmpl = bind_template(b, canon);
  const hub::HubGrids grids = bind_grids(b, canon);
  if (fmins.empty()) throw ConfigError("field 'f_min_list': must be non-empty");

  struct Row {
    double f_min, rate, se, p_succ, mean, alpha2, xi2, p_ss, n_o, fstar, feasible;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < fmins.size(); ++i) {
    const std::uint64_t row_seed = rng::splitmix64(seed ^ rng::splitmix64(i + 101));
    Row r{fmins[i], 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    try {
      const hub::OptimizeResult best =
          hub::optimize_hub(m, s, tmpl, fmins[i], grids, rounds, row_seed);
      r.rate = best.best.rate;
      r.se = best.best.stderr_rate;
      r.p_succ = best.best.p_succ;
      r.mean = best.best.mean_attempts;
      r.alpha2 = best.alpha2;
      r.xi2 = best.xi2;
      r.p_ss = best.config.p_server_server;
      r.n_o = static_cast<double>(best.config.cutoff_idle);
      r.fstar = best.best.worst_case_fidelity;
      r.feasible = 1.0;
    } catch (const InfeasibleError&) {
      r.feasible = 0.0;
    }
    rows.push_back(r);
  }

  TableData t;
  t.columns = {"f_min", "rate",   "stderr_rate", "p_succ", "mean_attempts", "alpha2",
               "xi2",   "p_ss",   "n_o",         "fstar",  "feasible",      "saturated"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Saturation: the rate is statistically flat against the adjacent
    // lower-f_min row (or the next row for the lowest point).
    double saturated = 0.0;
    const std::size_t j = (i == 0) ? 1 : i - 1;
    if (rows.size() > 1 && j < rows.size() && rows[i].feasible > 0 && rows[j].feasible > 0) {
      const double sigma =
          3.0 * std::sqrt(rows[i].se * rows[i].se + rows[j].se * rows[j].se);
      if (std::abs(rows[i].rate - rows[j].rate) <= sigma) saturated = 1.0;
    }
    t.rows.push_back({rows[i].f_min, rows[i].rate, rows[i].se, rows[i].p_succ, rows[i].mean,
                      rows[i].alpha2, rows[i].xi2, rows[i].p_ss, rows[i].n_o, rows[i].fstar,
                      rows[i].feasible, saturated});
  }
  return t;
}

// ---- ms-gain ------------------------------------------------------------

TableData run_ms_gain(kv::Binder& b, kv::Node& canon, std::uint64_t seed) {
  const int s = static_cast<int>(b.integer("s"));
  const std::vector<int> ms = resolve_m_list(b, 4);
  const double f_min = b.number("f_min", 0.9);
  const std::int64_t rounds = b.integer("n", 100000);
  canon.set_integer("s", static_cast<std::uint64_t>(s));
  canon.set_list("m_list", std::vector<double>(ms.begin(), ms.end()));
  canon.set_number("f_min", f_min);
  canon.set_integer("n", static_cast<std::uint64_t>(rounds));
  const hub::HubTemplate tmpl = bind_template(b, canon);
  const hub::HubGrids grids = bind_grids(b, canon);

  const std::uint64_t base_seed = rng::splitmix64(seed ^ 0x626173656c696eull);
  const hub::OptimizeResult base = hub::baseline_rate(s, tmpl, f_min, grids, rounds, base_seed);

  TableData t;
  t.columns = {"M",    "rate", "stderr_rate", "baseline_rate", "baseline_stderr",
               "gain", "bound"};
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const int m = ms[i];
    const double bound = std::pow(static_cast<double>(m), static_cast<double>(s));
    if (m == 1) {
      // The M = 1 reference point: the gain is 1 by definition.
      t.rows.push_back({1.0, base.best.rate, base.best.stderr_rate, base.best.rate,
                        base.best.stderr_rate, 1.0, 1.0});
      continue;
    }
    const std::uint64_t row_seed = rng::splitmix64(seed ^ rng::splitmix64(i + 1));
    const hub::OptimizeResult best = hub::optimize_hub(m, s, tmpl, f_min, grids, rounds, row_seed);
    t.rows.push_back({static_cast<double>(m), best.best.rate, best.best.stderr_rate,
                      base.best.rate, base.best.stderr_rate,
                      best.best.rate / base.best.rate, bound});
  }
  return t;
}

// ---- output -------------------------------------------------------------

void write_csv(const std::string& path, const SweepSpec& spec, const std::string& hash,
               const TableData& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  out << "# qmux " << to_string(spec.target) << " v" << kVersion << "\n";
  out << "# config-hash: " << hash << "\n";
  out << "# seed: " << spec.seed << "\n";
  out << "# columns: ";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ",";
    out << table.columns[i];
  }
  out << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ",";
    out << table.columns[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << kv::format_double(row[i]);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing output file '" + path + "'");
}

void write_sidecar(const std::string& path, const SweepSpec& spec, const std::string& hash,
                   const std::string& config_text, std::size_t rows, double wall_s) {
  nlohmann::json meta;
  meta["tool"] = "qmux";
  meta["version"] = kVersion;
  meta["target"] = to_string(spec.target);
  meta["seed"] = spec.seed;
  meta["threads_requested"] = spec.threads;
  meta["config_hash"] = hash;
  meta["config"] = config_text;
  meta["output"] = spec.output_path;
  meta["rows"] = rows;
  meta["wall_time_s"] = wall_s;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open sidecar file '" + path + "'");
  out << meta.dump(2) << "\n";
  if (!out) throw IoError("failed writing sidecar file '" + path + "'");
}

}  // namespace

Target target_from_string(const std::string& name) {
  std::string n = name;
  for (char& c : n) {
    if (c == '-') c = '_';
  }
  if (n == "window") return Target::window;
  if (n == "limits") return Target::limits;
  if (n == "eg_curve") return Target::eg_curve;
  if (n == "eg_gain") return Target::eg_gain;
  if (n == "rsp_curve") return Target::rsp_curve;
  if (n == "rsp_gain") return Target::rsp_gain;
  if (n == "ms_curve") return Target::ms_curve;
  if (n == "ms_gain") return Target::ms_gain;
  if (n == "ms_sample") return Target::ms_sample;
  throw ConfigError("unknown sweep target '" + name + "'");
}

std::string to_string(Target target) {
  switch (target) {
    case Target::window: return "window";
    case Target::limits: return "limits";
    case Target::eg_curve: return "eg_curve";
    case Target::eg_gain: return "eg_gain";
    case Target::rsp_curve: return "rsp_curve";
    case Target::rsp_gain: return "rsp_gain";
    case Target::ms_curve: return "ms_curve";
    case Target::ms_gain: return "ms_gain";
    case Target::ms_sample: return "ms_sample";
  }
  return "unknown";
}

SweepSpec parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  std::string text = os.str();

  std::string sidecar_output;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json meta = nlohmann::json::parse(text, nullptr, true, true);
    if (!meta.contains("config")) {
      throw ConfigError("sidecar file '" + path + "' has no embedded config");
    }
    sidecar_output = meta.value("output", "");
    text = meta.at("config").get<std::string>();
  }

  const kv::Node root = kv::parse(text);
  kv::Binder b(root, "");
  SweepSpec spec;
  spec.target = target_from_string(b.text("target"));
  spec.seed = b.uinteger("seed", 0);
  spec.output_path = b.text("out", sidecar_output);
  spec.threads = static_cast<int>(b.integer("threads", 0));
  const std::string section = to_string(spec.target);
  if (b.has_section(section)) {
    kv::Binder params = b.section(section);
    spec.params = root.sections.at(section);
    // The section is re-validated during run_sweep binding.
    (void)params;
  }
  b.finish();
  return spec;
}

SweepOutcome run_sweep(const SweepSpec& spec) {
  if (spec.output_path.empty()) {
    throw ConfigError("missing output path (set 'out' or pass --out)");
  }
#ifdef _OPENMP
  if (spec.threads > 0) omp_set_num_threads(spec.threads);
#endif
  const auto t0 = std::chrono::steady_clock::now();
  kv::Binder b(spec.params, to_string(spec.target));
  kv::Node section;
  TableData table;
  switch (spec.target) {
    case Target::window: table = run_window(b, section); break;
    case Target::limits: table = run_limits(b, section); break;
    case Target::eg_curve: table = run_eg_curve(b, section); break;
    case Target::eg_gain: table = run_eg_gain(b, section); break;
    case Target::rsp_curve: table = run_rsp_curve(b, section); break;
    case Target::rsp_gain: table = run_rsp_gain(b, section); break;
    case Target::ms_curve: table = run_ms_curve(b, section, spec.seed); break;
    case Target::ms_gain: table = run_ms_gain(b, section, spec.seed); break;
    case Target::ms_sample: table = run_ms_sample(b, section, spec.seed); break;
  }
  b.finish();

  kv::Node canon;
  canon.set_text("target", to_string(spec.target));
  canon.set_integer("seed", spec.seed);
  canon.sections[to_string(spec.target)] = section;
  const std::string config_text = kv::write(canon);
  const std::string hash = kv::fnv1a_hex(config_text);

  write_csv(spec.output_path, spec, hash, table);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string sidecar = spec.output_path + ".meta.json";
  write_sidecar(sidecar, spec, hash, config_text, table.rows.size(), wall_s);

  SweepOutcome outcome;
  outcome.csv_path = spec.output_path;
  outcome.sidecar_path = sidecar;
  outcome.rows = table.rows.size();
  outcome.config_hash = hash;
  return outcome;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const InfeasibleError*>(&error)) return 3;
  if (dynamic_cast<const IoError*>(&error)) return 4;
  if (dynamic_cast<const ConfigError*>(&error)) return 2;
  if (dynamic_cast<const nlohmann::json::exception*>(&error)) return 2;
  return 1;
}

}  // namespace qmux::cli
