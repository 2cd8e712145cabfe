#pragma once

// Command line front end.  Every subcommand reads flags plus an optional JSON
// config file (flags win), echoes the fully resolved config to the output
// directory, and writes CSV/JSON outputs whose bytes depend only on the
// config.  Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 acceptance failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kslab/acceptance.hpp"
#include "kslab/bounds.hpp"
#include "kslab/evolve.hpp"
#include "kslab/lane_emden.hpp"
#include "kslab/radial.hpp"
#include "kslab/util.hpp"

namespace kslab::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

namespace detail {

inline void assign(const nlohmann::json& v, int& out, const std::string& key) {
  if (!v.is_number_integer())
    throw invalid_input(fmt("config: key '%s' must be an integer", key.c_str()));
  out = v.get<int>();
}

inline void assign(const nlohmann::json& v, double& out, const std::string& key) {
  if (!v.is_number()) throw invalid_input(fmt("config: key '%s' must be a number", key.c_str()));
  out = v.get<double>();
}

inline void assign(const nlohmann::json& v, std::string& out, const std::string& key) {
  if (!v.is_string()) throw invalid_input(fmt("config: key '%s' must be a string", key.c_str()));
  out = v.get<std::string>();
}

inline void assign(const nlohmann::json& v, bool& out, const std::string& key) {
  if (!v.is_boolean()) throw invalid_input(fmt("config: key '%s' must be a boolean", key.c_str()));
  out = v.get<bool>();
}

inline void assign(const nlohmann::json& v, std::vector<double>& out, const std::string& key) {
  if (!v.is_array())
    throw invalid_input(fmt("config: key '%s' must be an array of numbers", key.c_str()));
  std::vector<double> parsed;
  for (const auto& item : v) {
    if (!item.is_number())
      throw invalid_input(fmt("config: key '%s' must be an array of numbers", key.c_str()));
    parsed.push_back(item.get<double>());
  }
  out = std::move(parsed);
}

struct ParamBinding {
  std::string key;
  CLI::Option* opt = nullptr;
  std::function<void(const nlohmann::json&)> apply;
  std::function<nlohmann::json()> echo;
};

// Config-file keys mirror the long flag names one-to-one (without the dashes).
class BindingSet {
 public:
  template <class T>
  void add(CLI::Option* opt, const std::string& key, T& target) {
    ParamBinding b;
    b.key = key;
    b.opt = opt;
    b.apply = [&target, key](const nlohmann::json& v) { assign(v, target, key); };
    b.echo = [&target]() { return nlohmann::json(target); };
    items_.push_back(std::move(b));
  }

  void apply_file(const std::string& path, const std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw invalid_input(fmt("config: cannot open '%s'", path.c_str()));
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
      throw invalid_input(fmt("config: %s", err.what()));
    }
    if (!doc.is_object()) throw invalid_input("config: top level must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "subcommand") {
        if (!value.is_string() || value.get<std::string>() != subcommand)
          throw invalid_input(
              fmt("config: file is for subcommand '%s', not '%s'",
                  value.is_string() ? value.get<std::string>().c_str() : "?",
                  subcommand.c_str()));
        continue;
      }
      ParamBinding* found = nullptr;
      for (auto& item : items_)
        if (item.key == key) found = &item;
      if (!found) throw invalid_input(fmt("config: unknown key '%s'", key.c_str()));
      if (found->opt && found->opt->count() > 0) continue;
      found->apply(value);
    }
  }

  nlohmann::json resolved(const std::string& subcommand) const {
    nlohmann::json obj;
    obj["subcommand"] = subcommand;
    for (const auto& item : items_) obj[item.key] = item.echo();
    return obj;
  }

 private:
  std::vector<ParamBinding> items_;
};

// Applies the config file (if any), resolves the output directory (flag, then
// KSLAB_OUTPUT_DIR, then cwd), and echoes the resolved config for replay.
inline std::filesystem::path prepare_outputs(std::string& out_flag, const std::string& config_path,
                                             const std::string& subcommand, BindingSet& bindings) {
  if (!config_path.empty()) bindings.apply_file(config_path, subcommand);
  if (out_flag.empty()) {
    const char* env = std::getenv("KSLAB_OUTPUT_DIR");
    out_flag = env != nullptr ? env : ".";
  }
  const std::filesystem::path dir(out_flag);
  std::filesystem::create_directories(dir);
  std::ofstream echo(dir / "config.json");
  echo << bindings.resolved(subcommand).dump(2) << '\n';
  return dir;
}

inline nlohmann::json to_json(const InequalityReport& rep) {
  nlohmann::json obj;
  obj["inequality"] = rep.inequality;
  obj["lhs"] = rep.lhs;
  obj["rhs"] = rep.rhs;
  obj["margin"] = rep.margin;
  obj["pass"] = rep.pass;
  return obj;
}

}  // namespace detail

inline int cli_main(int argc, char** argv) {
  CLI::App app{
      "kslab: radial laboratory for the critical aggregation-diffusion equation.\n"
      "Stationary profiles and critical masses by shooting, explicit small-mass\n"
      "constants, and a mass-conserving finite-volume evolver with pointwise\n"
      "inequality diagnostics.\n"
      "Exit codes: 0 success, 2 config error, 3 numerical failure, 4 acceptance\n"
      "failure.  Every subcommand accepts --config FILE (JSON, keys mirror the\n"
      "long flags; flags win) and --out DIR (default: $KSLAB_OUTPUT_DIR, else\n"
      "cwd); the resolved config is echoed to DIR/config.json."};
  app.require_subcommand(1);

  // mass-curve
  struct {
    int d = 4;
    double gamma_min = 1e-6;
    double gamma_max = 1.0;
    int points = 50;
    std::string spacing = "log";
    std::string out, config;
  } mc;
  detail::BindingSet mc_bind;
  auto* mc_cmd = app.add_subcommand(
      "mass-curve",
      "Sweep the plateau parameter gamma and write mass_curve.csv "
      "(columns: gamma,M,R; M is the radial mass without the angular factor).");
  mc_bind.add(mc_cmd->add_option("--d", mc.d, "dimension, >= 3"), "d", mc.d);
  mc_bind.add(mc_cmd->add_option("--gamma-min", mc.gamma_min, "smallest gamma, >= 0"), "gamma-min",
              mc.gamma_min);
  mc_bind.add(mc_cmd->add_option("--gamma-max", mc.gamma_max, "largest gamma"), "gamma-max",
              mc.gamma_max);
  mc_bind.add(mc_cmd->add_option("--points", mc.points, "grid size; 0 writes a header-only CSV"),
              "points", mc.points);
  mc_bind.add(mc_cmd->add_option("--spacing", mc.spacing, "log or linear"), "spacing", mc.spacing);
  mc_bind.add(mc_cmd->add_option("--out", mc.out, "output directory"), "out", mc.out);
  mc_cmd->add_option("--config", mc.config, "JSON config file");

  // critical-mass
  struct {
    int d = 0;
    std::string out, config;
  } cm;
  detail::BindingSet cm_bind;
  auto* cm_cmd = app.add_subcommand(
      "critical-mass",
      "Critical mass by two independent routes per dimension; writes "
      "critical_mass.csv (columns: d,M_critical,M_check,rel_gap).  d=2 pairs the "
      "closed form 8*pi with a shot of the planar stationary equation; d>=3 pairs "
      "the normalized-shot route with the direct profile integral.");
  cm_bind.add(cm_cmd->add_option("--d", cm.d, "single dimension; 0 tabulates d = 2..6"), "d", cm.d);
  cm_bind.add(cm_cmd->add_option("--out", cm.out, "output directory"), "out", cm.out);
  cm_cmd->add_option("--config", cm.config, "JSON config file");

  // constants
  struct {
    int d = 2;
    double mass = 0.0;
    std::string out, config;
  } co;
  detail::BindingSet co_bind;
  auto* co_cmd = app.add_subcommand(
      "constants",
      "Explicit constants for one dimension; writes constants.csv (columns: "
      "name,value): small-mass threshold epsilon, pole mass, C0, C1, the Riccati "
      "comparison coefficient at the given mass, and the subcritical q exponent "
      "for d >= 3.");
  co_bind.add(co_cmd->add_option("--d", co.d, "dimension, >= 2"), "d", co.d);
  co_bind.add(co_cmd->add_option("--mass", co.mass, "mass for C0/C1; default epsilon/2"), "mass",
              co.mass);
  co_bind.add(co_cmd->add_option("--out", co.out, "output directory"), "out", co.out);
  co_cmd->add_option("--config", co.config, "JSON config file");

  // evolve
  struct {
    int d = 2;
    double m = 0.0;
    double mass = 0.0;
    std::string profile = "gaussian";
    double param = 1.0;
    double r_max = 8.0;
    int cells = 256;
    double chi = 1.0;
    double t_end = 1.0;
    double cfl = 0.5;
    int stride = 100;
    double negative_tol = 1e-12;
    std::vector<double> snapshots;
    std::string out, config;
  } ev;
  detail::BindingSet ev_bind;
  auto* ev_cmd = app.add_subcommand(
      "evolve",
      std::string("Run the radial finite-volume evolver and write diagnostics.csv "
                  "(columns: ") +
          diagnostics_header +
          "), final_state.csv and snapshot_*.csv (columns: r,value).  A time step "
          "that leaves the admissible range writes abort_state.csv and exits 3; a "
          "detected blow-up stops the run early and still exits 0.");
  ev_bind.add(ev_cmd->add_option("--d", ev.d, "dimension, >= 2"), "d", ev.d);
  ev_bind.add(ev_cmd->add_option("--m", ev.m, "diffusion exponent; 0 selects 2 - 2/d"), "m", ev.m);
  ev_bind.add(ev_cmd->add_option("--mass", ev.mass, "total mass for renormalized profiles"),
              "mass", ev.mass);
  ev_bind.add(ev_cmd->add_option("--profile", ev.profile,
                                 "gaussian | uniform_ball | power_tail | "
                                 "lane_emden_stationary | liouville"),
              "profile", ev.profile);
  ev_bind.add(ev_cmd->add_option("--param", ev.param,
                                 "profile parameter: width, ball radius, tail "
                                 "exponent, or planar width lambda"),
              "param", ev.param);
  ev_bind.add(ev_cmd->add_option("--r-max", ev.r_max, "domain radius"), "r-max", ev.r_max);
  ev_bind.add(ev_cmd->add_option("--cells", ev.cells, "number of cells, >= 8"), "cells", ev.cells);
  ev_bind.add(ev_cmd->add_option("--chi", ev.chi, "aggregation switch, 0 or 1"), "chi", ev.chi);
  ev_bind.add(ev_cmd->add_option("--t-end", ev.t_end, "final time"), "t-end", ev.t_end);
  ev_bind.add(ev_cmd->add_option("--cfl", ev.cfl, "time step safety factor in (0,1]"), "cfl",
              ev.cfl);
  ev_bind.add(ev_cmd->add_option("--stride", ev.stride, "steps between diagnostics records"),
              "stride", ev.stride);
  ev_bind.add(ev_cmd->add_option("--negative-tol", ev.negative_tol,
                                 "admissible negative undershoot, relative to the peak"),
              "negative-tol", ev.negative_tol);
  ev_bind.add(ev_cmd->add_option("--snapshot", ev.snapshots,
                                 "time at which to dump the density; repeatable"),
              "snapshot", ev.snapshots);
  ev_bind.add(ev_cmd->add_option("--out", ev.out, "output directory"), "out", ev.out);
  ev_cmd->add_option("--config", ev.config, "JSON config file");

  // check
  struct {
    std::string input;
    int d = 2;
    std::string out, config;
  } ck;
  detail::BindingSet ck_bind;
  auto* ck_cmd = app.add_subcommand(
      "check",
      "Evaluate the pointwise inequality checkers on a density snapshot "
      "(columns: r,value) and write check.json: the pressure-Laplacian minimum, "
      "the Laplacian lower-bound margin, and for d=2 the potential-spread "
      "inequality chain.");
  ck_bind.add(ck_cmd->add_option("--input", ck.input, "field CSV to check")->required(), "input",
              ck.input);
  ck_bind.add(ck_cmd->add_option("--d", ck.d, "dimension of the stored field"), "d", ck.d);
  ck_bind.add(ck_cmd->add_option("--out", ck.out, "output directory"), "out", ck.out);
  ck_cmd->add_option("--config", ck.config, "JSON config file");

  // suite
  struct {
    bool quick = false;
    std::string out, config;
  } su;
  detail::BindingSet su_bind;
  auto* su_cmd = app.add_subcommand(
      "suite",
      "Run the acceptance battery, one PASS/FAIL line per criterion; exits 4 on "
      "any failure.  --quick runs the sub-second object and constant checks only.");
  su_bind.add(su_cmd->add_flag("--quick", su.quick, "fast smoke subset"), "quick", su.quick);
  su_bind.add(su_cmd->add_option("--out", su.out, "output directory"), "out", su.out);
  su_cmd->add_option("--config", su.config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*mc_cmd) {
      const auto dir = detail::prepare_outputs(mc.out, mc.config, "mass-curve", mc_bind);
      if (mc.points < 0) throw invalid_input("mass-curve: points must be >= 0");
      if (mc.spacing != "log" && mc.spacing != "linear")
        throw invalid_input("mass-curve: spacing must be log or linear");
      if (mc.spacing == "log" && mc.points > 0 && !(mc.gamma_min > 0.0))
        throw invalid_input("mass-curve: log spacing needs gamma-min > 0");
      if (mc.points > 1 && !(mc.gamma_max >= mc.gamma_min))
        throw invalid_input("mass-curve: gamma-max must be >= gamma-min");
      std::vector<double> gammas;
      for (int k = 0; k < mc.points; ++k) {
        const double f = mc.points == 1 ? 0.0 : static_cast<double>(k) / (mc.points - 1);
        gammas.push_back(mc.spacing == "log"
                             ? mc.gamma_min * std::pow(mc.gamma_max / mc.gamma_min, f)
                             : mc.gamma_min + (mc.gamma_max - mc.gamma_min) * f);
      }
      const auto rows = mass_curve(mc.d, gammas);
      std::ofstream os(dir / "mass_curve.csv");
      write_mass_curve_csv(os, rows);
      std::cout << fmt("wrote %s (%zu rows)\n", (dir / "mass_curve.csv").c_str(), rows.size());
      return kExitOk;
    }

    if (*cm_cmd) {
      const auto dir = detail::prepare_outputs(cm.out, cm.config, "critical-mass", cm_bind);
      if (cm.d != 0 && cm.d < 2) throw invalid_input("critical-mass: d must be >= 2");
      std::vector<int> dims;
      if (cm.d == 0)
        dims = {2, 3, 4, 5, 6};
      else
        dims = {cm.d};
      std::ofstream os(dir / "critical_mass.csv");
      os << "d,M_critical,M_check,rel_gap\n";
      for (int d : dims) {
        double analytic = 0.0, check = 0.0;
        if (d == 2) {
          analytic = 8.0 * pi;
          check = liouville_shoot(1.0, 1000.0).mass;
        } else {
          analytic = critical_mass_sub(d);
          check = direct_profile(d).mass;
        }
        const double gap = std::abs(analytic - check) / analytic;
        os << fmt17(static_cast<double>(d)) << ',' << fmt17(analytic) << ',' << fmt17(check)
           << ',' << fmt17(gap) << '\n';
        std::cout << fmt("d=%d  M_critical=%.10g  M_check=%.10g  rel_gap=%.2e\n", d, analytic,
                         check, gap);
      }
      return kExitOk;
    }

    if (*co_cmd) {
      const auto dir = detail::prepare_outputs(co.out, co.config, "constants", co_bind);
      const double eps = epsilon_threshold(co.d);
      const double pole = c0_pole(co.d);
      const double mass_eff = co.mass > 0.0 ? co.mass : eps / 2.0;
      const auto sm = small_mass_constants(co.d, mass_eff);
      std::vector<std::pair<std::string, double>> rows = {
          {"epsilon", eps},
          {"mass_pole", pole},
          {"mass", mass_eff},
          {"C0", sm.C0},
          {"C1", sm.C1},
          {"riccati_coefficient", sm.coefficient},
          {"below_threshold", sm.threshold_ok ? 1.0 : 0.0},
      };
      if (co.d >= 3) rows.emplace_back("q_exponent", subcritical_q_exponent(co.d));
      std::ofstream os(dir / "constants.csv");
      os << "name,value\n";
      for (const auto& [name, value] : rows) {
        os << name << ',' << fmt17(value) << '\n';
        std::cout << fmt("%-20s = %.17g\n", name.c_str(), value);
      }
      std::cout << fmt("%-20s = %.4f\n", "epsilon to 4 d.p.", eps);
      return kExitOk;
    }

    if (*ev_cmd) {
      const auto dir = detail::prepare_outputs(ev.out, ev.config, "evolve", ev_bind);
      SolverConfig cfg;
      cfg.d = ev.d;
      cfg.m = ev.m;
      cfg.r_max = ev.r_max;
      cfg.n_cells = ev.cells;
      cfg.chi = ev.chi;
      cfg.t_end = ev.t_end;
      cfg.cfl_safety = ev.cfl;
      cfg.output_stride = ev.stride;
      cfg.profile = {ev.profile, ev.mass, ev.param};
      cfg.snapshot_times = ev.snapshots;
      cfg.negative_tol = ev.negative_tol;

      int snap_idx = 0;
      const auto result = run(cfg, [&](const SolverState& s) {
        std::ofstream os(dir / fmt("snapshot_%02d_t%.6f.csv", snap_idx++, s.t));
        write_field_csv(os, s.rho);
      });
      {
        std::ofstream os(dir / "diagnostics.csv");
        write_diagnostics_csv(os, result.records);
      }
      {
        std::ofstream os(dir / (result.aborted ? "abort_state.csv" : "final_state.csv"));
        write_field_csv(os, result.final_state.rho);
      }
      if (result.aborted) {
        std::cerr << "evolve: " << result.abort_message << '\n';
        std::cerr << fmt("evolve: wrote the last admissible state to %s\n",
                         (dir / "abort_state.csv").c_str());
        return kExitNumerical;
      }
      std::cout << fmt("t=%.9g steps=%ld records=%zu mass=%.12g linf=%.9g\n",
                       result.final_state.t, result.final_state.steps, result.records.size(),
                       result.records.back().mass, result.records.back().linf);
      if (result.blowup.fired)
        std::cout << fmt("blowup: channel=%s value=%.6g\n", result.blowup.channel.c_str(),
                         result.blowup.value);
      if (result.outer_density_warning)
        std::cout << "warning: density reached the outer boundary; enlarge --r-max\n";
      return kExitOk;
    }

    if (*ck_cmd) {
      const auto dir = detail::prepare_outputs(ck.out, ck.config, "check", ck_bind);
      std::ifstream in(ck.input);
      if (!in) throw invalid_input(fmt("check: cannot open '%s'", ck.input.c_str()));
      const RadialField rho = read_field_csv(in, ck.d);
      const auto vd = v_and_delta(rho);
      const auto lap = check_laplacian_lower(rho, vd.delta);

      nlohmann::json doc;
      doc["d"] = ck.d;
      doc["input"] = ck.input;
      doc["mass"] = mass(rho);
      doc["delta"] = vd.delta;
      doc["laplacian_lower"] = {{"worst_margin", lap.worst_margin},
                                {"r_at_worst", lap.r_at_worst},
                                {"index", lap.index},
                                {"dbar", lap.dbar}};
      doc["reports"] = nlohmann::json::array();
      if (ck.d == 2) {
        const auto q = check_q_inequality_2d(rho, vd.delta);
        doc["q_of_u"] = q.q;
        doc["lap_l1"] = q.lap_l1;
        doc["reports"].push_back(detail::to_json(q.spread_vs_l1));
        doc["reports"].push_back(detail::to_json(q.l1_vs_delta));
      }
      const std::string text = doc.dump(2) + "\n";
      std::ofstream os(dir / "check.json");
      os << text;
      std::cout << text;
      return kExitOk;
    }

    if (*su_cmd) {
      detail::prepare_outputs(su.out, su.config, "suite", su_bind);
      const auto which =
          su.quick ? kslab::acceptance::quick_set() : kslab::acceptance::full_set();
      const auto results = kslab::acceptance::run_set(which, std::cout);
      return kslab::acceptance::exit_code(results) == 0 ? kExitOk : kExitAcceptance;
    }
  } catch (const invalid_input& err) {
    std::cerr << argv[0] << ": " << err.what() << '\n';
    return kExitConfig;
  } catch (const numerical_error& err) {
    std::cerr << argv[0] << ": " << err.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace kslab::cli
