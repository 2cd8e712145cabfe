#pragma once

// Explicit finite-volume time integrator for the radial aggregation-diffusion
// equation rho_t = div(grad(rho^m) - chi rho grad(u)), -Laplace(u) = rho, at
// the mass-critical exponent m = 2 - 2/d, plus the diagnostics stream and the
// blow-up detector that watch each run.
//
// Scheme: explicit Euler, central differences for grad(rho^m), first-order
// upwind for the drift, drift velocity taken from the enclosed mass at faces
// so no elliptic solve is needed. Face fluxes telescope, so the midpoint-rule
// mass is conserved to roundoff and the only boundary condition is no-flux.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kslab/lane_emden.hpp"
#include "kslab/radial.hpp"
#include "kslab/util.hpp"

namespace kslab {

struct ProfileSpec {
  std::string name;    // gaussian | uniform_ball | lane_emden_stationary | liouville | power_tail
  double M = 0.0;      // requested mass; 0 for the intrinsic-mass profiles
  double param = 0.0;  // s (gaussian), R (uniform_ball), lambda (liouville), beta (power_tail)
};

struct SolverConfig {
  int d = 2;
  double m = 0.0;  // 0 selects the critical exponent 2 - 2/d; any other value must match it
  double r_max = 0.0;
  int n_cells = 0;
  double chi = 1.0;  // 0 = pure diffusion, 1 = full coupling
  double t_end = 0.0;
  double cfl_safety = 0.5;
  int output_stride = 100;
  ProfileSpec profile;
  std::vector<double> snapshot_times;
  double negative_tol = 1e-12;  // abort threshold for undershoot, relative to max density
};

inline double critical_exponent(int d) { return 2.0 - 2.0 / d; }

inline SolverConfig validated(SolverConfig cfg) {
  if (cfg.d < 2) throw invalid_input("SolverConfig: dimension must be >= 2");
  if (cfg.m == 0.0)
    cfg.m = critical_exponent(cfg.d);
  else if (std::abs(cfg.m - critical_exponent(cfg.d)) > 1e-12)
    throw invalid_input("SolverConfig: m is fixed at 2 - 2/d by the dimension");
  if (!(cfg.r_max > 0.0) || !std::isfinite(cfg.r_max))
    throw invalid_input("SolverConfig: r_max must be positive and finite");
  if (cfg.n_cells < 8) throw invalid_input("SolverConfig: need at least 8 cells");
  if (cfg.chi != 0.0 && cfg.chi != 1.0)
    throw invalid_input("SolverConfig: chi must be 0 or 1");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end))
    throw invalid_input("SolverConfig: t_end must be positive and finite");
  if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
    throw invalid_input("SolverConfig: cfl_safety must lie in (0, 1]");
  if (cfg.output_stride < 1) throw invalid_input("SolverConfig: output stride must be >= 1");
  if (!(cfg.negative_tol > 0.0)) throw invalid_input("SolverConfig: negative_tol must be positive");
  return cfg;
}

struct SolverState {
  double t = 0.0;
  RadialField rho;
  long steps = 0;
  double last_dt = 0.0;
};

namespace detail {

inline double int_pow(double x, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= x;
  return out;
}

// rho^m at the critical exponent, routed through cbrt/sqrt where possible.
inline double density_power(double v, int d, double m) {
  if (d == 2) return v;
  if (d == 3) return v * std::cbrt(v);
  if (d == 4) return v * std::sqrt(v);
  return std::pow(v, m);
}

}  // namespace detail

inline SolverState init_profile(const SolverConfig& cfg0) {
  const SolverConfig cfg = validated(cfg0);
  const RadialGrid grid{cfg.d, cfg.r_max, cfg.n_cells};
  const ProfileSpec& ps = cfg.profile;
  RadialField rho = make_field(grid);
  bool renormalize = true;

  auto require_mass = [&] {
    if (!(ps.M > 0.0) || !std::isfinite(ps.M))
      throw invalid_input("init_profile: profile '" + ps.name + "' needs a positive mass");
  };
  auto require_intrinsic = [&] {
    if (ps.M != 0.0)
      throw invalid_input("init_profile: profile '" + ps.name + "' has intrinsic mass, leave M = 0");
  };

  if (ps.name == "gaussian") {
    require_mass();
    if (!(ps.param > 0.0)) throw invalid_input("init_profile: gaussian width must be positive");
    for (int i = 0; i < grid.n; ++i) {
      const double r = grid.center(i);
      rho.values[static_cast<std::size_t>(i)] = std::exp(-r * r / (2.0 * ps.param * ps.param));
    }
  } else if (ps.name == "uniform_ball") {
    require_mass();
    if (!(ps.param > 0.0) || ps.param > cfg.r_max)
      throw invalid_input("init_profile: ball radius must lie in (0, r_max]");
    for (int i = 0; i < grid.n; ++i)
      rho.values[static_cast<std::size_t>(i)] = grid.center(i) < ps.param ? 1.0 : 0.0;
  } else if (ps.name == "lane_emden_stationary") {
    require_intrinsic();
    rho = direct_profile(cfg.d).density(grid);
    renormalize = false;
  } else if (ps.name == "liouville") {
    require_intrinsic();
    if (cfg.d != 2) throw invalid_input("init_profile: liouville profile is planar only");
    if (!(ps.param > 0.0)) throw invalid_input("init_profile: liouville scale must be positive");
    for (int i = 0; i < grid.n; ++i)
      rho.values[static_cast<std::size_t>(i)] = stationary_density_2d(ps.param, grid.center(i));
    renormalize = false;
  } else if (ps.name == "power_tail") {
    require_mass();
    if (!(ps.param > cfg.d))
      throw invalid_input("init_profile: tail exponent must exceed d for an integrable profile");
    for (int i = 0; i < grid.n; ++i)
      rho.values[static_cast<std::size_t>(i)] = std::pow(1.0 + grid.center(i), -ps.param);
  } else {
    throw invalid_input("init_profile: unknown profile '" + ps.name + "'");
  }

  if (renormalize) {
    const double got = mass(rho);
    if (!(got > 0.0)) throw numerical_error("init_profile: profile vanishes on the grid");
    const double scale = ps.M / got;
    for (auto& v : rho.values) v *= scale;
  }
  return SolverState{0.0, std::move(rho), 0, 0.0};
}

inline double cfl_dt(const SolverState& state, const SolverConfig& cfg0) {
  const SolverConfig cfg = validated(cfg0);
  const auto& g = state.rho.grid;
  const double peak = max_value(state.rho);
  if (peak == 0.0) return cfg.t_end;
  const double dr = g.dr();
  double dt = dr * dr / (2.0 * cfg.d * cfg.m * std::pow(peak, cfg.m - 1.0));
  if (cfg.chi == 1.0) {
    const double sd = sigma_d(g.d);
    double enclosed = 0.0;
    double u_max = 0.0;
    for (int i = 0; i + 1 < g.n; ++i) {
      enclosed += sd * detail::int_pow(g.center(i), g.d - 1) * state.rho.values[static_cast<std::size_t>(i)] * dr;
      u_max = std::max(u_max, enclosed / (sd * detail::int_pow(g.face(i + 1), g.d - 1)));
    }
    if (u_max > 0.0) dt = std::min(dt, dr / u_max);
  }
  return cfg.cfl_safety * dt;
}

inline SolverState step(const SolverState& state, double dt, const SolverConfig& cfg0) {
  const SolverConfig cfg = validated(cfg0);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw invalid_input("step: dt must be positive and finite");
  const auto& g = state.rho.grid;
  const int n = g.n;
  const double dr = g.dr();
  const double sd = sigma_d(g.d);
  const auto& rho = state.rho.values;

  std::vector<double> pm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    pm[static_cast<std::size_t>(i)] = detail::density_power(rho[static_cast<std::size_t>(i)], g.d, cfg.m);

  // Area-weighted fluxes at interior faces; faces 0 and n carry none.
  std::vector<double> af(static_cast<std::size_t>(n) + 1, 0.0);
  double enclosed = 0.0;
  for (int f = 1; f < n; ++f) {
    enclosed += sd * detail::int_pow(g.center(f - 1), g.d - 1) * rho[static_cast<std::size_t>(f) - 1] * dr;
    const double area = detail::int_pow(g.face(f), g.d - 1);
    double flux = -(pm[static_cast<std::size_t>(f)] - pm[static_cast<std::size_t>(f) - 1]) / dr;
    if (cfg.chi == 1.0) {
      const double ur = -enclosed / (sd * area);
      const double upwind = ur >= 0.0 ? rho[static_cast<std::size_t>(f) - 1] : rho[static_cast<std::size_t>(f)];
      flux += upwind * ur;
    }
    af[static_cast<std::size_t>(f)] = area * flux;
  }

  const double peak = max_value(state.rho);
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double weight = detail::int_pow(g.center(i), g.d - 1) * dr;
    double v = rho[static_cast<std::size_t>(i)] -
               dt / weight * (af[static_cast<std::size_t>(i) + 1] - af[static_cast<std::size_t>(i)]);
    if (!std::isfinite(v) || v < -cfg.negative_tol * peak)
      throw numerical_error(fmt("step: density left the admissible range at r=%g, t=%g (value %g);"
                                " the time step exceeds the stable bound",
                                g.center(i), state.t + dt, v));
    next[static_cast<std::size_t>(i)] = std::max(v, 0.0);
  }
  return SolverState{state.t + dt, RadialField{g, std::move(next)}, state.steps + 1, dt};
}

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double linf = 0.0;
  double delta = 0.0;
  double t_linf = 0.0;
  double t_delta = 0.0;
  double entropy_or_lm = 0.0;
  double interaction = 0.0;
  double free_energy = 0.0;
  double m2 = 0.0;
  double log_moment = 0.0;
  double q_of_u = 0.0;
  double h_lambda = 0.0;
  double tail_beta = 0.0;
  double dt = 0.0;
};

inline constexpr const char* diagnostics_header =
    "t,mass,linf,delta,t_linf,t_delta,entropy_or_lm,interaction,free_energy,m2,"
    "log_moment,q_of_u,h_lambda,tail_beta,dt";

namespace detail {

// Minimum of Laplacian(p) + chi * rho over the cells v_and_delta admits.
inline double delta_of(const RadialField& rho, double chi) {
  const VDeltaResult vd = v_and_delta(rho);
  if (chi == 1.0) return vd.delta;
  const double floor = default_floor(rho);
  const bool restrict_to_support = rho.grid.d == 2;
  double best = 0.0;
  bool found = false;
  for (int i = 0; i < rho.grid.n; ++i) {
    if (restrict_to_support && !(rho.values[static_cast<std::size_t>(i)] > floor)) continue;
    const double v = vd.dv.values[static_cast<std::size_t>(i)] - rho.values[static_cast<std::size_t>(i)];
    if (!found || v < best) {
      best = v;
      found = true;
    }
  }
  return best;
}

}  // namespace detail

// Snapshot observables. delta (and t*delta) is reported only for t > 0;
// measure-like initial data make it meaningless at t = 0. dt_bound is the
// stability bound in force at this state, not the possibly end-clamped step.
inline DiagnosticsRecord diagnose(const SolverState& state, const SolverConfig& cfg0,
                                  double dt_bound) {
  const SolverConfig cfg = validated(cfg0);
  const double nan = std::nan("");
  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.mass = mass(state.rho);
  rec.linf = max_value(state.rho);
  rec.delta = state.t > 0.0 ? detail::delta_of(state.rho, cfg.chi) : nan;
  rec.t_linf = state.t * rec.linf;
  rec.t_delta = state.t > 0.0 ? state.t * rec.delta : nan;
  const FreeEnergyBreakdown fe = free_energy(state.rho);
  rec.entropy_or_lm = fe.entropy_or_lm;
  rec.interaction = fe.interaction;
  rec.free_energy = fe.total;
  const MomentsRecord mom = moments(state.rho);
  rec.m2 = mom.second_moment;
  rec.log_moment = mom.log_moment;
  rec.q_of_u = q_of_u(state.rho).q;
  rec.h_lambda = cfg.d == 2 && cfg.chi == 1.0 && rec.linf > 0.0
                     ? h_lambda_distance(state.rho, 8.0 / rec.linf)
                     : nan;
  try {
    rec.tail_beta = tail_exponent(state.rho, 0.6 * cfg.r_max, 0.9 * cfg.r_max);
  } catch (const std::exception&) {
    rec.tail_beta = nan;
  }
  rec.dt = dt_bound;
  return rec;
}

struct BlowupReport {
  bool fired = false;
  std::string channel;  // linf_growth | dt_collapse | m2_trend
  double value = 0.0;   // the statistic that fired
};

// Three evidence channels, in decreasing order of directness. Pure diffusion
// never blows up, so chi = 0 short-circuits. Fewer than two records is not
// enough history to judge.
inline BlowupReport detect_blowup(const std::vector<DiagnosticsRecord>& records,
                                  const SolverConfig& cfg0) {
  const SolverConfig cfg = validated(cfg0);
  BlowupReport rep;
  if (cfg.chi == 0.0 || records.size() < 2) return rep;
  const DiagnosticsRecord& first = records.front();
  const DiagnosticsRecord& last = records.back();

  if (first.linf > 0.0 && last.linf > 1e3 * first.linf) {
    rep.fired = true;
    rep.channel = "linf_growth";
    rep.value = last.linf / first.linf;
    return rep;
  }
  if (last.dt < 1e-12 * cfg.t_end) {
    rep.fired = true;
    rep.channel = "dt_collapse";
    rep.value = last.dt;
    return rep;
  }
  // Collapse of the second moment, forecast from the trailing trend; only
  // meaningful for planar supercritical mass, where m2 shrinks linearly.
  if (cfg.d == 2 && first.mass > 8.0 * pi && records.size() >= 3 && last.m2 < 0.1 * first.m2) {
    const std::size_t k = std::min<std::size_t>(5, records.size());
    std::vector<double> ts, m2s;
    for (std::size_t i = records.size() - k; i < records.size(); ++i) {
      ts.push_back(records[i].t);
      m2s.push_back(records[i].m2);
    }
    const double slope = fit_line(ts, m2s).slope;
    if (slope < 0.0) {
      rep.fired = true;
      rep.channel = "m2_trend";
      rep.value = slope;
    }
  }
  return rep;
}

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  SolverState final_state;
  BlowupReport blowup;
  bool outer_density_warning = false;  // outer cell exceeded 1e-8 * max density
  bool aborted = false;                // a step left the admissible range
  std::string abort_message;
};

using SnapshotCallback = std::function<void(const SolverState&)>;

inline RunResult run(const SolverConfig& cfg0, const SnapshotCallback& on_snapshot = {}) {
  const SolverConfig cfg = validated(cfg0);
  SolverState state = init_profile(cfg);
  std::vector<double> snaps = cfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  std::vector<DiagnosticsRecord> records;
  BlowupReport blowup;
  bool outer_warning = false;
  records.push_back(diagnose(state, cfg, cfl_dt(state, cfg)));

  bool aborted = false;
  std::string abort_message;
  while (state.t < cfg.t_end) {
    const double bound = cfl_dt(state, cfg);
    const double dt = std::min(bound, cfg.t_end - state.t);
    try {
      state = step(state, dt, cfg);
    } catch (const numerical_error& err) {
      aborted = true;
      abort_message = err.what();
      records.push_back(diagnose(state, cfg, bound));
      break;
    }
    if (cfg.t_end - state.t <= 1e-15 * cfg.t_end) state.t = cfg.t_end;
    while (next_snap < snaps.size() && state.t >= snaps[next_snap]) {
      if (on_snapshot) on_snapshot(state);
      ++next_snap;
    }
    if (state.steps % cfg.output_stride == 0 || state.t >= cfg.t_end) {
      records.push_back(diagnose(state, cfg, bound));
      const DiagnosticsRecord& rec = records.back();
      if (state.rho.values.back() > 1e-8 * rec.linf) outer_warning = true;
      blowup = detect_blowup(records, cfg);
      if (blowup.fired) break;
    }
  }
  return RunResult{std::move(records), std::move(state), std::move(blowup), outer_warning,
                   aborted,           std::move(abort_message)};
}

struct EntropyDecayReport {
  double slope = 0.0;      // of E/M against -log t
  double intercept = 0.0;
  double c0 = 0.0;         // largest admissible rate in E(t) <= -M log(c0 t)
  bool bounded = false;
};

// Fits the entropy history against the smoothing-bound shape E(t) <= -M log(c0 t):
// E/M + log t must stay bounded above, and exp of minus its supremum is the
// best constant the data admit.
inline EntropyDecayReport entropy_decay_check(const std::vector<DiagnosticsRecord>& records,
                                              const SolverConfig& cfg0) {
  const SolverConfig cfg = validated(cfg0);
  if (cfg.d != 2) throw invalid_input("entropy_decay_check: entropy form is planar only");
  if (records.empty()) throw invalid_input("entropy_decay_check: no records");
  const double M = records.front().mass;
  if (!(M > 0.0)) throw invalid_input("entropy_decay_check: empty density");
  std::vector<double> x, y;
  double sup = -1e308;
  for (const auto& rec : records) {
    if (!(rec.t > 0.0)) continue;
    x.push_back(-std::log(rec.t));
    y.push_back(rec.entropy_or_lm / M);
    sup = std::max(sup, y.back() + std::log(rec.t));
  }
  if (x.size() < 2) throw invalid_input("entropy_decay_check: need two records past t = 0");
  const LineFit fit = fit_line(x, y);
  EntropyDecayReport rep;
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.bounded = std::isfinite(sup);
  rep.c0 = rep.bounded ? std::exp(-sup) : 0.0;
  return rep;
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records) {
  os << diagnostics_header << '\n';
  for (const auto& r : records) {
    os << fmt17(r.t) << ',' << fmt17(r.mass) << ',' << fmt17(r.linf) << ',' << fmt17(r.delta)
       << ',' << fmt17(r.t_linf) << ',' << fmt17(r.t_delta) << ',' << fmt17(r.entropy_or_lm)
       << ',' << fmt17(r.interaction) << ',' << fmt17(r.free_energy) << ',' << fmt17(r.m2) << ','
       << fmt17(r.log_moment) << ',' << fmt17(r.q_of_u) << ',' << fmt17(r.h_lambda) << ','
       << fmt17(r.tail_beta) << ',' << fmt17(r.dt) << '\n';
  }
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != diagnostics_header)
    throw invalid_input("read_diagnostics_csv: unexpected header");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double f[15];
    std::size_t pos = 0;
    for (int k = 0; k < 15; ++k) {
      const std::size_t comma = k == 14 ? line.size() : line.find(',', pos);
      if (comma == std::string::npos) throw invalid_input("read_diagnostics_csv: short row");
      try {
        f[k] = std::stod(line.substr(pos, comma - pos));
      } catch (const std::exception&) {
        throw invalid_input("read_diagnostics_csv: malformed number");
      }
      pos = comma + 1;
    }
    out.push_back(DiagnosticsRecord{f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9],
                                    f[10], f[11], f[12], f[13], f[14]});
  }
  return out;
}

}  // namespace kslab
