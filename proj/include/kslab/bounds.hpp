#pragma once

// Explicit small-mass constants and thresholds, the comparison envelope for
// the Riccati differential inequality on the pressure Laplacian minimum, and
// pointwise inequality checkers applied to density snapshots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "kslab/radial.hpp"
#include "kslab/util.hpp"

namespace kslab {

// Mass where the mean-value prefactor C reaches 1 and C/(1-C) blows up.
inline double c0_pole(int d) {
  if (d < 2) throw invalid_input("c0_pole: d must be at least 2");
  if (d == 2) return 8.0 * pi / std::exp(1.0);
  double coeff = std::pow(2.0, static_cast<double>(d) / (d - 2)) * (d - 2) /
                 (4.0 * (d - 1) * (d + 2));
  return omega_d(d) * std::pow(1.0 / coeff, d / 2.0);
}

// sup(rho)/|delta| ratio C/(1-C) from the mean-value bound on the pressure.
inline double c0_small_mass(int d, double M) {
  if (d < 2) throw invalid_input("c0_small_mass: d must be at least 2");
  if (!(M > 0.0) || !std::isfinite(M))
    throw invalid_input("c0_small_mass: M must be positive and finite");
  double C;
  if (d == 2) {
    C = std::exp(1.0) * M / (8.0 * pi);
  } else {
    C = std::pow(2.0, static_cast<double>(d) / (d - 2)) * (d - 2) /
        (4.0 * (d - 1) * (d + 2)) * std::pow(M / omega_d(d), 2.0 / d);
  }
  if (C >= 1.0)
    throw invalid_input("c0_small_mass: formula inapplicable, mass at or above its pole");
  return C / (1.0 - C);
}

namespace detail {

// Q(u)/dbar prefactor for d > 2, assembled from explicit cutoff constants
// (cosine-ramp cutoffs on annuli) and minimized over the cutoff scale.
// Normalized to dbar = 1, so the L2 reduction gives |rho|_L2 <= sqrt(M).
inline double q_prefactor_multid(int d, double M) {
  const double m = 2.0 - 2.0 / d;
  const double sd = sigma_d(d);
  const double om = omega_d(d);
  const double L = std::sqrt(M);
  const double cg = pi / 2.0;
  const double cl = pi * pi / 2.0 + (d - 1) * pi / 2.0;
  const double clt = pi * pi / 2.0 + (d - 1) * pi / 4.0;
  const double H1 = std::pow(sd * (d - 1) / d, (d - 1.0) / d);
  auto total = [=](double log_scale) {
    double R = std::exp(log_scale);
    double A1 = 2.0 / (m * sd) * H1 * std::pow(L, 2.0 / d) * 2.0 * R;
    double G = d / 2.0 *
               (clt / (R * R) * L * std::sqrt(om) * std::pow(3.0 * R, d / 2.0) +
                2.0 / m * std::pow(L, 2.0 / d) * std::pow(om, (d - 1.0) / d) *
                    std::pow(3.0 * R, d - 1.0));
    double A2 = 2.0 * cg / (sd * R) * std::pow(R, 2.0 - d) *
                std::sqrt(L * std::sqrt(om) * std::pow(2.0 * R, d / 2.0)) * std::sqrt(G);
    double A3 = cl / sd * std::sqrt(om) * std::pow(2.0, d / 2.0) * L * std::pow(R, -d / 2.0);
    double B = std::sqrt(d / sd) * L * std::pow(R, -d / 2.0);
    return A1 + A2 + A3 + B;
  };
  return golden_min(total, -10.0, 10.0, 200).value;
}

}  // namespace detail

struct SmallMassConstants {
  int d = 0;
  double M = 0.0;
  double C0 = 0.0;          // sup(rho) <= C0 |delta|
  double C1 = 0.0;          // Q(u) <= C1 |delta|
  double coefficient = 0.0; // 1 - (d-1)^2/(2d) C1^2, prefactor of delta^2
  bool threshold_ok = false;
};

inline SmallMassConstants small_mass_constants(int d, double M) {
  double C0 = c0_small_mass(d, M);
  double C1 = d == 2 ? M / (2.0 * pi) * (C0 + 1.0)
                     : detail::q_prefactor_multid(d, M) * std::max(1.0, C0);
  double coefficient = 1.0 - (d - 1) * (d - 1) / (2.0 * d) * C1 * C1;
  return {d, M, C0, C1, coefficient, coefficient > 0.0};
}

// Root in M of the delta^2 coefficient, found inside the pole interval.
inline double epsilon_threshold_numeric(int d) {
  double P = c0_pole(d);
  auto coefficient = [d](double M) { return small_mass_constants(d, M).coefficient; };
  return bisect_root(coefficient, P * 1e-12, P * (1.0 - 1e-12), 200);
}

inline double epsilon_threshold(int d) {
  if (d < 2) throw invalid_input("epsilon_threshold: d must be at least 2");
  if (d == 2) return 8.0 * pi / (2.0 + std::exp(1.0));
  return epsilon_threshold_numeric(d);
}

// Solution envelope of delta' >= c delta^2 with delta(0) = delta0;
// delta0 = -infinity selects the universal envelope -1/(c t).
inline double delta_comparison(double t, double c, double delta0) {
  if (!(c > 0.0) || !(t > 0.0) || std::isnan(delta0))
    throw invalid_input("delta_comparison: need c > 0, t > 0 and a well-defined start");
  return std::max(delta0, -1.0 / (c * t));
}

struct InequalityReport {
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

inline InequalityReport make_report(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, rhs, rhs - lhs, lhs <= rhs};
}

inline std::string to_json_line(const InequalityReport& rep) {
  std::string out = "{\"inequality\":\"";
  out += rep.inequality;
  out += "\",\"lhs\":";
  out += fmt17(rep.lhs);
  out += ",\"rhs\":";
  out += fmt17(rep.rhs);
  out += ",\"margin\":";
  out += fmt17(rep.margin);
  out += ",\"pass\":";
  out += rep.pass ? "true" : "false";
  out += "}";
  return out;
}

struct QInequalityReport {
  InequalityReport spread_vs_l1;   // Q(u) <= |lap rho|_L1 / (4 pi)
  InequalityReport l1_vs_delta;    // |lap rho|_L1 <= 2M|delta| + 2M sup(rho)
  double q = 0.0;
  double lap_l1 = 0.0;
};

inline QInequalityReport check_q_inequality_2d(const RadialField& rho, double delta) {
  if (rho.grid.d != 2) throw invalid_input("check_q_inequality_2d: field must be planar");
  if (std::isnan(delta)) throw invalid_input("check_q_inequality_2d: delta must be a number");
  QInequalityReport rep;
  rep.q = q_of_u(rho).q;
  const RadialField lap = laplacian(rho);
  for (int i = 0; i < rho.grid.n; ++i) {
    double shell = sigma_d(2) * rho.grid.center(i) * rho.grid.dr();
    rep.lap_l1 += std::abs(lap.values[i]) * shell;
  }
  double M = mass(rho);
  rep.spread_vs_l1 = make_report("Q(u) <= |lap rho|_1/(4 pi)", rep.q, rep.lap_l1 / (4.0 * pi));
  rep.l1_vs_delta = make_report("|lap rho|_1 <= 2M|delta| + 2M sup rho", rep.lap_l1,
                                2.0 * M * std::abs(delta) + 2.0 * M * max_value(rho));
  return rep;
}

struct LaplacianLowerReport {
  double worst_margin = 0.0;  // min over cells of lap(rho) + (2/m) dbar rho^(2/d)
  double r_at_worst = 0.0;
  int index = -1;
  double dbar = 0.0;
};

inline LaplacianLowerReport check_laplacian_lower(const RadialField& rho, double delta) {
  detail::require_density(rho, "check_laplacian_lower");
  if (std::isnan(delta)) throw invalid_input("check_laplacian_lower: delta must be a number");
  const int d = rho.grid.d;
  const double m = 2.0 - 2.0 / d;
  LaplacianLowerReport rep;
  rep.dbar = std::max(std::abs(delta), max_value(rho));
  const RadialField lap = laplacian(rho);
  for (int i = 0; i < rho.grid.n; ++i) {
    double margin = lap.values[i] + 2.0 / m * rep.dbar * std::pow(rho.values[i], 2.0 / d);
    if (rep.index < 0 || margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.r_at_worst = rho.grid.center(i);
      rep.index = i;
    }
  }
  return rep;
}

// Exponent in the decay bound Q(u) = O(|delta|^e) used past the small-mass
// regime in d > 2; strictly below 1.
inline double subcritical_q_exponent(int d) {
  if (d < 3) throw invalid_input("subcritical_q_exponent: d must be at least 3");
  return (d * d + 4.0) / (d * (d + 2.0));
}

}  // namespace kslab
