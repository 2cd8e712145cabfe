#pragma once

// Radial shooting for the critical-exponent stationary objects: the plateau
// profile family and its mass curve, the variation and adjoint systems along
// a shot, the Emden-Fowler substitution residual, the direct normalized
// profile, and the d=2 Liouville profile.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <vector>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/dense_output_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "kslab/radial.hpp"
#include "kslab/util.hpp"

namespace kslab {

namespace detail {

inline constexpr std::size_t shoot_sample_count = 8192;
inline constexpr std::size_t aux_sample_count = 4096;

// Uniformly spaced (r, value, derivative) samples with cubic Hermite
// evaluation between nodes.  Callers clamp queries to [front, back].
struct SampledCurve {
  std::vector<double> r, value, deriv;
  double front = 0.0, spacing = 0.0;

  void push(double rr, double v, double dv) {
    r.push_back(rr);
    value.push_back(v);
    deriv.push_back(dv);
  }
  void finalize() {
    front = r.front();
    spacing = (r.back() - r.front()) / static_cast<double>(r.size() - 1);
  }
  std::size_t segment(double rr) const {
    auto k = static_cast<std::ptrdiff_t>((rr - front) / spacing);
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(r.size()) - 2));
  }
  double eval(double rr) const {
    std::size_t k = segment(rr);
    double h = r[k + 1] - r[k];
    double t = (rr - r[k]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    return h00 * value[k] + h * h10 * deriv[k] + h01 * value[k + 1] + h * h11 * deriv[k + 1];
  }
  double eval_deriv(double rr) const {
    std::size_t k = segment(rr);
    double h = r[k + 1] - r[k];
    double t = (rr - r[k]) / h;
    double g00 = 6 * t * t - 6 * t;
    double g10 = 3 * t * t - 4 * t + 1;
    double g01 = 6 * t - 6 * t * t;
    double g11 = 3 * t * t - 2 * t;
    return (g00 * value[k] + h * g10 * deriv[k] + g01 * value[k + 1] + h * g11 * deriv[k + 1]) / h;
  }
};

template <std::size_t N>
using ShootState = std::array<double, N>;

template <class Sys, std::size_t N>
auto make_dense_stepper(double abs_tol, double rel_tol) {
  namespace odeint = boost::numeric::odeint;
  return odeint::make_dense_output(abs_tol, rel_tol,
                                   odeint::runge_kutta_dopri5<ShootState<N>>());
}

// Integrates until component 0 crosses zero and locates the crossing on the
// dense interpolant to |x0| <= 1e-12.  On return x holds the state at the
// crossing.  The concavity of u = r^{d-2} x0 in s = r^{d-2} bounds the first
// zero once u gains negative slope; exceeding ten times that bound while
// still positive means the integration went numerically bad.
template <class Sys, std::size_t N>
double find_first_zero(const Sys& sys, ShootState<N>& x, double t0, double abs_tol,
                       double rel_tol, int d) {
  auto stepper = make_dense_stepper<Sys, N>(abs_tol, rel_tol);
  stepper.initialize(x, t0, 1e-6);
  double guard = std::numeric_limits<double>::infinity();
  while (true) {
    auto interval = stepper.do_step(sys);
    const auto& cur = stepper.current_state();
    double r = stepper.current_time();
    if (cur[0] <= 0.0) {
      double lo = interval.first;
      double hi = interval.second;
      ShootState<N> probe;
      double mid = hi;
      for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, probe);
        if (std::abs(probe[0]) <= 1e-12) break;
        (probe[0] > 0.0 ? lo : hi) = mid;
      }
      stepper.calc_state(mid, x);
      return mid;
    }
    double slope = cur[0] + r * cur[1] / (d - 2);
    if (slope < 0.0) {
      double s = std::pow(r, d - 2);
      double s_max = s + s * cur[0] / (-slope);
      guard = std::min(guard, 10.0 * std::pow(s_max, 1.0 / (d - 2)));
    }
    if (r > guard || r > 1e6)
      throw numerical_error("no first zero: profile still positive past ten times the concavity horizon");
  }
}

// Integrates from (t0, x) to t1 (either direction) and emits count+1 states
// interpolated at uniform abscissae, endpoints exact.
template <class Sys, std::size_t N, class Emit>
void sample_uniform(const Sys& sys, ShootState<N> x, double t0, double t1,
                    std::size_t count, double abs_tol, double rel_tol, Emit&& emit) {
  auto stepper = make_dense_stepper<Sys, N>(abs_tol, rel_tol);
  double dir = t1 > t0 ? 1.0 : -1.0;
  stepper.initialize(x, t0, dir * 1e-6);
  emit(t0, x);
  std::size_t j = 1;
  ShootState<N> probe;
  while (j <= count) {
    stepper.do_step(sys);
    while (j <= count) {
      double tj = j == count ? t1 : t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(count);
      if (dir * (stepper.current_time() - tj) < 0.0) break;
      stepper.calc_state(tj, probe);
      emit(tj, probe);
      ++j;
    }
  }
}

struct PlateauOde {
  int d;
  double q;
  void operator()(const ShootState<3>& x, ShootState<3>& dx, double r) const {
    double src = std::pow(std::max(x[0], 0.0), q);
    dx[0] = x[1];
    dx[1] = -(d - 1) / r * x[1] - src;
    dx[2] = std::pow(r, d - 1) * src;
  }
};

struct DirectOde {
  int d;
  double q, c, sigma;
  void operator()(const ShootState<3>& x, ShootState<3>& dx, double r) const {
    double src = std::pow(std::max(x[0], 0.0), q);
    dx[0] = x[1];
    dx[1] = -(d - 1) / r * x[1] - c * src;
    dx[2] = sigma * std::pow(r, d - 1) * src;
  }
};

struct LiouvilleOde {
  void operator()(const ShootState<3>& x, ShootState<3>& dx, double r) const {
    double dens = std::exp(x[0]);
    dx[0] = x[1];
    dx[1] = -x[1] / r - dens;
    dx[2] = 2.0 * pi * r * dens;
  }
};

inline void require_tolerances(double abs_tol, double rel_tol, const char* who) {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !std::isfinite(abs_tol) || !std::isfinite(rel_tol))
    throw invalid_input(fmt("%s: tolerances must be positive and finite", who));
}

}  // namespace detail

// One member of the plateau family: f == 1 on [0, gamma], then the shot
// profile down to its first zero R.  radial_mass carries no angular factor
// and includes the plateau contribution gamma^d / d.
struct ShootingSolution {
  int d = 0;
  double gamma = 0.0;
  double start = 0.0;
  double R = 0.0;
  double fprime_R = 0.0;
  double radial_mass = 0.0;
  detail::SampledCurve curve;

  double f(double r) const {
    if (r >= R) return 0.0;
    if (r <= start) {
      if (gamma > 0.0) return 1.0;
      double q = static_cast<double>(d) / (d - 2);
      double c4 = q / (8.0 * d * (d + 2));
      return 1.0 - r * r / (2.0 * d) + c4 * r * r * r * r;
    }
    return curve.eval(r);
  }
  double fp(double r) const {
    if (r >= R) return 0.0;
    if (r <= start) {
      if (gamma > 0.0) return 0.0;
      double q = static_cast<double>(d) / (d - 2);
      double c4 = q / (8.0 * d * (d + 2));
      return -r / d + 4.0 * c4 * r * r * r;
    }
    return curve.eval_deriv(r);
  }
};

inline ShootingSolution shoot(int d, double gamma, double abs_tol = 1e-12,
                              double rel_tol = 1e-12) {
  if (d < 3) throw invalid_input("shoot: d must be at least 3");
  if (!std::isfinite(gamma) || gamma < 0.0)
    throw invalid_input("shoot: gamma must be finite and nonnegative");
  detail::require_tolerances(abs_tol, rel_tol, "shoot");

  const double q = static_cast<double>(d) / (d - 2);
  detail::PlateauOde ode{d, q};
  double t0;
  detail::ShootState<3> x0;
  if (gamma > 0.0) {
    t0 = gamma;
    x0 = {1.0, -gamma / d, std::pow(gamma, d) / d};
  } else {
    // Series start clears the (d-1)/r term at the origin.
    t0 = 1e-3;
    double c4 = q / (8.0 * d * (d + 2));
    double t2 = t0 * t0;
    x0 = {1.0 - t2 / (2.0 * d) + c4 * t2 * t2,
          -t0 / d + 4.0 * c4 * t0 * t2,
          std::pow(t0, d) / d - q * std::pow(t0, d + 2) / (2.0 * d * (d + 2))};
  }

  detail::ShootState<3> x_end = x0;
  double R = detail::find_first_zero(ode, x_end, t0, abs_tol, rel_tol, d);

  ShootingSolution sol;
  sol.d = d;
  sol.gamma = gamma;
  sol.start = t0;
  sol.R = R;
  sol.fprime_R = x_end[1];
  sol.radial_mass = x_end[2];
  sol.curve.r.reserve(detail::shoot_sample_count + 1);
  detail::sample_uniform(ode, x0, t0, R, detail::shoot_sample_count, abs_tol, rel_tol,
                         [&sol](double r, const detail::ShootState<3>& s) {
                           sol.curve.push(r, s[0], s[1]);
                         });
  sol.curve.finalize();
  return sol;
}

inline void write_solution_csv(std::ostream& os, const ShootingSolution& sol) {
  os << "r,f,fprime\n";
  for (std::size_t k = 0; k < sol.curve.r.size(); ++k)
    os << fmt17(sol.curve.r[k]) << ',' << fmt17(sol.curve.value[k]) << ','
       << fmt17(sol.curve.deriv[k]) << '\n';
}

struct MassCurvePoint {
  double gamma = 0.0;
  double mass = 0.0;
  double R = 0.0;
};

inline std::vector<MassCurvePoint> mass_curve(int d, const std::vector<double>& gammas,
                                              double abs_tol = 1e-12,
                                              double rel_tol = 1e-12) {
  std::vector<MassCurvePoint> rows;
  rows.reserve(gammas.size());
  for (double g : gammas) {
    ShootingSolution sol = shoot(d, g, abs_tol, rel_tol);
    rows.push_back({g, sol.radial_mass, sol.R});
  }
  return rows;
}

inline void write_mass_curve_csv(std::ostream& os, const std::vector<MassCurvePoint>& rows) {
  os << "gamma,M,R\n";
  for (const auto& row : rows)
    os << fmt17(row.gamma) << ',' << fmt17(row.mass) << ',' << fmt17(row.R) << '\n';
}

// Derivative of the profile with respect to gamma along a shot, integrated on
// the stored samples; recovers dM/dgamma from the boundary flux of the
// linearized equation.
struct VariationSolution {
  double R = 0.0;
  double dM_dgamma = 0.0;
  std::vector<double> r, w, wp;
};

inline VariationSolution variation(const ShootingSolution& sol, double abs_tol = 1e-12,
                                   double rel_tol = 1e-12) {
  if (!(sol.gamma > 0.0))
    throw invalid_input("variation: gamma = 0 is degenerate, the variation vanishes identically");
  detail::require_tolerances(abs_tol, rel_tol, "variation");
  const int d = sol.d;
  const double q = static_cast<double>(d) / (d - 2);
  auto ode = [&sol, d, q](const detail::ShootState<2>& x, detail::ShootState<2>& dx, double r) {
    double f = std::max(sol.f(r), 0.0);
    dx[0] = x[1];
    dx[1] = -(d - 1) / r * x[1] - q * std::pow(f, q - 1.0) * x[0];
  };
  detail::ShootState<2> x0{sol.gamma / d, 0.0};
  VariationSolution out;
  out.R = sol.R;
  detail::sample_uniform(ode, x0, sol.gamma, sol.R, detail::aux_sample_count, abs_tol, rel_tol,
                         [&out](double r, const detail::ShootState<2>& s) {
                           out.r.push_back(r);
                           out.w.push_back(s[0]);
                           out.wp.push_back(s[1]);
                         });
  out.dM_dgamma = -std::pow(sol.R, d - 1) * out.wp.back();
  return out;
}

// Backward costate pair from (0, -1) at R.  sign_switch is the largest
// interior radius where p1 changes sign, 0 if p1 is single-signed.
// control_consistent records whether the signs match the plateau control,
// positive where mass is injected (r < gamma) and nonpositive beyond.
struct AdjointSolution {
  std::vector<double> r, p1, p2;
  double sign_switch = 0.0;
  bool p2_nonincreasing = false;
  bool control_consistent = false;
};

inline AdjointSolution adjoint_check(const ShootingSolution& sol, double r0,
                                     double abs_tol = 1e-12, double rel_tol = 1e-12) {
  if (!(r0 > 0.0) || !(r0 < sol.R))
    throw invalid_input("adjoint_check: need 0 < r0 < R");
  detail::require_tolerances(abs_tol, rel_tol, "adjoint_check");
  const int d = sol.d;
  const double q = static_cast<double>(d) / (d - 2);
  auto ode = [&sol, d, q](const detail::ShootState<2>& x, detail::ShootState<2>& dx, double r) {
    double f = std::max(sol.f(r), 0.0);
    double rd1 = std::pow(r, d - 1);
    dx[0] = -q * x[1] * rd1 * std::pow(f, q - 1.0);
    dx[1] = -std::max(-x[0], 0.0) / rd1;
  };
  detail::ShootState<2> x0{0.0, -1.0};
  AdjointSolution out;
  detail::sample_uniform(ode, x0, sol.R, r0, detail::aux_sample_count, abs_tol, rel_tol,
                         [&out](double r, const detail::ShootState<2>& s) {
                           out.r.push_back(r);
                           out.p1.push_back(s[0]);
                           out.p2.push_back(s[1]);
                         });
  std::reverse(out.r.begin(), out.r.end());
  std::reverse(out.p1.begin(), out.p1.end());
  std::reverse(out.p2.begin(), out.p2.end());

  double p1_max_abs = 0.0;
  double p2_max_abs = 0.0;
  for (std::size_t k = 0; k < out.r.size(); ++k) {
    p1_max_abs = std::max(p1_max_abs, std::abs(out.p1[k]));
    p2_max_abs = std::max(p2_max_abs, std::abs(out.p2[k]));
  }

  double sign_noise = 1e-12 * p1_max_abs;
  auto sgn = [sign_noise](double v) { return v > sign_noise ? 1 : (v < -sign_noise ? -1 : 0); };
  for (std::size_t k = out.r.size() - 1; k-- > 0;) {
    int a = sgn(out.p1[k]);
    int b = sgn(out.p1[k + 1]);
    if (a * b == -1 && out.r[k + 1] < sol.R) {
      double t = out.p1[k] / (out.p1[k] - out.p1[k + 1]);
      out.sign_switch = out.r[k] + t * (out.r[k + 1] - out.r[k]);
      break;
    }
  }

  out.p2_nonincreasing = true;
  for (std::size_t k = 0; k + 1 < out.r.size(); ++k)
    if (out.p2[k + 1] > out.p2[k] + 1e-9 * p2_max_abs) out.p2_nonincreasing = false;

  double tol = 1e-9 * std::max(1.0, p1_max_abs);
  out.control_consistent = true;
  for (std::size_t k = 0; k < out.r.size(); ++k) {
    if (out.r[k] < sol.gamma) {
      if (out.p1[k] < -tol) out.control_consistent = false;
    } else {
      if (out.p1[k] > tol) out.control_consistent = false;
    }
  }
  return out;
}

// Residual of the shot profile under u(s) = r^{d-2} f, s = r^{d-2}, where the
// equation collapses to (d-2)^2 u'' + u^q / s^2 = 0 and u is concave.  u'' is
// differenced from the exact transform of the stored first derivatives.
struct SubstitutionReport {
  double max_scaled_residual = 0.0;
  bool concave = false;
};

inline SubstitutionReport substitution_check(const ShootingSolution& sol) {
  const int d = sol.d;
  const double q = static_cast<double>(d) / (d - 2);
  const auto& c = sol.curve;
  const std::size_t n = c.r.size();
  std::vector<double> s(n), u(n), us(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = std::pow(c.r[k], d - 2);
    u[k] = s[k] * c.value[k];
    us[k] = c.value[k] + c.r[k] * c.deriv[k] / (d - 2);
  }
  double worst = 0.0;
  double scale = 0.0;
  double upp_min_slack = std::numeric_limits<double>::infinity();
  double upp_max_abs = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    double upp = (us[k + 1] - us[k - 1]) / (s[k + 1] - s[k - 1]);
    double source = std::pow(std::max(u[k], 0.0), q) / (s[k] * s[k]);
    worst = std::max(worst, std::abs((d - 2) * (d - 2) * upp + source));
    scale = std::max(scale, source);
    upp_min_slack = std::min(upp_min_slack, -upp);
    upp_max_abs = std::max(upp_max_abs, std::abs(upp));
  }
  SubstitutionReport rep;
  rep.max_scaled_residual = worst / scale;
  rep.concave = upp_min_slack > -1e-8 * upp_max_abs;
  return rep;
}

// Physical critical mass from the normalized shot: restores the angular
// measure and the diffusion coefficient dropped by the normalization.
inline double critical_mass_sub(int d, double abs_tol = 1e-12, double rel_tol = 1e-12) {
  ShootingSolution sol = shoot(d, 0.0, abs_tol, rel_tol);
  double mu_q = std::pow(2.0 * (d - 1) / (d - 2), d / 2.0);
  return sigma_d(d) * mu_q * sol.radial_mass;
}

// Un-normalized profile with the diffusion coefficient kept in the equation;
// its q-power is the critical stationary density.  Mass here is physical
// (angular factor included) and is invariant under the amplitude rescaling.
struct DirectProfile {
  int d = 0;
  double amplitude = 1.0;
  double start = 0.0;
  double support_radius = 0.0;
  double mass = 0.0;
  detail::SampledCurve curve;

  double g(double r) const {
    if (r >= support_radius) return 0.0;
    if (r <= start) {
      double q = static_cast<double>(d) / (d - 2);
      double c = (d - 2) / (2.0 * (d - 1));
      double a2 = -c * std::pow(amplitude, q) / (2.0 * d);
      double a4 = c * c * q * std::pow(amplitude, 2.0 * q - 1.0) / (8.0 * d * (d + 2));
      return amplitude + a2 * r * r + a4 * r * r * r * r;
    }
    return curve.eval(r);
  }

  RadialField density(const RadialGrid& grid) const {
    if (grid.d != d) throw invalid_input("direct_profile density: grid dimension mismatch");
    if (grid.r_max < support_radius)
      throw invalid_input("direct_profile density: grid must cover the support radius");
    double q = static_cast<double>(d) / (d - 2);
    RadialField rho = make_field(grid);
    for (std::size_t i = 0; i < grid.n; ++i)
      rho.values[i] = std::pow(std::max(g(grid.center(i)), 0.0), q);
    return rho;
  }
};

inline DirectProfile direct_profile(int d, double amplitude = 1.0, double abs_tol = 1e-12,
                                    double rel_tol = 1e-12) {
  if (d < 3) throw invalid_input("direct_profile: d must be at least 3");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw invalid_input("direct_profile: amplitude must be positive and finite");
  detail::require_tolerances(abs_tol, rel_tol, "direct_profile");

  const double q = static_cast<double>(d) / (d - 2);
  const double c = (d - 2) / (2.0 * (d - 1));
  detail::DirectOde ode{d, q, c, sigma_d(d)};

  double t0 = 1e-3;
  double aq = std::pow(amplitude, q);
  double a2 = -c * aq / (2.0 * d);
  double a4 = c * c * q * std::pow(amplitude, 2.0 * q - 1.0) / (8.0 * d * (d + 2));
  double t2 = t0 * t0;
  detail::ShootState<3> x0{
      amplitude + a2 * t2 + a4 * t2 * t2,
      2.0 * a2 * t0 + 4.0 * a4 * t0 * t2,
      sigma_d(d) * (aq * std::pow(t0, d) / d +
                    q * std::pow(amplitude, q - 1.0) * a2 * std::pow(t0, d + 2) / (d + 2))};

  detail::ShootState<3> x_end = x0;
  double R = detail::find_first_zero(ode, x_end, t0, abs_tol, rel_tol, d);

  DirectProfile prof;
  prof.d = d;
  prof.amplitude = amplitude;
  prof.start = t0;
  prof.support_radius = R;
  prof.mass = x_end[2];
  prof.curve.r.reserve(detail::shoot_sample_count + 1);
  detail::sample_uniform(ode, x0, t0, R, detail::shoot_sample_count, abs_tol, rel_tol,
                         [&prof](double r, const detail::ShootState<3>& s) {
                           prof.curve.push(r, s[0], s[1]);
                         });
  prof.curve.finalize();
  return prof;
}

// Closed-form planar stationary pressure and density indexed by the core
// width lambda; total mass is 8*pi independent of lambda.
inline double liouville_density(double lambda, double r) {
  double denom = lambda + r * r;
  return 8.0 * lambda / (denom * denom);
}

inline double liouville_pressure(double lambda, double r) {
  return std::log(liouville_density(lambda, r));
}

struct LiouvilleProfile {
  RadialField h;
  double mass = 0.0;
};

inline LiouvilleProfile liouville_profile(double lambda, const RadialGrid& grid) {
  if (grid.d != 2) throw invalid_input("liouville_profile: grid must be two dimensional");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw invalid_input("liouville_profile: lambda must be positive and finite");
  LiouvilleProfile out{make_field(grid), 0.0};
  RadialField dens = make_field(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    double r = grid.center(i);
    out.h.values[i] = liouville_pressure(lambda, r);
    dens.values[i] = liouville_density(lambda, r);
  }
  out.mass = mass(dens);
  return out;
}

// Shot verification of the closed form: integrates the planar pressure
// equation from the series start with the mass accumulated alongside.
struct LiouvilleShot {
  double lambda = 0.0;
  double start = 0.0;
  double r_end = 0.0;
  double mass = 0.0;
  detail::SampledCurve curve;

  double h(double r) const {
    if (r <= start) {
      double a = 8.0 / lambda;
      return std::log(a) - a * r * r / 4.0 + a * a * r * r * r * r / 64.0;
    }
    return curve.eval(std::min(r, r_end));
  }
};

inline LiouvilleShot liouville_shoot(double lambda, double r_end, double abs_tol = 1e-12,
                                     double rel_tol = 1e-12) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw invalid_input("liouville_shoot: lambda must be positive and finite");
  detail::require_tolerances(abs_tol, rel_tol, "liouville_shoot");
  double t0 = 1e-3 * std::sqrt(lambda);
  if (!(r_end > t0)) throw invalid_input("liouville_shoot: r_end must exceed the series start");

  double a = 8.0 / lambda;
  double t2 = t0 * t0;
  detail::ShootState<3> x0{std::log(a) - a * t2 / 4.0 + a * a * t2 * t2 / 64.0,
                           -a * t0 / 2.0 + a * a * t0 * t2 / 16.0,
                           2.0 * pi * a * (t2 / 2.0 - a * t2 * t2 / 16.0)};

  LiouvilleShot shot;
  shot.lambda = lambda;
  shot.start = t0;
  shot.r_end = r_end;
  shot.curve.r.reserve(detail::shoot_sample_count + 1);
  detail::sample_uniform(detail::LiouvilleOde{}, x0, t0, r_end, detail::shoot_sample_count,
                         abs_tol, rel_tol,
                         [&shot](double r, const detail::ShootState<3>& s) {
                           shot.curve.push(r, s[0], s[1]);
                           shot.mass = s[2];
                         });
  shot.curve.finalize();
  return shot;
}

}  // namespace kslab
