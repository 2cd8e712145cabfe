#pragma once

// Radially symmetric fields on a uniform cell-centered grid, and the
// observables built from them: mass, Newtonian potential, pressure,
// the Laplacian lower-bound observable delta = min Delta(p) + rho,
// the Hessian-eigenvalue spread Q(u), free energy, moments, the
// closed-form d=2 stationary comparison profile, and tail exponents.
//
// Conventions used throughout:
//   - cells are [i dr, (i+1) dr), centers r_i = (i + 1/2) dr;
//   - integrals of cell data use the midpoint rule
//       integral f dx  ~  sigma_d * sum_i r_i^{d-1} f_i dr;
//   - discrete Laplacians difference face fluxes against exact shell
//     volumes, which is exact on quadratics at every cell (at the origin
//     cell it reduces to d * p''(0), the radial Laplacian limit);
//   - the outer boundary uses a zero-gradient ghost cell.

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "kslab/util.hpp"

namespace kslab {

struct RadialGrid {
  int d = 0;
  double r_max = 0.0;
  int n = 0;

  RadialGrid(int d_, double r_max_, int n_) : d(d_), r_max(r_max_), n(n_) {
    if (d < 2) throw invalid_input("RadialGrid: dimension must be >= 2");
    if (!(r_max > 0.0) || !std::isfinite(r_max))
      throw invalid_input("RadialGrid: r_max must be positive and finite");
    if (n < 8) throw invalid_input("RadialGrid: need at least 8 cells");
  }

  double dr() const { return r_max / n; }
  double center(int i) const { return (i + 0.5) * dr(); }
  double face(int i) const { return i * dr(); }
  // Radial shell volume (without the sigma_d factor): int_{face i}^{face i+1} r^{d-1} dr.
  double shell_volume(int i) const {
    return (std::pow(face(i + 1), d) - std::pow(face(i), d)) / d;
  }
};

struct RadialField {
  RadialGrid grid;
  std::vector<double> values;
};

inline RadialField make_field(const RadialGrid& grid) {
  return RadialField{grid, std::vector<double>(static_cast<std::size_t>(grid.n), 0.0)};
}

inline double max_value(const RadialField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, v);
  return m;
}

inline double default_floor(const RadialField& f) { return 1e-14 * max_value(f); }

namespace detail {

inline void require_density(const RadialField& rho, const char* who) {
  if (static_cast<int>(rho.values.size()) != rho.grid.n)
    throw invalid_input(std::string(who) + ": field size does not match grid");
  for (double v : rho.values)
    if (!(v >= 0.0)) throw invalid_input(std::string(who) + ": density must be nonnegative");
}

// Midpoint mass element of cell i (with the sigma_d factor).
inline double mass_element(const RadialField& rho, int i) {
  const auto& g = rho.grid;
  return sigma_d(g.d) * std::pow(g.center(i), g.d - 1) * rho.values[i] * g.dr();
}

}  // namespace detail

// Total mass by the midpoint rule. Rejects negative densities.
inline double mass(const RadialField& rho) {
  detail::require_density(rho, "mass");
  double total = 0.0;
  for (int i = 0; i < rho.grid.n; ++i) total += detail::mass_element(rho, i);
  return total;
}

// Mass enclosed by the outer face of each cell; entry n-1 equals mass().
inline std::vector<double> enclosed_mass(const RadialField& rho) {
  detail::require_density(rho, "enclosed_mass");
  std::vector<double> out(static_cast<std::size_t>(rho.grid.n));
  double acc = 0.0;
  for (int i = 0; i < rho.grid.n; ++i) {
    acc += detail::mass_element(rho, i);
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

namespace detail {

// int_a^b s^{d-1} ds, the radial volume element without sigma_d.
inline double radial_volume(int d, double a, double b) {
  return (std::pow(b, d) - std::pow(a, d)) / d;
}

// int_a^b s^{d-1} k(s) ds for the potential kernel k (log s in d=2, s^{2-d} else).
inline double kernel_volume(int d, double a, double b) {
  if (d == 2) {
    const auto prim = [](double s) { return s == 0.0 ? 0.0 : s * s * (2 * std::log(s) - 1) / 4; };
    return prim(b) - prim(a);
  }
  return (b * b - a * a) / 2;
}

}  // namespace detail

// Newtonian potential with -Laplace(u) = rho, vanishing at infinity for d > 2:
//   d > 2: u(r) = (1/((d-2) sigma_d)) [ r^{2-d} m_<(r) + int_{s>r} s^{2-d} dmu(s) ]
//   d = 2: u(r) = -(1/(2 pi)) [ ln(r) m_<(r) + int_{s>r} ln(s) dmu(s) ]
// All pieces are integrated in closed form against the piecewise-constant cell
// density, so the result is the exact potential of the discrete density. A
// midpoint treatment of the self-cell would be off by O(rho) after applying
// the discrete Laplacian near the origin, where the stencil divides by dr^2.
inline RadialField potential(const RadialField& rho) {
  detail::require_density(rho, "potential");
  const auto& g = rho.grid;
  const int n = g.n;

  // suffix[i] = sum_{j >= i} rho_j * int_{cell j} s^{d-1} k(s) ds
  std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = n - 1; i >= 0; --i)
    suffix[static_cast<std::size_t>(i)] =
        suffix[static_cast<std::size_t>(i) + 1] +
        rho.values[static_cast<std::size_t>(i)] * detail::kernel_volume(g.d, g.face(i), g.face(i + 1));

  RadialField u = make_field(g);
  double prefix = 0.0;  // sum_{j < i} rho_j * int_{cell j} s^{d-1} ds
  for (int i = 0; i < n; ++i) {
    const double r = g.center(i);
    const double rho_i = rho.values[static_cast<std::size_t>(i)];
    const double enclosed = prefix + rho_i * detail::radial_volume(g.d, g.face(i), r);
    const double tail = suffix[static_cast<std::size_t>(i) + 1] +
                        rho_i * detail::kernel_volume(g.d, r, g.face(i + 1));
    if (g.d == 2)
      u.values[static_cast<std::size_t>(i)] = -(std::log(r) * enclosed + tail);
    else
      u.values[static_cast<std::size_t>(i)] = (std::pow(r, 2 - g.d) * enclosed + tail) / (g.d - 2);
    prefix += rho_i * detail::radial_volume(g.d, g.face(i), g.face(i + 1));
  }
  return u;
}

// Pressure: log(rho) in d=2 (floored to keep the log finite), and the exact
// power (m/(m-1)) rho^{m-1} with m = 2 - 2/d in d > 2, which is defined at 0.
inline RadialField pressure(const RadialField& rho, double floor) {
  detail::require_density(rho, "pressure");
  if (!(floor > 0.0)) throw invalid_input("pressure: floor must be positive");
  const int d = rho.grid.d;
  RadialField p = make_field(rho.grid);
  if (d == 2) {
    for (int i = 0; i < rho.grid.n; ++i)
      p.values[static_cast<std::size_t>(i)] =
          std::log(std::max(rho.values[static_cast<std::size_t>(i)], floor));
  } else {
    const double expo = static_cast<double>(d - 2) / d;      // m - 1
    const double coef = (2.0 * d - 2.0) / (d - 2.0);         // m / (m - 1)
    for (int i = 0; i < rho.grid.n; ++i)
      p.values[static_cast<std::size_t>(i)] =
          coef * std::pow(rho.values[static_cast<std::size_t>(i)], expo);
  }
  return p;
}

// Radial Laplacian of cell data: face fluxes divided by exact shell volumes.
// No-flux is not assumed; the outer boundary uses a zero-gradient ghost, and
// the inner face at r=0 carries no flux because its area vanishes.
inline RadialField laplacian(const RadialField& f) {
  const auto& g = f.grid;
  const int n = g.n;
  const double dr = g.dr();
  RadialField out = make_field(g);
  for (int i = 0; i < n; ++i) {
    const double area_lo = std::pow(g.face(i), g.d - 1);
    const double area_hi = std::pow(g.face(i + 1), g.d - 1);
    const double flux_lo =
        i == 0 ? 0.0
               : (f.values[static_cast<std::size_t>(i)] - f.values[static_cast<std::size_t>(i) - 1]) / dr;
    const double flux_hi =
        i == n - 1
            ? 0.0
            : (f.values[static_cast<std::size_t>(i) + 1] - f.values[static_cast<std::size_t>(i)]) / dr;
    out.values[static_cast<std::size_t>(i)] =
        (area_hi * flux_hi - area_lo * flux_lo) / g.shell_volume(i);
  }
  return out;
}

struct VDeltaResult {
  RadialField dv;        // Delta(p) + rho, cell by cell
  double delta = 0.0;    // minimum over admissible cells
  double r_at_min = 0.0;
  int index = -1;
};

// The observable delta = inf Delta(v) with v = p - u, computed through the
// substitution Delta(v) = Delta(p) + rho (u solves -Laplace(u) = rho exactly).
// In d = 2 the pressure is log(rho), so cells at or below the floor carry
// floor noise rather than information and are excluded from the minimum.
inline VDeltaResult v_and_delta(const RadialField& rho, double floor);

inline VDeltaResult v_and_delta(const RadialField& rho) {
  return v_and_delta(rho, default_floor(rho));
}

inline VDeltaResult v_and_delta(const RadialField& rho, double floor) {
  detail::require_density(rho, "v_and_delta");
  const RadialField p = pressure(rho, floor);
  const RadialField lap = laplacian(p);
  VDeltaResult out{make_field(rho.grid), 0.0, 0.0, -1};
  for (int i = 0; i < rho.grid.n; ++i)
    out.dv.values[static_cast<std::size_t>(i)] =
        lap.values[static_cast<std::size_t>(i)] + rho.values[static_cast<std::size_t>(i)];
  const bool restrict_to_support = rho.grid.d == 2;
  for (int i = 0; i < rho.grid.n; ++i) {
    if (restrict_to_support && !(rho.values[static_cast<std::size_t>(i)] > floor)) continue;
    const double v = out.dv.values[static_cast<std::size_t>(i)];
    if (out.index < 0 || v < out.delta) {
      out.delta = v;
      out.index = i;
      out.r_at_min = rho.grid.center(i);
    }
  }
  if (out.index < 0) throw numerical_error("v_and_delta: density identically negligible");
  return out;
}

struct QResult {
  double q = 0.0;
  double r_at_max = 0.0;
};

// Q(u) = sup_r |u'' - u'/r|, the spread of the Hessian eigenvalues of the
// radial potential. u' is exact at faces given the enclosed mass,
//   u'(r) = -m_<(r) / (sigma_d r^{d-1}),
// and u'' comes from differencing adjacent faces.
inline QResult q_of_u(const RadialField& rho) {
  detail::require_density(rho, "q_of_u");
  const auto& g = rho.grid;
  const int n = g.n;
  const double dr = g.dr();
  const double sd = sigma_d(g.d);
  std::vector<double> up(static_cast<std::size_t>(n) + 1, 0.0);  // u' at faces
  double enclosed = 0.0;
  for (int i = 0; i < n; ++i) {
    enclosed += detail::mass_element(rho, i);
    const double rf = g.face(i + 1);
    up[static_cast<std::size_t>(i) + 1] = -enclosed / (sd * std::pow(rf, g.d - 1));
  }
  QResult out;
  for (int i = 0; i < n; ++i) {
    const double upp = (up[static_cast<std::size_t>(i) + 1] - up[static_cast<std::size_t>(i)]) / dr;
    const double up_c = 0.5 * (up[static_cast<std::size_t>(i)] + up[static_cast<std::size_t>(i) + 1]);
    const double r = g.center(i);
    const double spread = std::abs(upp - up_c / r);
    if (spread > out.q) {
      out.q = spread;
      out.r_at_max = r;
    }
  }
  return out;
}

struct FreeEnergyBreakdown {
  double entropy_or_lm = 0.0;  // int rho log rho (d=2) or (1/(m-1)) int rho^m (d>2)
  double interaction = 0.0;    // int rho u
  double total = 0.0;          // entropy_or_lm - interaction / 2
};

inline FreeEnergyBreakdown free_energy(const RadialField& rho) {
  detail::require_density(rho, "free_energy");
  const auto& g = rho.grid;
  const RadialField u = potential(rho);
  FreeEnergyBreakdown out;
  const double m = 2.0 - 2.0 / g.d;
  for (int i = 0; i < g.n; ++i) {
    const double w = sigma_d(g.d) * std::pow(g.center(i), g.d - 1) * g.dr();
    const double r = rho.values[static_cast<std::size_t>(i)];
    if (g.d == 2)
      out.entropy_or_lm += w * (r > 0.0 ? r * std::log(r) : 0.0);
    else
      out.entropy_or_lm += w * std::pow(r, m) / (m - 1.0);
    out.interaction += w * r * u.values[static_cast<std::size_t>(i)];
  }
  out.total = out.entropy_or_lm - out.interaction / 2.0;
  return out;
}

struct MomentsRecord {
  double second_moment = 0.0;  // int r^2 dmu
  double log_moment = 0.0;     // int log(1 + r) dmu
};

inline MomentsRecord moments(const RadialField& rho) {
  detail::require_density(rho, "moments");
  MomentsRecord out;
  for (int i = 0; i < rho.grid.n; ++i) {
    const double w = detail::mass_element(rho, i);
    const double r = rho.grid.center(i);
    out.second_moment += w * r * r;
    out.log_moment += w * std::log1p(r);
  }
  return out;
}

// The d=2 stationary comparison density u_lambda(r) = 8 lambda / (lambda + r^2)^2.
inline double stationary_density_2d(double lambda, double r) {
  return 8.0 * lambda / ((lambda + r * r) * (lambda + r * r));
}

// Relative-entropy-like distance int (sqrt(rho) - sqrt(u_lambda))^2 u_lambda^{-1/2} dx.
// Defined for d = 2 only.
inline double h_lambda_distance(const RadialField& rho, double lambda) {
  detail::require_density(rho, "h_lambda_distance");
  if (rho.grid.d != 2) throw invalid_input("h_lambda_distance: defined for d = 2 only");
  if (!(lambda > 0.0)) throw invalid_input("h_lambda_distance: lambda must be positive");
  double acc = 0.0;
  for (int i = 0; i < rho.grid.n; ++i) {
    const double r = rho.grid.center(i);
    const double ul = stationary_density_2d(lambda, r);
    const double diff = std::sqrt(rho.values[static_cast<std::size_t>(i)]) - std::sqrt(ul);
    acc += 2 * pi * r * diff * diff / std::sqrt(ul) * rho.grid.dr();
  }
  return acc;
}

// Least-squares tail exponent beta with rho ~ (1+r)^{-beta} over cells whose
// centers fall in [r_lo, r_hi]: minus the slope of log rho against log(1+r).
inline double tail_exponent(const RadialField& rho, double r_lo, double r_hi) {
  detail::require_density(rho, "tail_exponent");
  if (!(r_lo < r_hi)) throw invalid_input("tail_exponent: empty window");
  std::vector<double> x, y;
  for (int i = 0; i < rho.grid.n; ++i) {
    const double r = rho.grid.center(i);
    if (r < r_lo || r > r_hi) continue;
    const double v = rho.values[static_cast<std::size_t>(i)];
    if (!(v > 0.0))
      throw numerical_error("tail_exponent: nonpositive density inside the window");
    x.push_back(std::log1p(r));
    y.push_back(std::log(v));
  }
  if (x.size() < 2) throw invalid_input("tail_exponent: window covers fewer than two cells");
  return -fit_line(x, y).slope;
}

inline void write_field_csv(std::ostream& os, const RadialField& f) {
  os << "r,value\n";
  for (int i = 0; i < f.grid.n; ++i)
    os << fmt17(f.grid.center(i)) << ',' << fmt17(f.values[static_cast<std::size_t>(i)]) << '\n';
}

// Reads an `r,value` table and reconstructs the uniform cell-centered grid.
inline RadialField read_field_csv(std::istream& is, int d) {
  std::string line;
  if (!std::getline(is, line) || line != "r,value")
    throw invalid_input("read_field_csv: expected header 'r,value'");
  std::vector<double> rs, vs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw invalid_input("read_field_csv: malformed row");
    try {
      rs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw invalid_input("read_field_csv: malformed number");
    }
  }
  if (rs.size() < 8) throw invalid_input("read_field_csv: need at least 8 rows");
  const int n = static_cast<int>(rs.size());
  const double dr = rs[1] - rs[0];
  if (!(dr > 0.0)) throw invalid_input("read_field_csv: radii must increase");
  const double r_max = rs.back() + dr / 2;
  for (int i = 0; i < n; ++i)
    if (std::abs(rs[static_cast<std::size_t>(i)] - (i + 0.5) * dr) > 1e-9 * r_max)
      throw invalid_input("read_field_csv: grid is not uniform cell-centered");
  RadialGrid grid(d, r_max, n);
  return RadialField{grid, vs};
}

}  // namespace kslab
