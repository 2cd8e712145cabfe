#pragma once

// Shared small pieces: error types, sphere constants, printing, 1-d fitting,
// golden-section minimization and bisection.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kslab {

inline constexpr double pi = 3.14159265358979323846;

// Bad arguments or configuration; the CLI maps this to exit code 2.
struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computation that started from valid input failed; CLI exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Surface area of the unit sphere in R^d.
inline double sigma_d(int d) {
  if (d < 1) throw invalid_input("sigma_d: dimension must be >= 1");
  return 2.0 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
}

// Volume of the unit ball in R^d.
inline double omega_d(int d) { return sigma_d(d) / d; }

// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares through (x_i, y_i); needs at least two points.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw invalid_input("fit_line: need two or more matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw numerical_error("fit_line: degenerate abscissae");
  LineFit out;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;
  return out;
}

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section search for the minimum of a unimodal f on [lo, hi].
inline GoldenResult golden_min(const std::function<double(double)>& f, double lo,
                               double hi, int iterations = 200) {
  if (!(lo < hi)) throw invalid_input("golden_min: empty interval");
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  double f1 = f(c1), f2 = f(c2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = f(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = f(c2);
    }
  }
  return f1 < f2 ? GoldenResult{c1, f1} : GoldenResult{c2, f2};
}

// Bisection root of f on [lo, hi]; requires a sign change on the bracket.
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, int iterations = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw numerical_error("bisect_root: no sign change on bracket");
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (fhi > 0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace kslab
