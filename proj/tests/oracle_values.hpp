#pragma once

// Frozen reference values for the shooting and threshold tests, computed
// independently with scipy's DOP853 at rtol=atol=1e-13 plus mpmath cross
// checks (tools/reference_shooting.py).  Do not regenerate casually: tests
// compare against these exact digits.

namespace oracle {

// First zero R and radial mass M (no surface factor) of the plateau family,
// f(gamma) = 1, f'(gamma) = -gamma/d, for (d, gamma).
struct ShootRow {
  int d;
  double gamma;
  double R;
  double M;
};

inline constexpr ShootRow shoot_table[] = {
    {3, 0.0, 6.896848619377599, 2.018235950965796},
    {3, 0.3, 6.787732589654639, 2.018783289172820},
    {3, 1.0, 5.437766073634228, 2.203289906768010},
    {4, 0.0, 6.346510998612581, 11.21823544047694},
    {4, 0.3, 6.310273590656077, 11.21834356995287},
    {4, 1.0, 5.884767451795242, 11.35156597258482},
    {5, 0.0, 6.784269419717113, 72.54593486901619},
    {5, 0.3, 6.763780044254819, 72.54596157550891},
    {5, 1.0, 6.538505642519127, 72.65888621178475},
};

inline constexpr double shoot_R_d3_gamma05 = 6.568829249981;

// dM/dgamma from the co-integrated variation equation, d = 3.
inline constexpr double variation_d3_g02 = 1.810029387927112e-03;
inline constexpr double variation_d3_g05 = 6.757695107472479e-02;
inline constexpr double variation_d3_g10 = 8.226737142741790e-01;

// Backward adjoint run for d = 3, gamma = 0.5 (terminal p1 = 0, p2 = -1).
inline constexpr double adjoint_d3_g05_p1_at_1em3 = -1.2111907147e-02;
inline constexpr double adjoint_d3_g05_p1_at_025 = -6.4755605789e-02;
inline constexpr double adjoint_d3_g05_p1_at_05 = -4.0546170645e-01;
inline constexpr double adjoint_d3_g05_p1_at_20 = -5.2267451922e+00;
inline constexpr double adjoint_d3_g05_p2_zero_r = 2.06346258;

// Critical mass of the zero-slope profile, sigma_d * mu^q * M.
inline constexpr double critical_mass_d3 = 202.8952075764786;
inline constexpr double critical_mass_d4 = 1992.951825764181;
inline constexpr double critical_mass_d5 = 22171.92444529482;

// Direct normalized profile, d = 3: support radius is exactly twice the
// shooting R above and the mass matches critical_mass_d3.
inline constexpr double direct_d3_support = 13.79369723875100;
inline constexpr double direct_d3_mass = 202.8952075780026;

// Small-mass thresholds: root of the drift-vs-diffusion coefficient in M.
inline constexpr double epsilon_2 = 5.326672323201708;  // 8*pi/(2+e)
inline constexpr double epsilon_3 = 0.0116375381493;
inline constexpr double epsilon_4 = 0.00169892247797;
inline constexpr double epsilon_5 = 0.000182877017988;

}  // namespace oracle
