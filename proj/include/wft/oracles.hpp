#pragma once

/// @file oracles.hpp
/// @brief Classical gas-dynamics relations used as independent oracles:
///        oblique-shock theta-beta-M roots and the Prandtl-Meyer function.
///
/// Nothing here touches the wave-curve machinery; the relations are solved
/// directly from their scalar identities so they can cross-check it.

#include <cmath>
#include <optional>

#include "wft/gasdyn.hpp"

namespace wft {

inline constexpr double kPi = 3.14159265358979323846;

/// theta(beta) for an oblique shock at upstream Mach M1:
///   tan(theta) = 2 cot(beta) (M1^2 sin^2 beta - 1) / (M1^2 (gamma + cos 2 beta) + 2).
inline double oblique_theta_of_beta(double m1, double beta, double gamma) {
  const double s = std::sin(beta);
  const double num = 2.0 * (m1 * m1 * s * s - 1.0) / std::tan(beta);
  const double den = m1 * m1 * (gamma + std::cos(2.0 * beta)) + 2.0;
  return std::atan(num / den);
}

/// Both shock-angle roots for deflection theta >= 0 at upstream Mach M1,
/// plus the post-shock ratios on each branch. Angles are measured from the
/// upstream flow direction.
struct ObliqueShockSolution {
  bool detached = false;
  double beta_weak = 0.0;
  double beta_strong = 0.0;
  double p_ratio_weak = 1.0;    ///< p2/p1 on the weak branch
  double p_ratio_strong = 1.0;  ///< p2/p1 on the strong branch
  double rho_ratio_weak = 1.0;
  double rho_ratio_strong = 1.0;
  double m2_weak = 0.0;
  double m2_strong = 0.0;
  double theta_max = 0.0;  ///< detachment deflection at this Mach number
};

namespace detail {

inline double post_shock_mach(double m1, double beta, double theta,
                              double gamma) {
  const double m1n = m1 * std::sin(beta);
  const double m2n2 = (1.0 + 0.5 * (gamma - 1.0) * m1n * m1n) /
                      (gamma * m1n * m1n - 0.5 * (gamma - 1.0));
  return std::sqrt(m2n2) / std::sin(beta - theta);
}

/// Bisection for theta(beta) = theta on [lo, hi]; assumes a sign change.
inline double bisect_beta(double m1, double theta, double gamma, double lo,
                          double hi) {
  double flo = oblique_theta_of_beta(m1, lo, gamma) - theta;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = oblique_theta_of_beta(m1, mid, gamma) - theta;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Maximum attainable deflection (detachment angle) at upstream Mach m1,
/// located by golden-section search over beta.
inline double max_deflection(double m1, double gamma) {
  const double mu = std::asin(1.0 / m1);
  double a = mu, b = 0.5 * kPi;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = oblique_theta_of_beta(m1, x1, gamma);
  double f2 = oblique_theta_of_beta(m1, x2, gamma);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = oblique_theta_of_beta(m1, x2, gamma);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = oblique_theta_of_beta(m1, x1, gamma);
    }
  }
  return oblique_theta_of_beta(m1, 0.5 * (a + b), gamma);
}

/// Solve the theta-beta-M identity for deflection theta >= 0.
/// theta = 0 degenerates to the Mach angle on the weak branch and a normal
/// shock on the strong branch.
inline ObliqueShockSolution oblique_shock(double m1, double theta,
                                          double gamma) {
  if (!(m1 > 1.0)) throw regime_error("oblique_shock: M1 must exceed 1");
  if (theta < 0.0) throw regime_error("oblique_shock: theta must be >= 0");
  ObliqueShockSolution sol;
  const double mu = std::asin(1.0 / m1);

  // Locate the peak of theta(beta), then bisect on each side of it.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = mu, b = 0.5 * kPi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = oblique_theta_of_beta(m1, x1, gamma);
  double f2 = oblique_theta_of_beta(m1, x2, gamma);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a);
      f2 = oblique_theta_of_beta(m1, x2, gamma);
    } else {
      b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a);
      f1 = oblique_theta_of_beta(m1, x1, gamma);
    }
  }
  const double beta_peak = 0.5 * (a + b);
  sol.theta_max = oblique_theta_of_beta(m1, beta_peak, gamma);
  if (theta > sol.theta_max) {
    sol.detached = true;
    return sol;
  }

  sol.beta_weak = theta == 0.0
                      ? mu
                      : detail::bisect_beta(m1, theta, gamma, mu, beta_peak);
  sol.beta_strong = detail::bisect_beta(m1, theta, gamma, beta_peak,
                                        0.5 * kPi);

  auto fill = [&](double beta, double& pr, double& rr, double& m2) {
    const double m1n2 = m1 * m1 * std::sin(beta) * std::sin(beta);
    pr = 1.0 + 2.0 * gamma / (gamma + 1.0) * (m1n2 - 1.0);
    rr = (gamma + 1.0) * m1n2 / ((gamma - 1.0) * m1n2 + 2.0);
    m2 = detail::post_shock_mach(m1, beta, theta, gamma);
  };
  fill(sol.beta_weak, sol.p_ratio_weak, sol.rho_ratio_weak, sol.m2_weak);
  fill(sol.beta_strong, sol.p_ratio_strong, sol.rho_ratio_strong,
       sol.m2_strong);
  return sol;
}

/// Prandtl-Meyer function nu(M), radians.
inline double prandtl_meyer(double m, double gamma) {
  if (!(m >= 1.0)) throw regime_error("prandtl_meyer: M must be >= 1");
  const double k = std::sqrt((gamma + 1.0) / (gamma - 1.0));
  const double r = std::sqrt(std::max(m * m - 1.0, 0.0));
  return k * std::atan(r / k) - std::atan(r);
}

/// Inverse of the Prandtl-Meyer function by bisection.
inline double prandtl_meyer_inverse(double nu, double gamma) {
  const double nu_max =
      0.5 * kPi * (std::sqrt((gamma + 1.0) / (gamma - 1.0)) - 1.0);
  if (nu < 0.0 || nu >= nu_max)
    throw regime_error("prandtl_meyer_inverse: angle outside [0, nu_max)");
  double lo = 1.0, hi = 2.0;
  while (prandtl_meyer(hi, gamma) < nu) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (prandtl_meyer(mid, gamma) < nu)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Convenience: build a horizontal uniform state at a given Mach number,
/// unit pressure and density, then rotate the velocity by `angle`.
inline State uniform_state(double mach_number, double angle, const GasModel& g,
                           double p = 1.0, double rho = 1.0) {
  const double c = std::sqrt(g.gamma * p / rho);
  const double q = mach_number * c;
  return {q * std::cos(angle), q * std::sin(angle), p, rho};
}

}  // namespace wft
