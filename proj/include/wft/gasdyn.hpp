#pragma once

/// @file gasdyn.hpp
/// @brief Thermodynamics, fluxes, and the eigensystem of the steady
///        two-dimensional Euler equations in conservation form
///        W(U)_x + H(U)_y = 0 for a polytropic ideal gas.
///
/// All functions here are pure; State and GasModel are immutable value
/// types, so everything is safe to call concurrently.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wft {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

// ---------------------------------------------------------------------------
// Error taxonomy shared by the whole library.
// ---------------------------------------------------------------------------

/// Base class for all library failures.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A state left the admissible regime (subsonic, vacuum-adjacent,
/// density outside the Hugoniot range, ...).
struct regime_error : error {
  explicit regime_error(const std::string& msg) : error(msg) {}
};

/// An iterative solve failed to converge.
struct newton_error : error {
  explicit newton_error(const std::string& msg) : error(msg) {}
};

/// The construction left the small-variation regime the scheme relies on
/// (detached shock, no admissible strong-shock speed, ...).
struct structural_error : error {
  explicit structural_error(const std::string& msg) : error(msg) {}
};

// ---------------------------------------------------------------------------
// Gas model and state.
// ---------------------------------------------------------------------------

/// Polytropic ideal gas, p = kappa rho^gamma exp(S/cv).
/// kappa and cv act only as entropy normalization constants and stay 1
/// in nondimensional runs.
struct GasModel {
  double gamma = 1.4;
  double kappa = 1.0;
  double cv = 1.0;

  void validate() const {
    if (!(gamma > 1.0)) throw regime_error("GasModel: gamma must exceed 1");
    if (!(kappa > 0.0) || !(cv > 0.0))
      throw regime_error("GasModel: kappa and cv must be positive");
  }
};

/// Primitive gas state U = (u, v, p, rho). Conservative vectors are
/// computed on demand; every wave-curve formula is written in primitives.
struct State {
  double u = 0.0;
  double v = 0.0;
  double p = 1.0;
  double rho = 1.0;

  Vec4 as_vec() const { return {u, v, p, rho}; }
  static State from_vec(const Vec4& q) { return {q[0], q[1], q[2], q[3]}; }

  bool valid() const {
    return std::isfinite(u) && std::isfinite(v) && p > 0.0 && rho > 0.0 &&
           std::isfinite(p) && std::isfinite(rho);
  }
};

/// Relative tolerance used to fence off the u -> c singularity of the
/// eigenvalue formulas.
inline constexpr double kSupersonicTol = 1e-10;

inline double sound_speed(const State& s, const GasModel& g) {
  return std::sqrt(g.gamma * s.p / s.rho);
}

inline double mach(const State& s, const GasModel& g) {
  return std::hypot(s.u, s.v) / sound_speed(s, g);
}

/// Flow angle arctan(v/u).
inline double flow_angle(const State& s) { return std::atan2(s.v, s.u); }

inline bool is_supersonic(const State& s, const GasModel& g) {
  const double c = sound_speed(s, g);
  return s.u * s.u + s.v * s.v > c * c;
}

/// x-supersonic: u > c, the hyperbolicity regime of the marching form.
inline bool is_x_supersonic(const State& s, const GasModel& g) {
  const double c = sound_speed(s, g);
  return s.u - c > kSupersonicTol * c;
}

inline void require_x_supersonic(const State& s, const GasModel& g,
                                 const char* where) {
  if (!s.valid()) throw regime_error(std::string(where) + ": invalid state");
  if (!is_x_supersonic(s, g))
    throw regime_error(std::string(where) + ": state is not x-supersonic (u <= c)");
}

/// Euclidean distance in (u, v, p, rho); the norm used for strengths of
/// nonphysical fronts, strong-shock drift terms, and L1 integrands.
inline double state_dist(const State& a, const State& b) {
  const double du = a.u - b.u, dv = a.v - b.v, dp = a.p - b.p,
               dr = a.rho - b.rho;
  return std::sqrt(du * du + dv * dv + dp * dp + dr * dr);
}

// ---------------------------------------------------------------------------
// Fluxes.
// ---------------------------------------------------------------------------

/// x-flux W(U) and y-flux H(U) of the conservation form.
struct FluxPair {
  Vec4 w;  ///< (rho u, rho u^2 + p, rho u v, rho u (h + q^2/2))
  Vec4 h;  ///< (rho v, rho u v, rho v^2 + p, rho v (h + q^2/2))
};

/// Specific enthalpy h = gamma p / ((gamma - 1) rho).
inline double enthalpy(const State& s, const GasModel& g) {
  return g.gamma * s.p / ((g.gamma - 1.0) * s.rho);
}

inline FluxPair fluxes(const State& s, const GasModel& g) {
  const double q2 = s.u * s.u + s.v * s.v;
  const double ht = enthalpy(s, g) + 0.5 * q2;  // total enthalpy
  FluxPair f;
  f.w = {s.rho * s.u, s.rho * s.u * s.u + s.p, s.rho * s.u * s.v,
         s.rho * s.u * ht};
  f.h = {s.rho * s.v, s.rho * s.u * s.v, s.rho * s.v * s.v + s.p,
         s.rho * s.v * ht};
  return f;
}

/// Analytic Jacobians dW/dU and dH/dU with respect to the primitives.
/// Row = flux component, column = (u, v, p, rho).
struct FluxJacobians {
  Mat4 dw;
  Mat4 dh;
};

inline FluxJacobians flux_jacobians(const State& s, const GasModel& g) {
  const double gg = g.gamma / (g.gamma - 1.0);
  const double u = s.u, v = s.v, p = s.p, rho = s.rho;
  const double q2 = u * u + v * v;
  FluxJacobians j;
  j.dw = {{{rho, 0.0, 0.0, u},
           {2.0 * rho * u, 0.0, 1.0, u * u},
           {rho * v, rho * u, 0.0, u * v},
           {gg * p + 0.5 * rho * (3.0 * u * u + v * v), rho * u * v, gg * u,
            0.5 * u * q2}}};
  j.dh = {{{0.0, rho, 0.0, v},
           {rho * v, rho * u, 0.0, u * v},
           {0.0, 2.0 * rho * v, 1.0, v * v},
           {rho * u * v, gg * p + 0.5 * rho * (u * u + 3.0 * v * v), gg * v,
            0.5 * v * q2}}};
  return j;
}

// ---------------------------------------------------------------------------
// Eigensystem.
// ---------------------------------------------------------------------------

/// Ordered eigenvalues (lambda_1, lambda_2, lambda_3, lambda_4) of the
/// marching form; lambda_2 = lambda_3 = v/u, and
/// lambda_{1,4} = (u v -/+ c sqrt(u^2 + v^2 - c^2)) / (u^2 - c^2).
/// Requires an x-supersonic state.
inline Vec4 eigenvalues(const State& s, const GasModel& g) {
  require_x_supersonic(s, g, "eigenvalues");
  const double c = sound_speed(s, g);
  const double q2 = s.u * s.u + s.v * s.v;
  const double disc = std::max(q2 - c * c, 0.0);
  const double root = c * std::sqrt(disc);
  const double den = s.u * s.u - c * c;
  const double lam1 = (s.u * s.v - root) / den;
  const double lam4 = (s.u * s.v + root) / den;
  const double lam23 = s.v / s.u;
  return {lam1, lam23, lam23, lam4};
}

namespace detail {

/// Central-difference gradient of lambda_j with respect to (u, v, p, rho).
/// The paper's normalization constants depend on grad(lambda_j) whose closed
/// form is never written down, so it is probed numerically.
inline Vec4 eigenvalue_gradient(const State& s, const GasModel& g, int j) {
  Vec4 grad{};
  const Vec4 base = s.as_vec();
  for (int k = 0; k < 4; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[k]));
    Vec4 qp = base, qm = base;
    qp[k] += h;
    qm[k] -= h;
    const double lp = eigenvalues(State::from_vec(qp), g)[j];
    const double lm = eigenvalues(State::from_vec(qm), g)[j];
    grad[k] = (lp - lm) / (2.0 * h);
  }
  return grad;
}

}  // namespace detail

/// The four linearly independent right eigenvectors, ordered by family.
/// r_1 and r_4 are normalized so r_j . grad(lambda_j) = 1 (genuinely
/// nonlinear fields); r_2 = (u, v, 0, 0) and r_3 = (0, 0, 0, rho) span the
/// two linearly degenerate fields.
inline Mat4 eigenvectors(const State& s, const GasModel& g) {
  require_x_supersonic(s, g, "eigenvectors");
  const Vec4 lam = eigenvalues(s, g);
  const double c2 = g.gamma * s.p / s.rho;
  Mat4 r;
  for (int j : {0, 3}) {
    const double m = s.rho * (lam[j] * s.u - s.v);
    Vec4 base = {-lam[j], 1.0, m, m / c2};
    const Vec4 grad = detail::eigenvalue_gradient(s, g, j);
    double dot = 0.0;
    for (int k = 0; k < 4; ++k) dot += base[k] * grad[k];
    if (std::abs(dot) < 1e-14)
      throw regime_error("eigenvectors: genuinely nonlinear normalization degenerate");
    for (int k = 0; k < 4; ++k) base[k] /= dot;
    r[j] = base;
  }
  r[1] = {s.u, s.v, 0.0, 0.0};
  r[2] = {0.0, 0.0, 0.0, s.rho};
  return r;
}

// ---------------------------------------------------------------------------
// Entropy.
// ---------------------------------------------------------------------------

/// Entropy scalar S = cv ln(p / (kappa rho^gamma)). Zero when
/// p = kappa rho^gamma; constant along rarefaction curves and strictly
/// increasing across admissible shocks.
inline double entropy_scalar(const State& s, const GasModel& g) {
  return g.cv * (std::log(s.p / g.kappa) - g.gamma * std::log(s.rho));
}

}  // namespace wft
