#pragma once

/// @file waves.hpp
/// @brief Elementary wave curves in state space: contact discontinuities,
///        rarefaction curves, shock curves with their Rankine-Hugoniot
///        speeds, the strong-shock polar parameterized by speed, and the
///        entropy/Lax admissibility predicates.
///
/// Conventions. Waves are always described looking in the +y direction at a
/// fixed station x: the "below" state sits at smaller y. Family 1 fronts
/// have their ahead (front) state below, family 4 fronts have it above.
/// Signed strengths are arc lengths along the wave curves: positive for
/// rarefactions, negative for shocks (families 1 and 4). Internally the
/// curves are parameterized by the density increment t = rho_front -
/// rho_back, which is a C^2 reparameterization of arc length through t = 0.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wft/gasdyn.hpp"

namespace wft {

enum class WaveFamily : int { f1 = 1, f2 = 2, f3 = 3, f4 = 4, nonphysical = 0 };

inline bool is_genuinely_nonlinear(WaveFamily f) {
  return f == WaveFamily::f1 || f == WaveFamily::f4;
}
inline bool is_contact(WaveFamily f) {
  return f == WaveFamily::f2 || f == WaveFamily::f3;
}
inline int family_index(WaveFamily f) { return static_cast<int>(f); }

/// One elementary wave: family, signed arc-length strength, side states and
/// the slope dy/dx it propagates with.
struct WaveDescriptor {
  WaveFamily family = WaveFamily::nonphysical;
  double strength = 0.0;  ///< signed arc length (>=0 magnitude for nonphysical)
  double param = 0.0;     ///< internal curve parameter backing `strength`
  State left;             ///< below state
  State right;            ///< above state
  double speed = 0.0;     ///< slope dy/dx

  bool is_shock() const {
    return is_genuinely_nonlinear(family) && strength < 0.0;
  }
  bool is_rarefaction() const {
    return is_genuinely_nonlinear(family) && strength > 0.0;
  }
};

/// The large 1-shock emanating from the wedge vertex.
struct StrongShock {
  double sigma = 0.0;  ///< slope dy/dx of the front
  State below;         ///< ahead state (Omega-)
  State above;         ///< behind state (Omega+)
};

// ---------------------------------------------------------------------------
// Rankine-Hugoniot residual.
// ---------------------------------------------------------------------------

/// max-norm of s [W] - [H] over the four components, relative to the flux
/// scale of the two states.
inline double rh_residual(const State& below, const State& above, double slope,
                          const GasModel& g) {
  const FluxPair fb = fluxes(below, g);
  const FluxPair fa = fluxes(above, g);
  double res = 0.0, scale = 1.0;
  for (int k = 0; k < 4; ++k) {
    res = std::max(res, std::abs(slope * (fa.w[k] - fb.w[k]) -
                                 (fa.h[k] - fb.h[k])));
    scale = std::max({scale, std::abs(slope * fa.w[k]), std::abs(fa.h[k]),
                      std::abs(slope * fb.w[k]), std::abs(fb.h[k])});
  }
  return res / scale;
}

// ---------------------------------------------------------------------------
// Contact curves (families 2 and 3): p and v/u invariant.
// ---------------------------------------------------------------------------

/// State on the contact surface through u0: t_w scales the velocity
/// magnitude along r_2 = (u, v, 0, 0) (exactly (u,v) -> e^{t_w} (u,v)) and
/// t_rho scales the density along r_3 = (0, 0, 0, rho).
inline State contact_state(const State& u0, double t_w, double t_rho) {
  State s = u0;
  const double ew = std::exp(t_w);
  s.u *= ew;
  s.v *= ew;
  s.rho *= std::exp(t_rho);
  return s;
}

/// Arc length of the r_2 flow for parameter t (signed).
inline double contact_arc_w(const State& u0, double t) {
  return std::hypot(u0.u, u0.v) * (std::exp(t) - 1.0);
}
/// Arc length of the r_3 flow for parameter t (signed).
inline double contact_arc_rho(const State& u0, double t) {
  return u0.rho * (std::exp(t) - 1.0);
}

// ---------------------------------------------------------------------------
// Hugoniot locus, closed form.
// ---------------------------------------------------------------------------

namespace detail {

/// Hugoniot pressure on the locus through `known`, at density rho_other.
/// Valid for rho_other/rho_known in ((gamma-1)/(gamma+1), (gamma+1)/(gamma-1)).
inline double hugoniot_pressure(const State& known, double rho_other,
                                const GasModel& g) {
  const double r = rho_other / known.rho;
  const double gp = g.gamma + 1.0, gm = g.gamma - 1.0;
  const double den = gp - gm * r;
  if (den <= 0.0)
    throw regime_error("hugoniot: density ratio beyond (gamma+1)/(gamma-1)");
  const double num = gp * r - gm;
  if (num <= 0.0)
    throw regime_error("hugoniot: density ratio below (gamma-1)/(gamma+1), vacuum side");
  return known.p * num / den;
}

struct SlopeRoots {
  double lo;  ///< root below v/u (family-1 side)
  double hi;  ///< root above v/u (family-4 side)
  bool straddle;  ///< roots bracket the flow direction (u^2 > cbar^2)
};

/// Roots of (v - s u)^2 = cbar^2 (1 + s^2) at the given state.
inline SlopeRoots shock_slope_roots(const State& s, double cbar2) {
  const double A = s.u * s.u - cbar2;
  const double B = -2.0 * s.u * s.v;
  const double C = s.v * s.v - cbar2;
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0)
    throw regime_error("hugoniot: no real shock slope (detached regime)");
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
  double r1, r2;
  if (A != 0.0 && q != 0.0) {
    r1 = q / A;
    r2 = C / q;
  } else if (q != 0.0) {
    r1 = r2 = C / q;  // quadratic degenerated to linear
  } else {
    r1 = r2 = 0.0;
  }
  SlopeRoots out;
  out.lo = std::min(r1, r2);
  out.hi = std::max(r1, r2);
  const double w = s.v / s.u;
  out.straddle = (out.lo < w) && (out.hi > w);
  return out;
}

}  // namespace detail

/// One side of a Hugoniot jump computed from the other.
struct HugoniotJump {
  State other;
  double slope = 0.0;
};

/// Cross the j-family Hugoniot locus from a known side state to the other
/// side at prescribed density rho_other. The known state may be either the
/// front or the back side; the relations are symmetric in the pair. The
/// slope root is selected by family (1-waves run below the flow direction,
/// 4-waves above); outside the straddling regime the root with the smaller
/// Rankine-Hugoniot residual is taken.
inline HugoniotJump hugoniot_jump(const State& known, double rho_other,
                                  WaveFamily family, const GasModel& g) {
  if (!is_genuinely_nonlinear(family))
    throw regime_error("hugoniot_jump: family must be 1 or 4");
  if (!(rho_other > 0.0))
    throw regime_error("hugoniot_jump: nonpositive density");

  HugoniotJump out;
  if (rho_other == known.rho) {
    out.other = known;
    const Vec4 lam = eigenvalues(known, g);
    out.slope = family == WaveFamily::f1 ? lam[0] : lam[3];
    return out;
  }

  const double p_other = detail::hugoniot_pressure(known, rho_other, g);
  // Normal mass flux squared relative to the known side, via the paper's
  // closed form cbar^2 = (c^2 / b) (rho/rho0).
  const double cbar2 =
      (p_other - known.p) / (rho_other - known.rho) * rho_other / known.rho;
  if (!(cbar2 > 0.0))
    throw regime_error("hugoniot_jump: nonpositive normal speed");

  const detail::SlopeRoots roots = detail::shock_slope_roots(known, cbar2);
  auto build = [&](double slope) {
    State o = known;
    o.rho = rho_other;
    o.p = p_other;
    const double mdot = known.rho * (slope * known.u - known.v);
    if (mdot == 0.0)
      throw regime_error("hugoniot_jump: shock parallel to the flow");
    const double dv = (p_other - known.p) / mdot;
    o.v = known.v + dv;
    o.u = known.u - slope * dv;
    return o;
  };

  if (roots.straddle) {
    out.slope = family == WaveFamily::f1 ? roots.lo : roots.hi;
    out.other = build(out.slope);
  } else {
    // Strong regime: pick the root that actually satisfies the jump system.
    const State a = build(roots.lo);
    const State b = build(roots.hi);
    const double ra = rh_residual(known, a, roots.lo, g);
    const double rb = rh_residual(known, b, roots.hi, g);
    out.slope = ra <= rb ? roots.lo : roots.hi;
    out.other = ra <= rb ? a : b;
  }
  return out;
}

/// Arc length along the Hugoniot locus from the known state to density
/// rho_other (chordal sum over a fine subdivision).
inline double hugoniot_arc(const State& known, double rho_other,
                           WaveFamily family, const GasModel& g,
                           int segments = 24) {
  double arc = 0.0;
  State prev = known;
  for (int k = 1; k <= segments; ++k) {
    const double rho_k =
        known.rho + (rho_other - known.rho) * double(k) / segments;
    const State cur = hugoniot_jump(known, rho_k, family, g).other;
    arc += state_dist(cur, prev);
    prev = cur;
  }
  return arc;
}

/// Admissible shock from front state u0: state and speed at downstream
/// density rho > rho0 within the physical range (b_0 > 0). The returned
/// pair satisfies all four Rankine-Hugoniot relations to machine precision.
inline HugoniotJump hugoniot_state(const State& u0, WaveFamily family,
                                   double rho, const GasModel& g) {
  require_x_supersonic(u0, g, "hugoniot_state");
  const double gp = g.gamma + 1.0, gm = g.gamma - 1.0;
  if (!(rho > u0.rho) || !(rho < u0.rho * gp / gm))
    throw regime_error(
        "hugoniot_state: density outside (rho0, rho0 (gamma+1)/(gamma-1))");
  return hugoniot_jump(u0, rho, family, g);
}

// ---------------------------------------------------------------------------
// Strong shock parameterized by speed (the map G(U0, sigma)).
// ---------------------------------------------------------------------------

/// Downstream state of the 1-shock through u0 with prescribed slope sigma.
/// Inverts the slope relation for the normal speed, then the Hugoniot
/// relations in closed form; exact inverse of hugoniot_state's speed.
/// sigma equal to a characteristic slope degenerates to u0 itself.
inline State strong_shock_from_speed(const State& u0, double sigma,
                                     const GasModel& g) {
  require_x_supersonic(u0, g, "strong_shock_from_speed");
  const double c02 = g.gamma * u0.p / u0.rho;
  const double d = u0.v - sigma * u0.u;
  const double cbar2 = d * d / (1.0 + sigma * sigma);
  const double r =
      cbar2 * (g.gamma + 1.0) / (2.0 * c02 + (g.gamma - 1.0) * cbar2);
  if (r < 1.0 - 1e-12)
    throw newton_error(
        "strong_shock_from_speed: no admissible downstream density at this speed");
  if (r <= 1.0 + 1e-14) return u0;  // zero-strength limit
  State out = u0;
  out.rho = r * u0.rho;
  out.p = detail::hugoniot_pressure(u0, out.rho, g);
  const double mdot = u0.rho * (sigma * u0.u - u0.v);
  const double dv = (out.p - u0.p) / mdot;
  out.v = u0.v + dv;
  out.u = u0.u - sigma * dv;
  if (!out.valid())
    throw structural_error("strong_shock_from_speed: downstream state invalid");
  return out;
}

// ---------------------------------------------------------------------------
// Rarefaction curves: dp = c^2 drho, du = -lambda_j dv,
// rho (lambda_j u - v) dv = dp, integrated in the rho parameter.
// ---------------------------------------------------------------------------

namespace detail {

inline Vec4 rarefaction_rhs(const State& s, WaveFamily family,
                            const GasModel& g) {
  const double c2 = g.gamma * s.p / s.rho;
  const Vec4 lam = eigenvalues(s, g);
  const double l = family == WaveFamily::f1 ? lam[0] : lam[3];
  const double denom = s.rho * (l * s.u - s.v);
  if (denom == 0.0)
    throw regime_error("rarefaction: degenerate characteristic direction");
  const double dv = c2 / denom;
  return {-l * dv, dv, c2, 1.0};  // d(u, v, p, rho)/drho
}

}  // namespace detail

/// Result of integrating a rarefaction curve between two densities.
struct RarefactionPath {
  State end;
  double arc = 0.0;  ///< arc length traversed in (u,v,p,rho)-space
};

/// Integrate the rarefaction ODE from `start` to density rho_target with a
/// fixed-step classical RK4 in rho (at least 64 steps), tracking arc length.
/// Throws regime_error if the path leaves the x-supersonic region.
inline RarefactionPath rarefaction_to_rho(const State& start,
                                          WaveFamily family, double rho_target,
                                          const GasModel& g) {
  require_x_supersonic(start, g, "rarefaction_to_rho");
  if (!(rho_target > 0.0))
    throw regime_error("rarefaction_to_rho: target density must be positive");
  RarefactionPath path{start, 0.0};
  const double span = rho_target - start.rho;
  if (span == 0.0) return path;
  // Step so a full fan (|span| ~ 0.1) takes at least 64 steps.
  const int n = std::max<int>(8, int(std::ceil(std::abs(span) / 1.5e-3)));
  const double h = span / n;
  State s = start;
  for (int i = 0; i < n; ++i) {
    const Vec4 k1 = detail::rarefaction_rhs(s, family, g);
    auto advance = [&](const State& base, const Vec4& k, double f) {
      State t = base;
      t.u += f * h * k[0];
      t.v += f * h * k[1];
      t.p += f * h * k[2];
      t.rho += f * h * k[3];
      return t;
    };
    const Vec4 k2 = detail::rarefaction_rhs(advance(s, k1, 0.5), family, g);
    const Vec4 k3 = detail::rarefaction_rhs(advance(s, k2, 0.5), family, g);
    const Vec4 k4 = detail::rarefaction_rhs(advance(s, k3, 1.0), family, g);
    State next = s;
    next.u += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    next.v += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    next.p += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
    next.rho += h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
    if (!next.valid() || !is_x_supersonic(next, g))
      throw regime_error("rarefaction: integration left the x-supersonic region");
    path.arc += state_dist(next, s);
    s = next;
  }
  path.end = s;
  return path;
}

/// State at arc length alpha >= 0 along the rarefaction curve from front
/// state u0 (density decreasing). The arc-to-density inversion is done by
/// stepping the integrated path and refining the final density by secant.
inline State rarefaction_state(const State& u0, WaveFamily family,
                               double alpha, const GasModel& g) {
  if (!is_genuinely_nonlinear(family))
    throw regime_error("rarefaction_state: family must be 1 or 4");
  if (alpha < 0.0) throw regime_error("rarefaction_state: alpha must be >= 0");
  if (alpha == 0.0) return u0;
  // Along the curve |dU/drho| >= 1, so |drho| <= arc; start from that bracket.
  double drho = alpha;
  double arc = rarefaction_to_rho(u0, family, u0.rho - drho, g).arc;
  // arc(drho) is monotone and nearly linear; secant iteration.
  double drho_prev = 0.0, arc_prev = 0.0;
  for (int it = 0; it < 60 && std::abs(arc - alpha) > 1e-14 * (1.0 + alpha);
       ++it) {
    const double slope = (arc - arc_prev) / (drho - drho_prev);
    const double next = drho + (alpha - arc) / slope;
    drho_prev = drho;
    arc_prev = arc;
    drho = next;
    arc = rarefaction_to_rho(u0, family, u0.rho - drho, g).arc;
  }
  return rarefaction_to_rho(u0, family, u0.rho - drho, g).end;
}

// ---------------------------------------------------------------------------
// Unified crossing maps.
// ---------------------------------------------------------------------------

/// Result of crossing one wave from a known side to the other.
struct Crossing {
  State other;
  double arc = 0.0;    ///< unsigned arc length of the traversed curve piece
  double slope = 0.0;  ///< shock/contact slope; for rarefactions, lambda_j at `other`
};

namespace detail {

inline double lambda_of(const State& s, WaveFamily family, const GasModel& g) {
  const Vec4 lam = eigenvalues(s, g);
  switch (family) {
    case WaveFamily::f1: return lam[0];
    case WaveFamily::f4: return lam[3];
    default: return lam[1];
  }
}

}  // namespace detail

/// Cross a j-family wave from its below-side state to its above-side state.
/// t is the signed density parameter t = rho_front - rho_back: positive for
/// rarefactions, negative for shocks. For families 2 and 3, t is the
/// exponential flow parameter of contact_state. With hugoniot_only set,
/// t > 0 follows the Hugoniot locus continuation instead of the rarefaction
/// curve (the connection used by the Lyapunov functional).
inline Crossing cross_up(const State& below, WaveFamily family, double t,
                         const GasModel& g, bool hugoniot_only = false) {
  Crossing out;
  switch (family) {
    case WaveFamily::f2:
      out.other = contact_state(below, t, 0.0);
      out.arc = std::abs(contact_arc_w(below, t));
      out.slope = below.v / below.u;
      return out;
    case WaveFamily::f3:
      out.other = contact_state(below, 0.0, t);
      out.arc = std::abs(contact_arc_rho(below, t));
      out.slope = below.v / below.u;
      return out;
    case WaveFamily::f1: {
      const double rho_above = below.rho - t;
      if (t < 0.0 || hugoniot_only) {
        const HugoniotJump j = hugoniot_jump(below, rho_above, family, g);
        out.other = j.other;
        out.slope = j.slope;
        // family 1: the below state is the front state; arc is canonical.
        out.arc = hugoniot_arc(below, rho_above, family, g);
      } else if (t > 0.0) {
        const RarefactionPath p = rarefaction_to_rho(below, family, rho_above, g);
        out.other = p.end;
        out.arc = p.arc;
        out.slope = detail::lambda_of(p.end, family, g);
      } else {
        out.other = below;
        out.slope = detail::lambda_of(below, family, g);
      }
      return out;
    }
    case WaveFamily::f4: {
      const double rho_above = below.rho + t;
      if (t < 0.0 || hugoniot_only) {
        const HugoniotJump j = hugoniot_jump(below, rho_above, family, g);
        out.other = j.other;
        out.slope = j.slope;
        // family 4: the above state is the front state; measure the arc
        // along the locus through it so strengths are side-independent.
        out.arc = hugoniot_arc(j.other, below.rho, family, g);
      } else if (t > 0.0) {
        const RarefactionPath p = rarefaction_to_rho(below, family, rho_above, g);
        out.other = p.end;
        out.arc = p.arc;
        out.slope = detail::lambda_of(p.end, family, g);
      } else {
        out.other = below;
        out.slope = detail::lambda_of(below, family, g);
      }
      return out;
    }
    default:
      throw regime_error("cross_up: nonphysical family has no wave curve");
  }
}

/// Inverse of cross_up: recover the below-side state from the above-side
/// state and the same t parameter. Exact for contacts and shocks; for
/// rarefactions exact up to integrator tolerance.
inline Crossing cross_down(const State& above, WaveFamily family, double t,
                           const GasModel& g, bool hugoniot_only = false) {
  Crossing out;
  switch (family) {
    case WaveFamily::f2:
      out.other = contact_state(above, -t, 0.0);
      out.arc = std::abs(contact_arc_w(out.other, t));
      out.slope = above.v / above.u;
      return out;
    case WaveFamily::f3:
      out.other = contact_state(above, 0.0, -t);
      out.arc = std::abs(contact_arc_rho(out.other, t));
      out.slope = above.v / above.u;
      return out;
    case WaveFamily::f1:
    case WaveFamily::f4: {
      const double rho_below = family == WaveFamily::f1 ? above.rho + t
                                                        : above.rho - t;
      if (t < 0.0 || hugoniot_only) {
        const HugoniotJump j = hugoniot_jump(above, rho_below, family, g);
        out.other = j.other;
        out.slope = j.slope;
        out.arc = family == WaveFamily::f1
                      ? hugoniot_arc(j.other, above.rho, family, g)
                      : hugoniot_arc(above, rho_below, family, g);
      } else if (t > 0.0) {
        const RarefactionPath p = rarefaction_to_rho(above, family, rho_below, g);
        out.other = p.end;
        out.arc = p.arc;
        out.slope = detail::lambda_of(above, family, g);
      } else {
        out.other = above;
        out.slope = detail::lambda_of(above, family, g);
      }
      return out;
    }
    default:
      throw regime_error("cross_down: nonphysical family has no wave curve");
  }
}

/// Signed arc-length strength of a crossing with parameter t.
inline double signed_strength(double t, const Crossing& c) {
  return t >= 0.0 ? c.arc : -c.arc;
}

// ---------------------------------------------------------------------------
// Admissibility.
// ---------------------------------------------------------------------------

struct Admissibility {
  bool admissible = false;
  bool degenerate = false;   ///< zero-strength limit: equalities in place of strict
  std::string diagnostic;    ///< names the violated inequality if not admissible
};

namespace detail {

/// below/above are the states by y-position; the front (ahead) state is
/// `below` for family 1 and `above` for family 4. The Lax condition says the
/// j-characteristics impinge on the front from both sides, which in
/// y-ordered terms reads lambda_j(above) < s < lambda_j(below) for both
/// genuinely nonlinear families.
inline Admissibility check_shock(const State& below, const State& above,
                                 double s, WaveFamily family,
                                 const GasModel& g) {
  Admissibility a;
  const State& front = family == WaveFamily::f1 ? below : above;
  const State& back = family == WaveFamily::f1 ? above : below;
  const double tol = 1e-11 * std::max(1.0, std::abs(front.rho));
  if (std::abs(back.rho - front.rho) <= tol &&
      state_dist(front, back) <= 10.0 * tol) {
    a.admissible = true;
    a.degenerate = true;
    a.diagnostic = "degenerate";
    return a;
  }
  if (back.rho < front.rho - tol) {
    a.diagnostic = "density decreases across the shock (entropy violated)";
    return a;
  }
  const Vec4 l_below = eigenvalues(below, g);
  const Vec4 l_above = eigenvalues(above, g);
  const int j = family == WaveFamily::f1 ? 0 : 3;
  const double stol = 1e-11 * (1.0 + std::abs(s));
  if (!(l_above[j] < s + stol)) {
    a.diagnostic = "Lax: lambda_j(above) < s fails (j-characteristics do not impinge)";
    return a;
  }
  if (!(s < l_below[j] + stol)) {
    a.diagnostic = "Lax: s < lambda_j(below) fails (j-characteristics do not impinge)";
    return a;
  }
  if (family == WaveFamily::f1 && !(s < l_above[1] + stol)) {
    a.diagnostic = "Lax: s_1 < lambda_23(back) fails";
    return a;
  }
  if (family == WaveFamily::f4 && !(l_above[1] < s + stol)) {
    a.diagnostic = "Lax: lambda_23(front) < s_4 fails";
    return a;
  }
  a.admissible = true;
  a.diagnostic = "ok";
  return a;
}

}  // namespace detail

/// Entropy and Lax admissibility of a shock front (Lemma-2.1-style checks).
/// Rejects non-shock input.
inline Admissibility admissible(const WaveDescriptor& w, const GasModel& g) {
  if (!is_genuinely_nonlinear(w.family))
    throw regime_error("admissible: input is not a shock (family not 1 or 4)");
  if (w.strength > 0.0)
    throw regime_error("admissible: input is a rarefaction, not a shock");
  return detail::check_shock(w.left, w.right, w.speed, w.family, g);
}

inline Admissibility admissible(const StrongShock& s, const GasModel& g) {
  return detail::check_shock(s.below, s.above, s.sigma, WaveFamily::f1, g);
}

}  // namespace wft
