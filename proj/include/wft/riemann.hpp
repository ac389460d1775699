#pragma once

/// @file riemann.hpp
/// @brief Riemann solvers: the accurate four-wave solver, the strong-shock
///        solver, boundary reflection and vertex (lateral) solvers, and the
///        simplified solvers that emit nonphysical fronts.
///
/// Every solver returns a WaveFan whose waves are ordered bottom to top.
/// Simplified solvers compose exactly by construction (the nonphysical
/// front closes the gap bit-for-bit); accurate solvers converge the Newton
/// residual below 1e-13 and absorb the leftover into the topmost wave's
/// right state so front sets always chain exactly.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wft/gasdyn.hpp"
#include "wft/waves.hpp"

namespace wft {

/// Solution of a local Riemann problem.
struct WaveFan {
  std::vector<WaveDescriptor> waves;  ///< ordered by increasing speed
  std::vector<State> middle_states;   ///< states strictly between the waves
  bool contains_strong = false;       ///< waves[0] is the strong 1-shock
  double nonphysical_strength = 0.0;  ///< total emitted nonphysical jump
};

/// Wall-vertex Riemann input: the incoming tangential state and the turn.
struct BoundaryRiemannInput {
  State state;                      ///< tangent to the incoming face
  double omega = 0.0;               ///< turning angle omega_k (radians)
  std::array<double, 2> normal_next{0.0, 1.0};  ///< unit outer normal n_{k+1}
};

namespace detail {

inline constexpr double kParamFloor = 1e-11;  ///< t below this emits no wave
inline constexpr double kNewtonTol = 1e-13;
inline constexpr int kNewtonMaxIter = 50;

struct Walk {
  std::array<State, 5> states;  ///< U_b, U_1, U_2, U_3, U_a
  std::array<Crossing, 4> crossings;
};

inline Walk walk_up(const State& below, const std::array<double, 4>& t,
                    const GasModel& g, bool hugoniot_only = false) {
  Walk w;
  w.states[0] = below;
  for (int j = 0; j < 4; ++j) {
    w.crossings[j] = cross_up(w.states[j], static_cast<WaveFamily>(j + 1),
                              t[j], g, hugoniot_only);
    w.states[j + 1] = w.crossings[j].other;
  }
  return w;
}

/// Damped Newton iteration on an R^n -> R^n residual with central-difference
/// Jacobian and an optional per-variable clamp.
template <int N>
inline std::array<double, N> newton_solve(
    const std::function<std::array<double, N>(const std::array<double, N>&)>& f,
    std::array<double, N> x, double tol, const char* who,
    const std::function<void(std::array<double, N>&)>& clamp = nullptr) {
  auto norm = [](const std::array<double, N>& r) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
  };
  std::array<double, N> r = f(x);
  double rn = norm(r);
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    if (rn < tol) return x;
    // Central-difference Jacobian.
    double jac[N][N];
    for (int k = 0; k < N; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
      std::array<double, N> xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      if (clamp) {
        clamp(xp);
        clamp(xm);
      }
      const std::array<double, N> rp = f(xp);
      const std::array<double, N> rm = f(xm);
      const double den = xp[k] - xm[k];
      for (int i = 0; i < N; ++i) jac[i][k] = (rp[i] - rm[i]) / den;
    }
    // Solve jac * dx = -r by Gaussian elimination with partial pivoting.
    std::array<double, N> b;
    for (int i = 0; i < N; ++i) b[i] = -r[i];
    int perm[N];
    for (int i = 0; i < N; ++i) perm[i] = i;
    for (int col = 0; col < N; ++col) {
      int piv = col;
      for (int i = col + 1; i < N; ++i)
        if (std::abs(jac[i][col]) > std::abs(jac[piv][col])) piv = i;
      if (std::abs(jac[piv][col]) < 1e-300)
        throw newton_error(std::string(who) + ": singular Jacobian");
      if (piv != col) {
        for (int k = 0; k < N; ++k) std::swap(jac[col][k], jac[piv][k]);
        std::swap(b[col], b[piv]);
      }
      for (int i = col + 1; i < N; ++i) {
        const double m = jac[i][col] / jac[col][col];
        for (int k = col; k < N; ++k) jac[i][k] -= m * jac[col][k];
        b[i] -= m * b[col];
      }
    }
    std::array<double, N> dx{};
    for (int i = N - 1; i >= 0; --i) {
      double acc = b[i];
      for (int k = i + 1; k < N; ++k) acc -= jac[i][k] * dx[k];
      dx[i] = acc / jac[i][i];
    }
    // Backtracking line search.
    double step = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 12; ++bt) {
      std::array<double, N> xn = x;
      for (int k = 0; k < N; ++k) xn[k] += step * dx[k];
      if (clamp) clamp(xn);
      std::array<double, N> rnew;
      try {
        rnew = f(xn);
      } catch (const error&) {
        step *= 0.5;
        continue;  // stepped out of the admissible region
      }
      const double nn = norm(rnew);
      if (nn < rn || (bt == 0 && nn < tol)) {
        x = xn;
        r = rnew;
        rn = nn;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved)
      throw newton_error(std::string(who) +
                         ": line search stalled at residual " +
                         std::to_string(rn));
  }
  throw newton_error(std::string(who) + ": no convergence in " +
                     std::to_string(kNewtonMaxIter) + " iterations");
}

/// Append the waves of one genuinely nonlinear crossing, splitting a
/// rarefaction into pieces of strength <= delta_eps. Each fan piece carries
/// the characteristic speed of its above-side state. Returns the above state.
inline State emit_gnl(std::vector<WaveDescriptor>& out, const State& below,
                      WaveFamily fam, double t, const Crossing& c,
                      double delta_eps, const GasModel& g) {
  if (std::abs(t) <= kParamFloor) return below;
  if (t < 0.0) {
    WaveDescriptor w;
    w.family = fam;
    w.strength = -c.arc;
    w.param = t;
    w.left = below;
    w.right = c.other;
    w.speed = c.slope;
    out.push_back(w);
    return c.other;
  }
  // Rarefaction: subdivide in density; piece arcs stay under delta_eps.
  int n = std::max(1, int(std::ceil(c.arc / (0.85 * delta_eps))));
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<WaveDescriptor> pieces;
    State lo = below;
    bool ok = true;
    for (int k = 1; k <= n; ++k) {
      const double tk = t / n;
      const Crossing ck = cross_up(lo, fam, tk, g);
      if (ck.arc > delta_eps * (1.0 + 1e-9)) {
        ok = false;
        break;
      }
      WaveDescriptor w;
      w.family = fam;
      w.strength = ck.arc;
      w.param = tk;
      w.left = lo;
      w.right = ck.other;
      w.speed = ck.slope;  // lambda_j at the above-side state
      pieces.push_back(w);
      lo = ck.other;
    }
    if (ok) {
      for (auto& w : pieces) out.push_back(w);
      return lo;
    }
    n += std::max(1, n / 4);
  }
  throw structural_error("emit_gnl: fan subdivision failed to meet delta_eps");
}

inline void emit_contact(std::vector<WaveDescriptor>& out, const State& below,
                         WaveFamily fam, double t, const GasModel& g) {
  if (std::abs(t) <= kParamFloor) return;
  const Crossing c = cross_up(below, fam, t, g);
  WaveDescriptor w;
  w.family = fam;
  w.strength = signed_strength(t, c);
  w.param = t;
  w.left = below;
  w.right = c.other;
  w.speed = c.slope;
  out.push_back(w);
}

inline void fill_middle_states(WaveFan& fan) {
  fan.middle_states.clear();
  for (size_t i = 1; i < fan.waves.size(); ++i)
    fan.middle_states.push_back(fan.waves[i].left);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Accurate solver.
// ---------------------------------------------------------------------------

/// Accurate four-wave Riemann solver: Newton solve of
/// psi_4 . psi_3 . psi_2 . psi_1 (below) = above in the density/exponential
/// parameters, then emission with rarefactions split into pieces of strength
/// at most delta_eps. The topmost emitted wave's right state is set to
/// `above` exactly so the caller's state chain stays consistent.
inline WaveFan solve_accurate(const State& below, const State& above,
                              const GasModel& g, double delta_eps) {
  WaveFan fan;
  if (state_dist(below, above) == 0.0) return fan;

  const double scale = std::max({1.0, std::abs(above.u), std::abs(above.v),
                                 above.p, above.rho});
  auto residual = [&](const std::array<double, 4>& t) {
    const detail::Walk w = detail::walk_up(below, t, g);
    const Vec4 end = w.states[4].as_vec();
    const Vec4 target = above.as_vec();
    return std::array<double, 4>{end[0] - target[0], end[1] - target[1],
                                 end[2] - target[2], end[3] - target[3]};
  };
  const std::array<double, 4> t = detail::newton_solve<4>(
      residual, {0.0, 0.0, 0.0, 0.0}, detail::kNewtonTol * scale,
      "solve_accurate");

  State cur = below;
  {
    const Crossing c1 = cross_up(cur, WaveFamily::f1, t[0], g);
    cur = detail::emit_gnl(fan.waves, cur, WaveFamily::f1, t[0], c1, delta_eps, g);
    detail::emit_contact(fan.waves, cur, WaveFamily::f2, t[1], g);
    if (!fan.waves.empty()) cur = fan.waves.back().right;
    detail::emit_contact(fan.waves, cur, WaveFamily::f3, t[2], g);
    if (!fan.waves.empty()) cur = fan.waves.back().right;
    const Crossing c4 = cross_up(cur, WaveFamily::f4, t[3], g);
    cur = detail::emit_gnl(fan.waves, cur, WaveFamily::f4, t[3], c4, delta_eps, g);
  }
  if (!fan.waves.empty()) fan.waves.back().right = above;  // absorb residual
  detail::fill_middle_states(fan);
  return fan;
}

// ---------------------------------------------------------------------------
// Strong-shock solver.
// ---------------------------------------------------------------------------

/// Riemann solver across the strong shock: (sigma', delta_2, delta_3,
/// delta_4) with the strong 1-shock G(below, sigma') followed by two weak
/// contacts and a weak 4-wave. sigma_hint brackets the Newton iterate to
/// [hint - 0.1, hint + 0.1]; leaving the bracket is a structural failure.
inline WaveFan solve_strong(const State& below, const State& above,
                            const GasModel& g,
                            double sigma_hint = std::nan("")) {
  if (std::isnan(sigma_hint))
    sigma_hint = hugoniot_jump(below, above.rho, WaveFamily::f1, g).slope;
  const double lo = sigma_hint - 0.1, hi = sigma_hint + 0.1;

  const double scale = std::max({1.0, std::abs(above.u), std::abs(above.v),
                                 above.p, above.rho});
  auto residual = [&](const std::array<double, 4>& x) {
    const State u1 = strong_shock_from_speed(below, x[0], g);
    State cur = cross_up(u1, WaveFamily::f2, x[1], g).other;
    cur = cross_up(cur, WaveFamily::f3, x[2], g).other;
    cur = cross_up(cur, WaveFamily::f4, x[3], g).other;
    const Vec4 end = cur.as_vec();
    const Vec4 target = above.as_vec();
    return std::array<double, 4>{end[0] - target[0], end[1] - target[1],
                                 end[2] - target[2], end[3] - target[3]};
  };
  auto clamp = [&](std::array<double, 4>& x) {
    x[0] = std::clamp(x[0], lo, hi);
  };
  std::array<double, 4> sol;
  try {
    sol = detail::newton_solve<4>(residual, {sigma_hint, 0.0, 0.0, 0.0},
                                  detail::kNewtonTol * scale, "solve_strong",
                                  clamp);
  } catch (const newton_error& e) {
    throw structural_error(std::string("solve_strong: no admissible strong ") +
                           "shock in the bracketing interval (" + e.what() + ")");
  }

  WaveFan fan;
  fan.contains_strong = true;
  const State u1 = strong_shock_from_speed(below, sol[0], g);
  WaveDescriptor strong;
  strong.family = WaveFamily::f1;
  strong.strength = -hugoniot_arc(below, u1.rho, WaveFamily::f1, g);
  strong.param = below.rho - u1.rho;
  strong.left = below;
  strong.right = u1;
  strong.speed = sol[0];
  fan.waves.push_back(strong);
  State cur = u1;
  detail::emit_contact(fan.waves, cur, WaveFamily::f2, sol[1], g);
  cur = fan.waves.back().right;
  detail::emit_contact(fan.waves, cur, WaveFamily::f3, sol[2], g);
  cur = fan.waves.back().right;
  if (std::abs(sol[3]) > detail::kParamFloor) {
    const Crossing c4 = cross_up(cur, WaveFamily::f4, sol[3], g);
    WaveDescriptor w4;
    w4.family = WaveFamily::f4;
    w4.strength = signed_strength(sol[3], c4);
    w4.param = sol[3];
    w4.left = cur;
    w4.right = c4.other;
    w4.speed = c4.slope;
    fan.waves.push_back(w4);
  }
  fan.waves.back().right = above;
  detail::fill_middle_states(fan);
  return fan;
}

// ---------------------------------------------------------------------------
// Boundary solvers.
// ---------------------------------------------------------------------------

namespace detail {

/// Solve for the single 1-wave from `below` whose above state is tangent to
/// the face with angle `face_angle`; returns the fan (shock, or a rarefaction
/// fan split at delta_eps).
inline WaveFan one_wave_to_angle(const State& below, double face_angle,
                                 const GasModel& g, double delta_eps,
                                 const char* who) {
  WaveFan fan;
  const double a0 = flow_angle(below);
  double delta = face_angle - a0;
  if (std::abs(delta) < 1e-14) return fan;

  const double gp = g.gamma + 1.0, gm = g.gamma - 1.0;
  double t_lo, t_hi;  // bracket in the density parameter (t = rho0 - rho_above)
  if (delta < 0.0) {
    // Compression: 1-shock, rho increases upward. Scan for a bracket and
    // detect detachment (angle stops decreasing before reaching the target).
    const double t_min = -(below.rho * (gp / gm) - below.rho) * 0.999;
    double prev_angle = a0;
    double t = -1e-4 * below.rho;
    t_lo = 0.0;
    t_hi = 0.0;
    bool found = false;
    while (t > t_min) {
      double ang;
      try {
        ang = flow_angle(cross_up(below, WaveFamily::f1, t, g).other);
      } catch (const error&) {
        break;
      }
      if (ang <= face_angle) {
        t_hi = t;
        found = true;
        break;
      }
      if (ang > prev_angle + 1e-13) break;  // past maximum deflection
      prev_angle = ang;
      t_lo = t;
      t *= 1.3;
    }
    if (!found)
      throw structural_error(std::string(who) +
                             ": turning angle beyond detachment");
  } else {
    // Expansion: 1-rarefaction, rho decreases upward.
    t_lo = 0.0;
    t_hi = 0.0;
    double t = 1e-4 * below.rho;
    bool found = false;
    while (t < 0.95 * below.rho) {
      double ang;
      try {
        ang = flow_angle(cross_up(below, WaveFamily::f1, t, g).other);
      } catch (const error&) {
        break;
      }
      if (ang >= face_angle) {
        t_hi = t;
        found = true;
        break;
      }
      t_lo = t;
      t *= 1.3;
    }
    if (!found)
      throw structural_error(std::string(who) +
                             ": expansion left the supersonic regime");
  }

  // Bisection then secant polish on the turning angle.
  auto angle_at = [&](double t) {
    return flow_angle(cross_up(below, WaveFamily::f1, t, g).other);
  };
  for (int it = 0; it < 100 && t_lo != t_hi; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    if ((angle_at(mid) - face_angle) * (delta < 0.0 ? 1.0 : -1.0) > 0.0)
      t_lo = mid;
    else
      t_hi = mid;
  }
  const double t = 0.5 * (t_lo + t_hi);

  const Crossing c = cross_up(below, WaveFamily::f1, t, g);
  State top = detail::emit_gnl(fan.waves, below, WaveFamily::f1, t, c,
                               delta_eps, g);
  (void)top;
  detail::fill_middle_states(fan);
  return fan;
}

}  // namespace detail

/// Reflection of a weak wave train on the boundary: the single outgoing
/// 1-wave from `below` that restores tangency to the face with outer normal
/// `normal`. `wall_state` is the pre-event wall-adjacent state and is only
/// sanity-checked here.
inline WaveFan solve_boundary_reflection(const State& below,
                                         const State& wall_state,
                                         const std::array<double, 2>& normal,
                                         const GasModel& g,
                                         double delta_eps = 1e308) {
  (void)wall_state;
  const double face_angle = std::atan2(-normal[0], normal[1]);
  WaveFan fan = detail::one_wave_to_angle(below, face_angle, g, delta_eps,
                                          "solve_boundary_reflection");
  const State& top = fan.waves.empty() ? below : fan.waves.back().right;
  const double tangency = top.u * normal[0] + top.v * normal[1];
  if (std::abs(tangency) > 1e-12 * std::hypot(top.u, top.v))
    throw newton_error("solve_boundary_reflection: tangency not achieved");
  return fan;
}

/// Lateral Riemann problem at a boundary vertex: a single 1-wave (shock when
/// the wedge turns into the flow, discretized rarefaction fan when away)
/// making the new wall-adjacent state tangent to the next face.
inline WaveFan solve_boundary_vertex(const BoundaryRiemannInput& input,
                                     const GasModel& g,
                                     double delta_eps = 1e308) {
  const double face_angle =
      std::atan2(-input.normal_next[0], input.normal_next[1]);
  WaveFan fan = detail::one_wave_to_angle(input.state, face_angle, g,
                                          delta_eps, "solve_boundary_vertex");
  const State& top = fan.waves.empty() ? input.state : fan.waves.back().right;
  const double q = std::hypot(top.u, top.v);
  const double tangency =
      top.u * input.normal_next[0] + top.v * input.normal_next[1];
  if (std::abs(tangency) > 1e-12 * q)
    throw newton_error("solve_boundary_vertex: tangency not achieved");
  return fan;
}

// ---------------------------------------------------------------------------
// Simplified solvers.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_nonphysical(WaveFan& fan, const State& from,
                               const State& to, double lambda_hat) {
  bool equal = from.u == to.u && from.v == to.v && from.p == to.p &&
               from.rho == to.rho;
  if (equal) return;
  WaveDescriptor np;
  np.family = WaveFamily::nonphysical;
  np.strength = state_dist(from, to);
  np.left = from;
  np.right = to;
  np.speed = lambda_hat;
  fan.waves.push_back(np);
  fan.nonphysical_strength += np.strength;
}

}  // namespace detail

/// Simplified solver for two colliding weak fronts (alpha below, beta
/// above). Physical waves pass through with their parameters; same-family
/// pairs merge; the closing error travels on a nonphysical front at
/// lambda_hat. Composition from alpha.left to beta.right is exact.
inline WaveFan solve_simplified_weak(const WaveDescriptor& alpha,
                                     const WaveDescriptor& beta,
                                     double lambda_hat, const GasModel& g) {
  WaveFan fan;
  const State& bottom = alpha.left;
  const State& top = beta.right;

  const bool alpha_np = alpha.family == WaveFamily::nonphysical;
  const bool beta_np = beta.family == WaveFamily::nonphysical;
  if (alpha_np && beta_np)
    throw structural_error("solve_simplified_weak: two nonphysical fronts");

  auto pass = [&](const State& from, const WaveDescriptor& w) -> State {
    if (std::abs(w.param) <= detail::kParamFloor) return from;
    const Crossing c = cross_up(from, w.family, w.param, g);
    WaveDescriptor out;
    out.family = w.family;
    out.param = w.param;
    out.strength = signed_strength(w.param, c);
    out.left = from;
    out.right = c.other;
    out.speed = c.slope;
    fan.waves.push_back(out);
    return c.other;
  };

  if (alpha_np) {
    // The physical wave crosses the nonphysical front unchanged.
    const State mid = pass(bottom, beta);
    detail::append_nonphysical(fan, mid, top, lambda_hat);
  } else if (beta_np) {
    const State mid = pass(bottom, alpha);
    detail::append_nonphysical(fan, mid, top, lambda_hat);
  } else if (alpha.family == beta.family &&
             is_genuinely_nonlinear(alpha.family)) {
    // Same-family collision: merge the parameters into one wave.
    const double tm = alpha.param + beta.param;
    State mid = bottom;
    if (std::abs(tm) > detail::kParamFloor) {
      const Crossing c = cross_up(bottom, alpha.family, tm, g);
      WaveDescriptor out;
      out.family = alpha.family;
      out.param = tm;
      out.strength = signed_strength(tm, c);
      out.left = bottom;
      out.right = c.other;
      out.speed = c.slope;
      fan.waves.push_back(out);
      mid = c.other;
    }
    detail::append_nonphysical(fan, mid, top, lambda_hat);
  } else {
    // Distinct families: they pass through each other; the smaller family
    // exits below.
    const WaveDescriptor& lower =
        family_index(alpha.family) <= family_index(beta.family) ? alpha : beta;
    const WaveDescriptor& upper =
        family_index(alpha.family) <= family_index(beta.family) ? beta : alpha;
    State mid = pass(bottom, lower);
    mid = pass(mid, upper);
    detail::append_nonphysical(fan, mid, top, lambda_hat);
  }
  detail::fill_middle_states(fan);
  return fan;
}

enum class StrongHitSide { below, above };

/// Simplified solver for a weak (or nonphysical) front meeting the strong
/// shock: the strong front keeps its slope Lambda and its speed-parameterized
/// strength (above state G(below', Lambda), which stays Rankine-Hugoniot
/// exact); the discrepancy rides out on a nonphysical front at lambda_hat.
inline WaveFan solve_simplified_strong(const WaveDescriptor& weak,
                                       const StrongShock& strong,
                                       StrongHitSide side, double lambda_hat,
                                       const GasModel& g) {
  WaveFan fan;
  fan.contains_strong = true;
  const double lambda = strong.sigma;
  if (!(lambda_hat > lambda))
    throw structural_error("solve_simplified_strong: lambda_hat <= Lambda");

  const State& bottom = side == StrongHitSide::below ? weak.left : strong.below;
  const State& top = side == StrongHitSide::below ? strong.above : weak.right;

  // From above, the pair (U_-, U_2) survives literally; from below the
  // above state is re-seated at the same speed, G(below', Lambda), which
  // keeps the front Rankine-Hugoniot exact.
  const State mid = side == StrongHitSide::above
                        ? strong.above
                        : strong_shock_from_speed(bottom, lambda, g);
  WaveDescriptor sd;
  sd.family = WaveFamily::f1;
  sd.strength = -hugoniot_arc(bottom, mid.rho, WaveFamily::f1, g);
  sd.param = bottom.rho - mid.rho;
  sd.left = bottom;
  sd.right = mid;
  sd.speed = lambda;
  fan.waves.push_back(sd);
  detail::append_nonphysical(fan, mid, top, lambda_hat);
  detail::fill_middle_states(fan);
  return fan;
}

}  // namespace wft
