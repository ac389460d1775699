#pragma once

/// @file functionals.hpp
/// @brief Bookkeeping functionals of the stability theory: weighted wave
///        strengths, the interaction potential Q with its four components,
///        the Glimm functional F, per-event monotonicity monitors, the
///        numerically probed interaction/reflection coefficients, and the
///        Lyapunov functional Phi between two coupled runs.
///
/// Everything here is pure measurement over immutable snapshots.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wft/boundary.hpp"
#include "wft/gasdyn.hpp"
#include "wft/riemann.hpp"
#include "wft/tracking.hpp"
#include "wft/waves.hpp"

namespace wft {

// ---------------------------------------------------------------------------
// Probed coefficients and calibrated constants.
// ---------------------------------------------------------------------------

/// Finite-difference estimates of the reflection/interaction coefficients at
/// the run background, plus the constants derived from them. The paper
/// asserts existence and bounds for these; the numbers are measured here.
struct CoefficientTable {
  double k_b4 = 0.0, k_b3 = 0.0, k_b2 = 0.0;  ///< boundary reflection
  double k_b0 = 0.0;                          ///< vertex emission
  double k_bs = 0.0;                          ///< vertex -> strong-shock speed
  std::array<double, 4> k_s{};                ///< from-above hit: sigma', d2, d3, d4
  std::array<std::array<double, 4>, 4> k_ij{};///< [output j][input i], from below
  double interaction_const = 0.0;             ///< M0: |gamma - alpha - beta| / |alpha beta|
  double g_lipschitz = 0.0;                   ///< |dG/dU| along the strong shock
  double lambda1_plus = 0.0, lambda4_plus = 0.0, sigma0 = 0.0;

  double ks4() const { return k_s[3]; }
  double ks4_margin() const { return 1.0 - std::abs(k_s[3]); }
  double max_kij(int j_lo = 1) const {  // over output families j_lo..4
    double m = 0.0;
    for (int j = j_lo - 1; j < 4; ++j)
      for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(k_ij[j][i]));
    return m;
  }
};

/// Frozen constants entering V, Q, F and Phi.
struct FunctionalConstants {
  double k_minus = 2.0;    ///< weak-wave weight in Omega-
  double c_star = 4.0;     ///< pair coefficient in Q_A
  double k_star = 0.8;     ///< strong-approach coefficient in Q_1
  double k_b0_tilde = 1.0; ///< wedge-turning coefficient in Q_w
  double kappa = 40.0;     ///< F = V + kappa Q + drift
  double np_slack = 100.0; ///< allowance scale for nonphysical transport
  // Lyapunov weights.
  std::array<double, 4> c_below{4.0, 4.0, 4.0, 4.0};
  std::array<double, 4> c_mixed{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> c_above{0.35, 0.5, 0.5, 0.5};
  double kappa1 = 20.0;
  double kappa2 = 20.0;
};

// ---------------------------------------------------------------------------
// Weighted strengths, potential, Glimm functional.
// ---------------------------------------------------------------------------

enum class Region { omega_minus, omega_plus };

/// Weighted strength b_alpha: k_minus alpha in Omega-, alpha in Omega+.
/// Strong fronts are rejected; they enter F through the drift terms.
inline double weighted_strength(const WaveDescriptor& w, Region region,
                                const FunctionalConstants& c) {
  if (w.family == WaveFamily::nonphysical)
    throw regime_error("weighted_strength: nonphysical fronts carry no b");
  return (region == Region::omega_minus ? c.k_minus : 1.0) * w.strength;
}

struct PotentialBreakdown {
  double q_approach = 0.0;  ///< C* sum over approaching pairs |b b'|
  double q_strong = 0.0;    ///< K* sum over waves approaching the strong shock
  double q_boundary = 0.0;  ///< sum over 4-waves in Omega+ (approaching wall)
  double q_wedge = 0.0;     ///< K~_b0 sum of remaining wedge turning
  double total() const {
    return q_approach + q_strong + q_boundary + q_wedge;
  }
};

namespace detail {

struct WeakWaveView {
  double y;
  int family;      // 1..4
  double b;        // weighted strength (signed)
  double strength; // raw signed arc strength
  bool is_shock;
  Region region;
};

/// Weak (physical, non-strong) fronts of a set with their regions.
inline std::vector<WeakWaveView> weak_waves(const FrontSet& fs) {
  std::vector<WeakWaveView> out;
  for (size_t i = 0; i < fs.fronts.size(); ++i) {
    const Front& f = fs.fronts[i];
    if (f.strong || f.nonphysical()) continue;
    WeakWaveView w;
    w.y = f.y_at(fs.x);
    w.family = family_index(f.d.family);
    w.region = fs.in_omega_minus(i) ? Region::omega_minus : Region::omega_plus;
    w.strength = f.d.strength;
    w.is_shock = f.d.is_shock();
    w.b = 0.0;  // filled by caller with constants
    out.push_back(w);
  }
  return out;
}

/// Definition-3.1 approaching predicate for a pair with `lo` below `up`.
/// Linearly degenerate same-family pairs are excluded: the definition's
/// "one of them is a shock" clause cannot apply and such fronts stay
/// parallel in the plane, so they never meet.
inline bool approaching(const WeakWaveView& lo, const WeakWaveView& up) {
  if (lo.region != up.region) return false;
  if (lo.family == up.family)
    return (lo.family == 1 || lo.family == 4) && (lo.is_shock || up.is_shock);
  return lo.family > up.family;
}

}  // namespace detail

/// Interaction potential Q(x) (Definition-3.2 structure).
inline PotentialBreakdown potential(const FrontSet& fs,
                                    const WedgeBoundary& boundary,
                                    const FunctionalConstants& c) {
  PotentialBreakdown q;
  std::vector<detail::WeakWaveView> waves = detail::weak_waves(fs);
  for (auto& w : waves)
    w.b = (w.region == Region::omega_minus ? c.k_minus : 1.0) * w.strength;

  for (size_t i = 0; i < waves.size(); ++i) {
    for (size_t k = i + 1; k < waves.size(); ++k)
      if (detail::approaching(waves[i], waves[k]))
        q.q_approach += c.c_star * std::abs(waves[i].b * waves[k].b);
    const bool approaches_strong =
        fs.strong_index >= 0 &&
        (waves[i].region == Region::omega_minus || waves[i].family == 1);
    if (approaches_strong) q.q_strong += c.k_star * std::abs(waves[i].b);
    if (waves[i].region == Region::omega_plus && waves[i].family == 4)
      q.q_boundary += std::abs(waves[i].b);
  }
  q.q_wedge = c.k_b0_tilde * boundary.remaining_turning(fs.x);
  return q;
}

struct GlimmReport {
  double v = 0.0;  ///< total weighted strength of weak waves
  PotentialBreakdown q;
  double drift = 0.0;  ///< |U*(x) - U0+| + |U_*(x) - U0-|
  double f = 0.0;      ///< V + kappa Q + drift
  State u_star;        ///< above state of the strong shock
  State u_lower_star;  ///< below state of the strong shock
};

/// The Glimm-type functional (Definition-3.3 structure). The background
/// states are the strong-shock side states at x = 0.
inline GlimmReport glimm(const FrontSet& fs, const WedgeBoundary& boundary,
                         const FunctionalConstants& c, const State& u0_minus,
                         const State& u0_plus) {
  GlimmReport r;
  r.q = potential(fs, boundary, c);
  for (const auto& w : detail::weak_waves(fs))
    r.v += std::abs((w.region == Region::omega_minus ? c.k_minus : 1.0) *
                    w.strength);
  if (fs.strong_index >= 0) {
    const Front& s = fs.fronts[fs.strong_index];
    r.u_star = s.d.right;
    r.u_lower_star = s.d.left;
    r.drift =
        state_dist(r.u_star, u0_plus) + state_dist(r.u_lower_star, u0_minus);
  } else {
    r.u_star = u0_plus;
    r.u_lower_star = u0_minus;
  }
  r.f = r.v + c.kappa * r.q.total() + r.drift;
  return r;
}

// ---------------------------------------------------------------------------
// Per-event monitor.
// ---------------------------------------------------------------------------

struct MonitorVerdict {
  double delta_f = 0.0;
  double delta_q = 0.0;
  double measure = 0.0;      ///< |b_a b_b|, |b_a|, or |omega_k| per Eq.-(3.5) kind
  double ratio = 0.0;        ///< -delta_q / measure when measure > 0
  bool covered = false;      ///< event falls under the three decrease cases
  bool pass = true;
  std::string note;
};

/// Compare the functionals across one event. Physical events must not
/// increase F and must decrease Q by a definite multiple of the event
/// measure; nonphysical transport gets an O(strength) allowance and is
/// excluded from the fitted-decrease bookkeeping.
inline MonitorVerdict monitor_event(const GlimmReport& before,
                                    const GlimmReport& after,
                                    const StepOutcome& out,
                                    const FunctionalConstants& c,
                                    double b_weight_lower,
                                    double b_weight_upper) {
  MonitorVerdict v;
  v.delta_f = after.f - before.f;
  v.delta_q = after.q.total() - before.q.total();
  const double ftol = 1e-10 * (1.0 + std::abs(before.f));

  if (out.np_involved) {
    const double np_measure = std::max(out.np_in, out.np_out);
    v.measure = np_measure;
    v.pass = v.delta_f <= c.np_slack * np_measure + ftol;
    v.note = "np-transport";
    return v;
  }

  switch (out.ev.kind) {
    case EventKind::weak_weak: {
      const double ba = out.waves_in.size() > 0
                            ? std::abs(out.waves_in[0].second) * b_weight_lower
                            : 0.0;
      const double bb = out.waves_in.size() > 1
                            ? std::abs(out.waves_in[1].second) * b_weight_upper
                            : 0.0;
      v.measure = ba * bb;
      break;
    }
    case EventKind::weak_strong:
    case EventKind::front_boundary: {
      double b = 0.0;
      for (size_t i = 0; i < out.waves_in.size(); ++i) {
        const double w = i == 0 ? b_weight_lower : b_weight_upper;
        if (std::abs(out.waves_in[i].second) * w > b)
          b = std::abs(out.waves_in[i].second) * w;
      }
      // For weak-strong events the strong front itself is not the measure.
      v.measure = b;
      break;
    }
    case EventKind::boundary_vertex:
      v.measure = std::abs(out.omega_k);
      break;
  }
  v.covered = true;
  if (v.measure < 1e-14) {
    // Degenerate (omega = 0 vertex, vanishing strengths): nothing may move.
    v.pass = std::abs(v.delta_f) <= ftol && std::abs(v.delta_q) <= ftol;
    v.note = "degenerate";
    return v;
  }
  v.ratio = -v.delta_q / v.measure;
  v.pass = v.delta_f <= ftol && v.delta_q <= ftol;
  if (!v.pass) v.note = "increase";
  return v;
}

// ---------------------------------------------------------------------------
// Coefficient probes.
// ---------------------------------------------------------------------------

namespace detail {

inline double signed_strength_of(const WaveFan& fan, WaveFamily fam) {
  double s = 0.0;
  for (const auto& w : fan.waves)
    if (w.family == fam) s += w.strength;
  return s;
}

}  // namespace detail

/// Finite-difference probes of the Lemma coefficients at the background
/// (U-, U+, sigma0). Throws structural_error if |K_s4| >= 1 (outside the
/// stable regime).
inline CoefficientTable probe_coefficients(const State& u_minus,
                                           const State& u_plus, double sigma0,
                                           const GasModel& g) {
  CoefficientTable t;
  t.sigma0 = sigma0;
  const Vec4 lam_plus = eigenvalues(u_plus, g);
  t.lambda1_plus = lam_plus[0];
  t.lambda4_plus = lam_plus[3];
  const double h = 1e-5;
  const std::array<double, 2> wall_normal{0.0, 1.0};

  // Boundary reflection coefficients at the background wall state U+.
  auto reflect = [&](WaveFamily fam, double tt) {
    const Crossing down = cross_down(u_plus, fam, tt, g);
    const WaveFan fan =
        solve_boundary_reflection(down.other, u_plus, wall_normal, g);
    const double a_in = tt >= 0.0 ? down.arc : -down.arc;
    return std::pair<double, double>(a_in,
                                     detail::signed_strength_of(fan, WaveFamily::f1));
  };
  auto central = [&](WaveFamily fam) {
    const auto [ap, dp] = reflect(fam, h);
    const auto [am, dm] = reflect(fam, -h);
    return (dp - dm) / (ap - am);
  };
  t.k_b4 = central(WaveFamily::f4);
  t.k_b3 = central(WaveFamily::f3);
  t.k_b2 = central(WaveFamily::f2);

  // Vertex emission coefficient K_b0 at the background.
  auto vertex_d1 = [&](double w) {
    const std::array<double, 2> n{-std::sin(w), std::cos(w)};
    const WaveFan fan = solve_boundary_vertex({u_plus, w, n}, g);
    return detail::signed_strength_of(fan, WaveFamily::f1);
  };
  t.k_b0 = (vertex_d1(h) - vertex_d1(-h)) / (2.0 * h);

  // Vertex -> strong shock speed coefficient K_bs: re-solve the attached
  // shock from U- against a turned wall.
  auto sigma_for_face = [&](double w) {
    const std::array<double, 2> n{-std::sin(w), std::cos(w)};
    const WaveFan fan =
        solve_boundary_vertex({u_minus, w - flow_angle(u_minus), n}, g);
    for (const auto& wd : fan.waves)
      if (wd.is_shock()) return wd.speed;
    throw structural_error("probe: attached shock lost while probing K_bs");
  };
  t.k_bs = (sigma_for_face(h) - sigma_for_face(-h)) / (2.0 * h);

  // From-above interaction: {U+, U_a} = (beta1, 0, 0, 0).
  auto strong_above = [&](double tt) {
    const Crossing up = cross_up(u_plus, WaveFamily::f1, tt, g);
    const double a_in = tt >= 0.0 ? up.arc : -up.arc;
    const WaveFan fan = solve_strong(u_minus, up.other, g, sigma0);
    std::array<double, 4> resp{fan.waves[0].speed,
                               detail::signed_strength_of(fan, WaveFamily::f2),
                               detail::signed_strength_of(fan, WaveFamily::f3),
                               detail::signed_strength_of(fan, WaveFamily::f4)};
    return std::pair<double, std::array<double, 4>>(a_in, resp);
  };
  {
    const auto [ap, rp] = strong_above(h);
    const auto [am, rm] = strong_above(-h);
    for (int j = 0; j < 4; ++j) t.k_s[j] = (rp[j] - rm[j]) / (ap - am);
  }
  if (std::abs(t.k_s[3]) >= 1.0)
    throw structural_error(
        "probe_coefficients: |K_s4| >= 1, background outside the stable regime");

  // From-below interaction: {U_b, U-} = alpha_i e_i.
  for (int i = 0; i < 4; ++i) {
    const WaveFamily fam = static_cast<WaveFamily>(i + 1);
    auto strong_below = [&](double tt) {
      const Crossing down = cross_down(u_minus, fam, tt, g);
      const double a_in = tt >= 0.0 ? down.arc : -down.arc;
      const WaveFan fan = solve_strong(down.other, u_plus, g, sigma0);
      std::array<double, 4> resp{fan.waves[0].speed,
                                 detail::signed_strength_of(fan, WaveFamily::f2),
                                 detail::signed_strength_of(fan, WaveFamily::f3),
                                 detail::signed_strength_of(fan, WaveFamily::f4)};
      return std::pair<double, std::array<double, 4>>(a_in, resp);
    };
    const auto [ap, rp] = strong_below(h);
    const auto [am, rm] = strong_below(-h);
    for (int j = 0; j < 4; ++j) t.k_ij[j][i] = (rp[j] - rm[j]) / (ap - am);
  }

  // Interaction constant M0 from weak pair collisions at U+:
  // gamma_i = alpha_i + beta_i + O(1) |alpha beta|.
  {
    double m0 = 0.0;
    const double hh = 2e-3;
    const std::array<std::pair<WaveFamily, WaveFamily>, 4> pairs{
        {{WaveFamily::f4, WaveFamily::f1},
         {WaveFamily::f4, WaveFamily::f2},
         {WaveFamily::f3, WaveFamily::f1},
         {WaveFamily::f4, WaveFamily::f4}}};
    for (auto [fa, fb] : pairs) {
      for (double sa : {hh, -hh}) {
        for (double sb : {hh, -hh}) {
          if (fa == fb && (sa > 0.0 || sb > 0.0)) continue;  // shocks collide
          const Crossing ca = cross_up(u_plus, fa, sa, g);
          const Crossing cb = cross_up(ca.other, fb, sb, g);
          const WaveFan fan = solve_accurate(u_plus, cb.other, g, 1e308);
          double growth = 0.0;
          std::array<double, 4> sums{};
          for (const auto& w : fan.waves)
            sums[family_index(w.family) - 1] += w.strength;
          const double in_a = sa >= 0 ? ca.arc : -ca.arc;
          const double in_b = sb >= 0 ? cb.arc : -cb.arc;
          std::array<double, 4> in_sums{};
          in_sums[family_index(fa) - 1] += in_a;
          in_sums[family_index(fb) - 1] += in_b;
          for (int j = 0; j < 4; ++j)
            growth += std::abs(sums[j] - in_sums[j]);
          m0 = std::max(m0, growth / std::abs(in_a * in_b));
        }
      }
    }
    t.interaction_const = m0;
  }

  // Lipschitz response of the strong-shock map G to its below state.
  {
    double gl = 0.0;
    for (int k = 0; k < 4; ++k) {
      Vec4 q = u_minus.as_vec();
      q[k] += h;
      const State pert = State::from_vec(q);
      gl = std::max(gl, state_dist(strong_shock_from_speed(pert, sigma0, g),
                                   u_plus) /
                            h);
    }
    t.g_lipschitz = gl;
  }
  return t;
}

/// Deterministic constant selection from the probed table (the "to be
/// determined later" constants of the stability argument). v_bar is an a
/// priori bound on the weighted strength V(x) for the intended runs.
inline FunctionalConstants choose_constants(const CoefficientTable& t,
                                            double v_bar) {
  FunctionalConstants c;
  const double max_k = t.max_kij(2);
  c.k_minus = std::max(1.0, 2.0 * max_k);
  const double m0 = std::max(1.0, t.interaction_const);
  c.c_star = 2.0 * (m0 + 1.0);
  c.k_star = std::clamp(std::max(0.75, 0.5 * (1.0 + std::abs(t.ks4()))),
                        0.0, std::min(0.98, 0.95 / std::max(t.k_b4, 1.0)));
  if (!(c.k_star > std::abs(t.ks4())))
    throw structural_error("choose_constants: no admissible K* in (K_s4, 1)");
  c.k_b0_tilde = 2.0 * std::abs(t.k_b0) + 0.5;

  // kappa: clear each decrease case with the measured constants.
  const double denom1 = c.c_star * (1.0 - v_bar) - m0;
  const double denom2 =
      1.0 - c.k_star * t.k_b4 - c.c_star * t.k_b4 * v_bar;
  const double denom3 = c.k_b0_tilde - c.k_star * std::abs(t.k_b0) -
                        c.c_star * std::abs(t.k_b0) * v_bar;
  double sum_k = 0.0, max_k4 = 0.0, max_k1 = 0.0;
  for (int i = 0; i < 4; ++i) {
    double col = 0.0;
    for (int j = 1; j < 4; ++j) col += std::abs(t.k_ij[j][i]);
    sum_k = std::max(sum_k, col);
    max_k4 = std::max(max_k4, std::abs(t.k_ij[3][i]));
    max_k1 = std::max(max_k1, std::abs(t.k_ij[0][i]));
  }
  const double denom45 = c.k_star * c.k_minus - max_k4 -
                         c.c_star * sum_k * v_bar;
  if (denom1 <= 0.0 || denom2 <= 0.02 || denom3 <= 0.0 || denom45 <= 0.0)
    throw structural_error(
        "choose_constants: V bound too large for a decreasing functional");
  double kappa = 5.0;
  kappa = std::max(kappa, (m0 + 1.0) / denom1);
  kappa = std::max(kappa, std::max(0.0, t.k_b4 - 1.0 + 0.1) / denom2);
  kappa = std::max(kappa, (std::abs(t.k_b0) + 0.1) / denom3);
  kappa = std::max(kappa, (sum_k + 2.0 * max_k1 * (1.0 + std::abs(t.sigma0)) +
                           2.0 * t.g_lipschitz + 2.0) /
                              denom45);
  c.kappa = 2.0 * kappa;

  c.np_slack =
      4.0 * (1.0 + c.kappa * (c.k_star + c.c_star * v_bar)) *
      std::max({1.0, std::abs(t.k_b0), t.k_b4, t.g_lipschitz});

  // Lyapunov weights: c_1^a / c_4^a < 1 and
  // (c_4^a / c_1^a) |K_s4| |lambda_4+ - sigma| / |lambda_1+ - sigma| < 1.
  const double ratio_lambda = std::abs(t.lambda4_plus - t.sigma0) /
                              std::abs(t.lambda1_plus - t.sigma0);
  const double r = std::abs(t.ks4()) * ratio_lambda;
  if (r >= 1.0)
    throw structural_error(
        "choose_constants: key estimate fails, K_s4 ratio >= 1");
  const double grow = std::sqrt(1.0 / std::max(r, 0.25));  // c4a / c1a
  c.c_above = {0.5 / grow, 0.5, 0.5, 0.5};
  c.c_mixed = {1.0, 1.0, 1.0, 1.0};
  c.c_below = {4.0, 4.0, 4.0, 4.0};
  c.kappa1 = c.kappa;
  c.kappa2 = c.kappa;
  return c;
}

// ---------------------------------------------------------------------------
// L1 distance and the Lyapunov functional.
// ---------------------------------------------------------------------------

namespace detail {

struct Overlay {
  std::vector<double> edges;  ///< cell boundaries, ascending, within domain
  std::vector<State> u, v;    ///< cell states per solution
};

inline std::vector<double> front_positions(const FrontSet& fs) {
  std::vector<double> ys;
  for (const auto& f : fs.fronts) ys.push_back(f.y_at(fs.x));
  return ys;
}

inline Overlay build_overlay(const FrontSet& ufs, const FrontSet& vfs,
                             const WedgeBoundary& boundary, double y_min) {
  Overlay o;
  const double top = boundary.y_at(ufs.x);
  std::vector<double> edges{y_min, top};
  for (double y : front_positions(ufs))
    if (y > y_min && y < top) edges.push_back(y);
  for (double y : front_positions(vfs))
    if (y > y_min && y < top) edges.push_back(y);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  o.edges = edges;

  auto states_at = [&](const FrontSet& fs, std::vector<State>& out) {
    const std::vector<double> ys = front_positions(fs);
    for (size_t c = 0; c + 1 < o.edges.size(); ++c) {
      const double ym = 0.5 * (o.edges[c] + o.edges[c + 1]);
      size_t i = 0;
      while (i < ys.size() && ys[i] <= ym) ++i;
      out.push_back(fs.regions[i]);
    }
  };
  states_at(ufs, o.u);
  states_at(vfs, o.v);
  return o;
}

}  // namespace detail

/// Exact L1 distance between two piecewise-constant solutions at the same
/// station, integrated over [y_min, g(x)].
inline double l1_distance(const FrontSet& ufs, const FrontSet& vfs,
                          const WedgeBoundary& boundary, double y_min) {
  if (ufs.x != vfs.x)
    throw regime_error("l1_distance: stations differ");
  const detail::Overlay o = detail::build_overlay(ufs, vfs, boundary, y_min);
  double acc = 0.0;
  for (size_t c = 0; c + 1 < o.edges.size(); ++c)
    acc += state_dist(o.u[c], o.v[c]) * (o.edges[c + 1] - o.edges[c]);
  return acc;
}

struct LyapunovReport {
  double phi = 0.0;
  double l1 = 0.0;
  bool partial = false;       ///< some cell connections failed
  int failed_cells = 0;
  // Wall-cell diagnostics for the near-boundary estimate.
  std::array<double, 4> wall_p{};  ///< Hugoniot strengths p_i(b)
  double wall_lambda23 = 0.0;      ///< contact speed of the wall connection
  double wall_ydot = 0.0;          ///< boundary slope at x
  bool wall_valid = false;
};

/// The Lyapunov functional Phi(U, V) between two coupled runs at the same
/// station: at each y the two states are joined along Hugoniot curves
/// S1, C2, C3, S4 (direction per the region rule), the strengths are
/// weighted by region and by the approaching-wave weights W_i, and the
/// result is integrated in y.
inline LyapunovReport lyapunov(const FrontSet& ufs, const FrontSet& vfs,
                               const WedgeBoundary& boundary,
                               const FunctionalConstants& c, double y_min,
                               const State& u0_minus, const State& u0_plus,
                               const GasModel& gas) {
  if (ufs.x != vfs.x)
    throw regime_error("lyapunov: stations differ");
  LyapunovReport rep;
  const detail::Overlay o = detail::build_overlay(ufs, vfs, boundary, y_min);
  rep.l1 = 0.0;

  const double y_strong_u =
      ufs.strong_index >= 0
          ? ufs.fronts[ufs.strong_index].y_at(ufs.x)
          : -std::numeric_limits<double>::infinity();
  const double y_strong_v =
      vfs.strong_index >= 0
          ? vfs.fronts[vfs.strong_index].y_at(vfs.x)
          : -std::numeric_limits<double>::infinity();

  // Strong-shock strength entering the D_i table: average of the two runs'
  // 1-wave strengths across their strong fronts.
  double big_b = 0.0;
  int nb = 0;
  if (ufs.strong_index >= 0) {
    big_b += std::abs(ufs.fronts[ufs.strong_index].d.strength);
    ++nb;
  }
  if (vfs.strong_index >= 0) {
    big_b += std::abs(vfs.fronts[vfs.strong_index].d.strength);
    ++nb;
  }
  if (nb) big_b /= nb;

  // Weak waves of both solutions for the A_i sums.
  struct JWave {
    double y;
    int family;
    double a;     // |strength|
    bool from_u;
    bool below_own_strong;
  };
  std::vector<JWave> jset;
  auto collect = [&](const FrontSet& fs, bool from_u, double y_strong) {
    for (size_t i = 0; i < fs.fronts.size(); ++i) {
      const Front& f = fs.fronts[i];
      if (f.strong || f.nonphysical()) continue;
      JWave w;
      w.y = f.y_at(fs.x);
      w.family = family_index(f.d.family);
      w.a = std::abs(f.d.strength);
      w.from_u = from_u;
      w.below_own_strong = w.y < y_strong;
      jset.push_back(w);
    }
  };
  collect(ufs, true, y_strong_u);
  collect(vfs, false, y_strong_v);

  const double q_sum =
      potential(ufs, boundary, c).total() + potential(vfs, boundary, c).total();
  const double t1_background = u0_minus.rho - u0_plus.rho;

  for (size_t cell = 0; cell + 1 < o.edges.size(); ++cell) {
    const double ym = 0.5 * (o.edges[cell] + o.edges[cell + 1]);
    const double dy = o.edges[cell + 1] - o.edges[cell];
    const State& su = o.u[cell];
    const State& sv = o.v[cell];
    rep.l1 += state_dist(su, sv) * dy;

    const bool u_minus_side = ym < y_strong_u;
    const bool v_minus_side = ym < y_strong_v;
    // Direction rule: start from U unless V is in Omega- while U is in
    // Omega+.
    const bool start_from_v = !u_minus_side && v_minus_side;
    const State& from = start_from_v ? sv : su;
    const State& to = start_from_v ? su : sv;

    std::array<double, 4> p{};
    bool ok = true;
    if (state_dist(from, to) > 0.0) {
      const double scale =
          std::max({1.0, std::abs(to.u), std::abs(to.v), to.p, to.rho});
      auto residual = [&](const std::array<double, 4>& tt) {
        const detail::Walk w = detail::walk_up(from, tt, gas, true);
        const Vec4 end = w.states[4].as_vec();
        const Vec4 target = to.as_vec();
        return std::array<double, 4>{end[0] - target[0], end[1] - target[1],
                                     end[2] - target[2], end[3] - target[3]};
      };
      std::array<double, 4> t0{0.0, 0.0, 0.0, 0.0};
      if (u_minus_side != v_minus_side) t0[0] = t1_background;
      try {
        const std::array<double, 4> sol = detail::newton_solve<4>(
            residual, t0, detail::kNewtonTol * scale * 10.0,
            "lyapunov-connection");
        const detail::Walk w = detail::walk_up(from, sol, gas, true);
        for (int j = 0; j < 4; ++j)
          p[j] = signed_strength(sol[j], w.crossings[j]);
        if (cell + 2 == o.edges.size()) {
          rep.wall_p = p;
          rep.wall_lambda23 = w.states[1].v / w.states[1].u;
          rep.wall_ydot = std::tan(
              boundary.face_angle(boundary.face_index(ufs.x)));
          rep.wall_valid = true;
        }
      } catch (const error&) {
        ok = false;
        rep.partial = true;
        ++rep.failed_cells;
      }
    } else if (cell + 2 == o.edges.size()) {
      rep.wall_p = {0.0, 0.0, 0.0, 0.0};
      rep.wall_lambda23 = from.v / from.u;
      rep.wall_ydot =
          std::tan(boundary.face_angle(boundary.face_index(ufs.x)));
      rep.wall_valid = true;
    }
    if (!ok) continue;

    const bool same_domain = u_minus_side == v_minus_side;
    for (int i = 0; i < 4; ++i) {
      const double ci = same_domain
                            ? (u_minus_side ? c.c_below[i] : c.c_above[i])
                            : c.c_mixed[i];
      const double qi = ci * p[i];
      if (qi == 0.0) continue;

      // B_i: waves approaching position y from either side.
      double bi = 0.0;
      for (const auto& w : jset) {
        if ((w.y < ym && w.family > i + 1) || (w.y > ym && w.family < i + 1))
          bi += w.a;
      }
      // D_i from the region-combination table.
      double di = 0.0;
      if (i == 0)
        di = same_domain ? big_b : 0.0;
      else if (i == 1 || i == 2)
        di = (u_minus_side && v_minus_side) || !same_domain ? big_b : 0.0;
      else
        di = big_b;
      double ai = bi + di;
      if (same_domain) {
        // C_i: same-family one-sided sums by the sign of q_i.
        double ciy = 0.0;
        for (const auto& w : jset) {
          if (w.family != i + 1) continue;
          const bool below = w.y < ym;
          if (qi < 0.0) {
            if ((below && w.from_u) || (!below && !w.from_u)) ciy += w.a;
          } else {
            if ((below && !w.from_u) || (!below && w.from_u)) ciy += w.a;
          }
        }
        ai += ciy;
      } else if (i == 0) {
        // F_1 for the large 1-connection.
        double fi = 0.0;
        for (const auto& w : jset) {
          if (w.family != 1) continue;
          if ((w.y < ym && w.below_own_strong) ||
              (w.y > ym && !w.below_own_strong))
            fi += w.a;
        }
        ai += fi;
      }
      const double wi = 1.0 + c.kappa1 * ai + c.kappa2 * q_sum;
      rep.phi += std::abs(qi) * wi * dy;
    }
  }
  return rep;
}

}  // namespace wft
