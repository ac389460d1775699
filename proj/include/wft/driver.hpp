#pragma once

/// @file driver.hpp
/// @brief Run orchestration: drives the Engine event by event, records the
///        functional reports and monitor verdicts, reconstructs front sets
///        at arbitrary stations from the segment history, and couples two
///        runs through the Lyapunov functional.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wft/functionals.hpp"
#include "wft/tracking.hpp"

namespace wft {

/// One functionals.csv row, recorded right after each event.
struct FunctionalRow {
  std::uint64_t ordinal = 0;
  double x = 0.0;
  double v = 0.0;
  double q_approach = 0.0, q_strong = 0.0, q_boundary = 0.0, q_wedge = 0.0;
  double q = 0.0;
  double f = 0.0;
  double drift = 0.0;
  double delta_f = 0.0, delta_q = 0.0;
  double measure = 0.0, ratio = 0.0;
  bool covered = false, pass = true;
  double np_total = 0.0;  ///< total live nonphysical strength
  std::string note;
};

struct RunHistory {
  RunConfig cfg;
  FunctionalConstants consts;
  std::optional<CoefficientTable> coeffs;
  double sigma0 = 0.0;
  double lambda_hat = 0.0;
  State u_minus0, u_plus0;
  State inflow_bottom;

  std::vector<Engine::Segment> segments;
  std::vector<StepOutcome> outcomes;
  std::vector<FunctionalRow> functionals;
  GlimmReport initial_report;

  double x_end = 0.0;
  std::uint64_t events = 0;
  bool monitor_clean = true;
  double np_total_final = 0.0;
  double np_total_max = 0.0;
  std::string failure;  ///< empty on success

  bool failed() const { return !failure.empty(); }
};

/// A priori bound on the weighted strength V(x) for constant selection.
inline double v_bar_estimate(const RunConfig& cfg, const CoefficientTable& t) {
  const double k_minus = std::max(1.0, 2.0 * t.max_kij(2));
  const double tvu = cfg.inflow_tv();
  const double tvg = cfg.boundary.turning_variation();
  // Initial arcs track the table jumps within a modest factor.
  return std::min(0.35, 2.0 * (k_minus * tvu + (2.0 * std::abs(t.k_b0) + 0.5) * tvg) + 0.01);
}

/// Run the front tracking to x_max (or failure), recording everything.
/// If `frozen` is provided it is used as-is; otherwise the constants are
/// probed and chosen at the run background.
inline RunHistory run(const RunConfig& cfg,
                      const FunctionalConstants* frozen = nullptr) {
  RunHistory h;
  h.cfg = cfg;
  Engine eng(cfg);
  h.sigma0 = eng.sigma0();
  h.lambda_hat = eng.lambda_hat();
  h.u_minus0 = eng.background_minus();
  h.u_plus0 = eng.background_plus();
  h.inflow_bottom = cfg.inflow.front().state;

  if (frozen) {
    h.consts = *frozen;
  } else if (eng.state().strong_index >= 0) {
    h.coeffs = probe_coefficients(h.u_minus0, h.u_plus0, h.sigma0, cfg.gas);
    h.consts = choose_constants(*h.coeffs, v_bar_estimate(cfg, *h.coeffs));
  } else {
    h.consts = FunctionalConstants{};  // degenerate flat-wedge runs
  }

  GlimmReport before = glimm(eng.state(), cfg.boundary, h.consts, h.u_minus0,
                             h.u_plus0);
  h.initial_report = before;

  try {
    while (auto ev = eng.next_event()) {
      // Weighted-strength factors of the two participants, by region.
      double w_lo = 1.0, w_up = 1.0;
      if (ev->kind == EventKind::weak_weak ||
          ev->kind == EventKind::weak_strong) {
        w_lo = eng.state().in_omega_minus(ev->pos) ? h.consts.k_minus : 1.0;
        w_up = eng.state().in_omega_minus(ev->pos + 1) ? h.consts.k_minus : 1.0;
      } else if (ev->kind == EventKind::front_boundary) {
        w_lo = w_up =
            eng.state().in_omega_minus(ev->pos) ? h.consts.k_minus : 1.0;
      }

      const StepOutcome out = eng.step(*ev);
      const GlimmReport after =
          glimm(eng.state(), cfg.boundary, h.consts, h.u_minus0, h.u_plus0);
      const MonitorVerdict verdict =
          monitor_event(before, after, out, h.consts, w_lo, w_up);

      FunctionalRow row;
      row.ordinal = eng.events_processed();
      row.x = ev->x;
      row.v = after.v;
      row.q_approach = after.q.q_approach;
      row.q_strong = after.q.q_strong;
      row.q_boundary = after.q.q_boundary;
      row.q_wedge = after.q.q_wedge;
      row.q = after.q.total();
      row.f = after.f;
      row.drift = after.drift;
      row.delta_f = verdict.delta_f;
      row.delta_q = verdict.delta_q;
      row.measure = verdict.measure;
      row.ratio = verdict.ratio;
      row.covered = verdict.covered;
      row.pass = verdict.pass;
      row.note = verdict.note;
      row.np_total = eng.total_nonphysical();
      h.functionals.push_back(row);
      h.outcomes.push_back(out);
      h.np_total_max = std::max(h.np_total_max, row.np_total);
      if (!verdict.pass) h.monitor_clean = false;
      before = after;
    }
    h.x_end = cfg.x_max;
  } catch (const error& e) {
    h.failure = e.what();
    h.x_end = eng.state().x;
  }

  eng.close_history(h.x_end);
  h.segments = eng.segments();
  h.events = eng.events_processed();
  h.np_total_final = eng.total_nonphysical();
  return h;
}

/// Rebuild the piecewise-constant front set at station x from the segment
/// history. Fronts are ordered by (y, slope); region states come from the
/// stored segment side states.
inline FrontSet reconstruct(const RunHistory& h, double x) {
  FrontSet fs;
  fs.x = x;
  struct Live {
    const Engine::Segment* s;
    double y;
  };
  std::vector<Live> live;
  for (const auto& s : h.segments) {
    if (x < s.x0 || (x >= s.x1 && !(x == s.x1 && x == h.x_end))) continue;
    live.push_back({&s, s.y0 + s.slope * (x - s.x0)});
  }
  std::sort(live.begin(), live.end(), [](const Live& a, const Live& b) {
    if (a.y != b.y) return a.y < b.y;
    if (a.s->slope != b.s->slope) return a.s->slope < b.s->slope;
    return a.s->front_id < b.s->front_id;
  });
  fs.regions.push_back(live.empty() ? h.inflow_bottom : live.front().s->left);
  for (size_t i = 0; i < live.size(); ++i) {
    Front f;
    f.id = live[i].s->front_id;
    f.d.family = live[i].s->family;
    f.d.strength = live[i].s->strength;
    f.d.left = live[i].s->left;
    f.d.right = live[i].s->right;
    f.d.speed = live[i].s->speed;
    f.slope = live[i].s->slope;
    f.x0 = live[i].s->x0;
    f.y0 = live[i].s->y0;
    f.strong = live[i].s->strong;
    if (f.strong) fs.strong_index = int(i);
    fs.fronts.push_back(f);
    fs.regions.push_back(live[i].s->right);
  }
  fs.face = h.cfg.boundary.face_index(x);
  return fs;
}

// ---------------------------------------------------------------------------
// Coupled runs.
// ---------------------------------------------------------------------------

struct CoupledRow {
  double x = 0.0;
  double phi = 0.0;
  double l1 = 0.0;
  bool partial = false;
  std::array<double, 4> wall_p{};
  double wall_lambda23 = 0.0;
  double wall_ydot = 0.0;
  bool wall_valid = false;
};

struct CoupledReport {
  RunHistory u, v;
  std::vector<CoupledRow> rows;
  double y_min0 = 0.0;
};

/// Run both configurations and evaluate Phi and the L1 distance on a grid
/// of stations. The two configs must share gas, boundary and the base
/// inflow state below the tables (so the initial L1 difference is finite).
inline CoupledReport couple(const RunConfig& cfg_u, const RunConfig& cfg_v,
                            std::size_t stations = 64,
                            const FunctionalConstants* frozen = nullptr) {
  if (state_dist(cfg_u.inflow.front().state, cfg_v.inflow.front().state) != 0.0)
    throw regime_error("couple: base inflow states must coincide");
  CoupledReport rep;
  rep.u = run(cfg_u, frozen);
  // Reuse the U-run constants so both runs are measured with one yardstick.
  rep.v = run(cfg_v, &rep.u.consts);

  double y_lo = 0.0;
  for (const auto& r : cfg_u.inflow) y_lo = std::min(y_lo, r.y);
  for (const auto& r : cfg_v.inflow) y_lo = std::min(y_lo, r.y);
  rep.y_min0 = y_lo;

  const double x_hi = std::min(rep.u.x_end, rep.v.x_end);
  for (std::size_t j = 0; j <= stations; ++j) {
    const double x = x_hi * (j + 0.5) / (stations + 1);
    const FrontSet fu = reconstruct(rep.u, x);
    const FrontSet fv = reconstruct(rep.v, x);
    const double y_min =
        rep.y_min0 - rep.u.lambda_hat * x - 0.01 * (1.0 + x);
    const LyapunovReport ly =
        lyapunov(fu, fv, cfg_u.boundary, rep.u.consts, y_min, rep.u.u_minus0,
                 rep.u.u_plus0, cfg_u.gas);
    CoupledRow row;
    row.x = x;
    row.phi = ly.phi;
    row.l1 = ly.l1;
    row.partial = ly.partial;
    row.wall_p = ly.wall_p;
    row.wall_lambda23 = ly.wall_lambda23;
    row.wall_ydot = ly.wall_ydot;
    row.wall_valid = ly.wall_valid;
    rep.rows.push_back(row);
  }
  return rep;
}

/// L1 distance between two runs' solutions at a station (used by the
/// convergence study; the runs may use different eps).
inline double run_distance(const RunHistory& a, const RunHistory& b,
                           double x) {
  const FrontSet fa = reconstruct(a, x);
  const FrontSet fb = reconstruct(b, x);
  double y_lo = 0.0;
  for (const auto& r : a.cfg.inflow) y_lo = std::min(y_lo, r.y);
  for (const auto& r : b.cfg.inflow) y_lo = std::min(y_lo, r.y);
  const double y_min = y_lo - a.lambda_hat * x - 0.01 * (1.0 + x);
  return l1_distance(fa, fb, a.cfg.boundary, y_min);
}

}  // namespace wft
