#pragma once

/// @file tracking.hpp
/// @brief The front-tracking engine: initial discretization, collision
///        detection in increasing x, collision dispatch between the
///        accurate and simplified solvers, and solution sampling.
///
/// A run is strictly sequential (event order is causal); distinct runs are
/// independent. Determinism: with a fixed seed the whole event log is
/// reproducible bit for bit. Tie-breaking perturbs the slopes of genuinely
/// nonlinear fronts by at most 1e-12, drawn from (seed, front id); contact
/// fronts keep their exact common slope (coincident vortex sheets must stay
/// parallel) and nonphysical fronts travel at exactly lambda_hat.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wft/boundary.hpp"
#include "wft/gasdyn.hpp"
#include "wft/riemann.hpp"
#include "wft/waves.hpp"

namespace wft {

// ---------------------------------------------------------------------------
// Run configuration.
// ---------------------------------------------------------------------------

/// One inflow table row: `state` holds on [y, next row's y); the first row
/// extends to y -> -infinity. All y must be < 0 (the wedge vertex sits at 0).
struct InflowRow {
  double y;
  State state;
};

struct RunConfig {
  GasModel gas;
  std::vector<InflowRow> inflow;  ///< ascending y, piecewise-constant profile
  WedgeBoundary boundary;

  double eps = 1e-2;        ///< master accuracy parameter
  double mu_eps = -1.0;     ///< simplified-solver threshold; < 0 -> eps^2
  double delta_eps = -1.0;  ///< max rarefaction piece strength; < 0 -> eps
  double lambda_hat = -1.0; ///< nonphysical speed; < 0 -> 1.2 max |lambda|
  double x_max = 1.0;
  std::uint64_t seed = 0;
  double tv_bound = 0.25;   ///< admissibility bound on TV(U) + TV(g')
  std::size_t max_events = 4'000'000;

  double sample_dx = 0.25;  ///< solution.csv grid
  double sample_dy = 0.1;

  double mu() const { return mu_eps >= 0.0 ? mu_eps : eps * eps; }
  double delta() const { return delta_eps >= 0.0 ? delta_eps : eps; }

  double inflow_tv() const {
    double tv = 0.0;
    for (size_t i = 1; i < inflow.size(); ++i)
      tv += state_dist(inflow[i].state, inflow[i - 1].state);
    return tv;
  }
};

// ---------------------------------------------------------------------------
// Fronts and the front set.
// ---------------------------------------------------------------------------

struct Front {
  std::uint64_t id = 0;
  WaveDescriptor d;      ///< wave data; d.left/d.right chain with neighbors
  double x0 = 0.0;       ///< trajectory anchor
  double y0 = 0.0;
  double slope = 0.0;    ///< d.speed plus tie-breaking jitter
  int generation = 0;    ///< interactions in the ancestry
  bool strong = false;

  bool nonphysical() const { return d.family == WaveFamily::nonphysical; }
  double y_at(double x) const { return y0 + slope * (x - x0); }
};

/// The piecewise-constant solution at a station x: fronts ordered by y
/// (ascending; the topmost is adjacent to the boundary) and the region
/// states between them. regions[i] sits below fronts[i];
/// regions[fronts.size()] is the wall-adjacent state.
struct FrontSet {
  double x = 0.0;
  std::vector<Front> fronts;
  std::vector<State> regions;
  int strong_index = -1;  ///< index into fronts, or -1
  size_t face = 0;        ///< current boundary face

  const State& wall_state() const { return regions.back(); }
  bool in_omega_minus(size_t front_index) const {
    return strong_index >= 0 && int(front_index) < strong_index;
  }
};

enum class EventKind { weak_weak, weak_strong, front_boundary, boundary_vertex };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::weak_weak: return "weak-weak";
    case EventKind::weak_strong: return "weak-strong";
    case EventKind::front_boundary: return "front-boundary";
    case EventKind::boundary_vertex: return "boundary-vertex";
  }
  return "?";
}

struct Event {
  double x = 0.0;
  double y = 0.0;
  EventKind kind = EventKind::weak_weak;
  size_t pos = 0;      ///< index of the lower participant front (or topmost)
  size_t vertex = 0;   ///< vertex index for boundary_vertex events
  std::uint64_t a_id = 0, b_id = 0;
};

/// What one step did, for logging and the functional monitors.
struct StepOutcome {
  Event ev;
  std::string solver;  ///< accurate | simplified | accurate-lateral
  std::vector<std::pair<int, double>> waves_in;   ///< (family, strength)
  std::vector<std::pair<int, double>> waves_out;
  double np_in = 0.0;        ///< nonphysical strength consumed
  double np_out = 0.0;       ///< nonphysical strength emitted
  double omega_k = 0.0;      ///< turn angle for vertex events
  bool np_involved = false;  ///< a nonphysical front took part
};

// ---------------------------------------------------------------------------
// Engine.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class Engine {
 public:
  explicit Engine(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.gas.validate();
    if (cfg_.inflow.empty())
      throw regime_error("Engine: empty inflow profile");
    for (size_t i = 1; i < cfg_.inflow.size(); ++i)
      if (!(cfg_.inflow[i].y > cfg_.inflow[i - 1].y))
        throw regime_error("Engine: inflow rows must ascend in y");
    if (cfg_.inflow.back().y >= 0.0)
      throw regime_error("Engine: inflow breakpoints must sit below the vertex");
    for (const auto& row : cfg_.inflow)
      require_x_supersonic(row.state, cfg_.gas, "Engine inflow");
    discretize_initial();
  }

  const RunConfig& config() const { return cfg_; }
  const FrontSet& state() const { return fs_; }
  double lambda_hat() const { return lambda_hat_; }
  double sigma0() const { return sigma0_; }
  const State& background_minus() const { return u_minus0_; }
  const State& background_plus() const { return u_plus0_; }
  std::uint64_t events_processed() const { return events_; }
  double total_nonphysical() const {
    double s = 0.0;
    for (const auto& f : fs_.fronts)
      if (f.nonphysical()) s += f.d.strength;
    return s;
  }

  /// Earliest upcoming event, or nothing if the run reached x_max.
  std::optional<Event> next_event() const {
    std::optional<Event> best;
    auto consider = [&](const Event& e) {
      if (!(e.x > fs_.x) || e.x > cfg_.x_max) return;
      if (!best || e.x < best->x ||
          (e.x == best->x &&
           (e.y < best->y ||
            (e.y == best->y && (int(e.kind) < int(best->kind) ||
                                (int(e.kind) == int(best->kind) &&
                                 e.a_id < best->a_id)))))) {
        best = e;
      }
    };

    // Adjacent-front trajectory intersections.
    for (size_t i = 0; i + 1 < fs_.fronts.size(); ++i) {
      const Front& a = fs_.fronts[i];
      const Front& b = fs_.fronts[i + 1];
      const double ds = a.slope - b.slope;
      if (std::abs(ds) < 1e-13) continue;  // parallel (e.g. twin contacts)
      const double x =
          ((b.y0 - b.slope * b.x0) - (a.y0 - a.slope * a.x0)) / ds;
      if (!std::isfinite(x)) continue;
      Event e;
      e.x = x;
      e.y = a.y_at(x);
      e.kind = (a.strong || b.strong) ? EventKind::weak_strong
                                      : EventKind::weak_weak;
      e.pos = i;
      e.a_id = a.id;
      e.b_id = b.id;
      consider(e);
    }

    // Topmost front against the boundary faces.
    if (!fs_.fronts.empty()) {
      const Front& top = fs_.fronts.back();
      for (size_t k = fs_.face; k < cfg_.boundary.face_count(); ++k) {
        const double ang = cfg_.boundary.face_angle(k);
        const double m = std::tan(ang);
        const double ds = top.slope - m;
        if (std::abs(ds) < 1e-13) continue;
        const double bx = cfg_.boundary.vertex_x(k);
        const double by = cfg_.boundary.vertex_y(k);
        const double x = ((by - m * bx) - (top.y0 - top.slope * top.x0)) / ds;
        if (!std::isfinite(x)) continue;
        if (x < bx - 1e-15) continue;
        if (k + 1 < cfg_.boundary.vertex_count() &&
            x >= cfg_.boundary.vertex_x(k + 1) - 1e-15)
          continue;  // intersection beyond this face segment
        Event e;
        e.x = x;
        e.y = top.y_at(x);
        e.kind = EventKind::front_boundary;
        e.pos = fs_.fronts.size() - 1;
        e.a_id = top.id;
        consider(e);
      }
    }

    // Boundary vertices.
    for (size_t k = 1; k + 1 < cfg_.boundary.vertex_count(); ++k) {
      if (cfg_.boundary.vertex_x(k) <= fs_.x) continue;
      Event e;
      e.x = cfg_.boundary.vertex_x(k);
      e.y = cfg_.boundary.vertex_y(k);
      e.kind = EventKind::boundary_vertex;
      e.vertex = k;
      consider(e);
      break;  // vertices are ordered; only the next one can be earliest
    }

    return best;
  }

  /// Resolve one event. Throws structural_error with event context if a
  /// solver leaves the perturbative regime.
  StepOutcome step(const Event& ev) {
    if (++events_ > cfg_.max_events)
      throw structural_error("Engine: event budget exhausted (runaway run?)");
    try {
      switch (ev.kind) {
        case EventKind::weak_weak: return step_weak_weak(ev);
        case EventKind::weak_strong: return step_weak_strong(ev);
        case EventKind::front_boundary: return step_boundary(ev);
        case EventKind::boundary_vertex: return step_vertex(ev);
      }
      throw structural_error("Engine: unknown event kind");
    } catch (const structural_error& e) {
      throw structural_error(std::string(e.what()) + " [at event x=" +
                             std::to_string(ev.x) + " y=" +
                             std::to_string(ev.y) + " kind=" +
                             to_string(ev.kind) + "]");
    }
  }

  /// The piecewise-constant solution at station x <= current station, on a
  /// y grid. Needs the segment history (kept by default).
  State sample(double x, double y) const;  // defined with history below

  // -- segment history -------------------------------------------------

  struct Segment {
    std::uint64_t front_id;
    WaveFamily family;
    bool strong;
    double strength;
    double x0, y0, x1;  ///< x1 = +inf until the front dies or the run ends
    double slope;       ///< trajectory slope (jitter included)
    double speed;       ///< ideal wave speed
    State left, right;
  };
  const std::vector<Segment>& segments() const { return segments_; }

  void close_history(double x_end) {
    for (auto& s : segments_)
      if (s.x1 == std::numeric_limits<double>::infinity()) s.x1 = x_end;
  }

 private:
  RunConfig cfg_;
  FrontSet fs_;
  double lambda_hat_ = 0.0;
  double sigma0_ = 0.0;
  State u_minus0_, u_plus0_;
  std::uint64_t next_id_ = 1;
  std::uint64_t events_ = 0;
  std::vector<Segment> segments_;
  std::vector<size_t> open_segment_;  ///< front id -> open segment index + 1

  double jitter(std::uint64_t id) const {
    const std::uint64_t h = detail::splitmix64(cfg_.seed ^ (id * 0x9e37ULL));
    const double u = double(h >> 11) * 0x1.0p-53;  // [0, 1)
    return (2.0 * u - 1.0) * 1e-12;
  }

  Front make_front(const WaveDescriptor& d, double x, double y, int gen) {
    Front f;
    f.id = next_id_++;
    f.d = d;
    f.x0 = x;
    f.y0 = y;
    f.generation = gen;
    if (d.family == WaveFamily::nonphysical) {
      f.slope = lambda_hat_;
    } else if (std::abs(d.speed) >= lambda_hat_) {
      throw structural_error("Engine: physical speed reached lambda_hat");
    } else if (is_contact(d.family)) {
      f.slope = d.speed;
    } else {
      f.slope = d.speed + jitter(f.id);
    }
    return f;
  }

  void open_segment(const Front& f) {
    Segment s;
    s.front_id = f.id;
    s.family = f.d.family;
    s.strong = f.strong;
    s.strength = f.d.strength;
    s.x0 = f.x0;
    s.y0 = f.y0;
    s.x1 = std::numeric_limits<double>::infinity();
    s.slope = f.slope;
    s.speed = f.d.speed;
    s.left = f.d.left;
    s.right = f.d.right;
    if (open_segment_.size() <= f.id) open_segment_.resize(f.id + 1, 0);
    open_segment_[f.id] = segments_.size() + 1;
    segments_.push_back(s);
  }

  void close_segment(const Front& f, double x) {
    if (f.id < open_segment_.size() && open_segment_[f.id]) {
      segments_[open_segment_[f.id] - 1].x1 = x;
      open_segment_[f.id] = 0;
    }
  }

  /// Replace fronts [i, j] (inclusive) by the fan's waves anchored at
  /// (x, y); regions between are rebuilt from the fan's state chain.
  void splice(size_t i, size_t j, const WaveFan& fan, double x, double y,
              int gen) {
    for (size_t k = i; k <= j && k < fs_.fronts.size(); ++k)
      close_segment(fs_.fronts[k], x);

    std::vector<Front> born;
    born.reserve(fan.waves.size());
    for (size_t k = 0; k < fan.waves.size(); ++k) {
      Front f = make_front(fan.waves[k], x, y, gen);
      f.strong = fan.contains_strong && k == 0;
      born.push_back(f);
    }
    // Strict slope ordering of the newborn fan (contacts may tie).
    for (size_t k = 0; k + 1 < born.size(); ++k)
      if (born[k].slope > born[k + 1].slope &&
          !(is_contact(born[k].d.family) && is_contact(born[k + 1].d.family)))
        throw structural_error("Engine: fan speeds out of order");

    const int old_strong = fs_.strong_index;
    fs_.fronts.erase(fs_.fronts.begin() + i, fs_.fronts.begin() + j + 1);
    fs_.fronts.insert(fs_.fronts.begin() + i, born.begin(), born.end());
    fs_.regions.erase(fs_.regions.begin() + i + 1, fs_.regions.begin() + j + 1);
    std::vector<State> mids;
    for (size_t k = 1; k < born.size(); ++k) mids.push_back(born[k].d.left);
    fs_.regions.insert(fs_.regions.begin() + i + 1, mids.begin(), mids.end());

    // Strong-front index maintenance.
    if (fan.contains_strong) {
      fs_.strong_index = int(i);
    } else if (old_strong >= 0) {
      if (old_strong > int(j))
        fs_.strong_index = old_strong - int(j - i + 1) + int(born.size());
      else if (old_strong >= int(i))
        throw structural_error("Engine: strong front consumed without replacement");
    }
    for (const Front& f : born) open_segment(f);
    fs_.x = x;
  }

  static std::vector<std::pair<int, double>> wave_list(const WaveFan& fan) {
    std::vector<std::pair<int, double>> out;
    for (const auto& w : fan.waves)
      out.push_back({family_index(w.family), w.strength});
    return out;
  }

  // -- initial data -----------------------------------------------------

  void discretize_initial() {
    // lambda_hat from the inflow table (behind-shock states only steepen
    // the 1-family, which stays inside the 1.2 margin).
    double lmax = 0.0;
    for (const auto& row : cfg_.inflow) {
      const Vec4 lam = eigenvalues(row.state, cfg_.gas);
      lmax = std::max({lmax, std::abs(lam[0]), std::abs(lam[3])});
    }
    lambda_hat_ = cfg_.lambda_hat > 0.0 ? cfg_.lambda_hat : 1.2 * lmax;

    fs_.x = 0.0;
    fs_.face = 0;
    fs_.regions.push_back(cfg_.inflow.front().state);

    // Inflow jumps, each solved accurately at x = 0.
    for (size_t r = 1; r < cfg_.inflow.size(); ++r) {
      const State below = fs_.regions.back();
      const State above = cfg_.inflow[r].state;
      const WaveFan fan =
          solve_accurate(below, above, cfg_.gas, cfg_.delta());
      // An empty fan means the table jump is below the emission floor;
      // it is dropped rather than breaking the chain of an earlier front.
      for (const auto& w : fan.waves) {
        Front f = make_front(w, 0.0, cfg_.inflow[r].y, 0);
        fs_.fronts.push_back(f);
        fs_.regions.push_back(w.right);
      }
    }

    // The wedge vertex at (0,0): lateral Riemann problem against face 0.
    u_minus0_ = fs_.regions.back();
    const double face0 = cfg_.boundary.face_angle(0);
    const double a0 = flow_angle(u_minus0_);
    WaveFan fan;
    try {
      fan = solve_boundary_vertex(
          {u_minus0_, face0 - a0, cfg_.boundary.normal(0)}, cfg_.gas,
          cfg_.delta());
    } catch (const structural_error& e) {
      throw structural_error(
          std::string("detachment at the wedge vertex (inflow angle beyond "
                      "the critical angle): ") +
          e.what());
    }
    for (const auto& w : fan.waves) {
      Front f = make_front(w, 0.0, 0.0, 0);
      f.strong = w.is_shock();
      fs_.fronts.push_back(f);
      fs_.regions.push_back(w.right);
      if (f.strong) fs_.strong_index = int(fs_.fronts.size()) - 1;
    }
    if (fs_.strong_index >= 0) {
      sigma0_ = fs_.fronts[fs_.strong_index].d.speed;
      u_plus0_ = fs_.fronts[fs_.strong_index].d.right;
      // The strong front must dominate every physical slope from below.
      lambda_hat_ = std::max(lambda_hat_, 1.2 * std::abs(sigma0_));
    } else {
      u_plus0_ = fs_.regions.back();
    }
    for (const Front& f : fs_.fronts) open_segment(f);
  }

  // -- event handlers ---------------------------------------------------

  StepOutcome step_weak_weak(const Event& ev) {
    StepOutcome out;
    out.ev = ev;
    const size_t i = ev.pos;
    const Front a = fs_.fronts[i];
    const Front b = fs_.fronts[i + 1];
    out.waves_in = {{family_index(a.d.family), a.d.strength},
                    {family_index(b.d.family), b.d.strength}};
    out.np_in = (a.nonphysical() ? a.d.strength : 0.0) +
                (b.nonphysical() ? b.d.strength : 0.0);
    out.np_involved = a.nonphysical() || b.nonphysical();

    const bool both_physical = !a.nonphysical() && !b.nonphysical();
    const bool accurate =
        both_physical &&
        std::abs(a.d.strength * b.d.strength) > cfg_.mu();

    WaveFan fan;
    if (accurate) {
      out.solver = "accurate";
      fan = solve_accurate(a.d.left, b.d.right, cfg_.gas, cfg_.delta());
    } else {
      out.solver = "simplified";
      fan = solve_simplified_weak(a.d, b.d, lambda_hat_, cfg_.gas);
    }
    const int gen = std::max(a.generation, b.generation) + 1;
    splice(i, i + 1, fan, ev.x, ev.y, gen);
    out.waves_out = wave_list(fan);
    out.np_out = fan.nonphysical_strength;
    return out;
  }

  StepOutcome step_weak_strong(const Event& ev) {
    StepOutcome out;
    out.ev = ev;
    const size_t i = ev.pos;
    const Front& lower = fs_.fronts[i];
    const Front& upper = fs_.fronts[i + 1];
    const bool weak_below = upper.strong;
    const Front weak = weak_below ? lower : upper;
    const Front strong_front = weak_below ? upper : lower;
    out.waves_in = {{family_index(lower.d.family), lower.d.strength},
                    {family_index(upper.d.family), upper.d.strength}};
    out.np_in = weak.nonphysical() ? weak.d.strength : 0.0;
    out.np_involved = weak.nonphysical();

    const bool accurate =
        !weak.nonphysical() && std::abs(weak.d.strength) > cfg_.mu();
    WaveFan fan;
    if (accurate) {
      out.solver = "accurate";
      fan = solve_strong(lower.d.left, upper.d.right, cfg_.gas,
                         strong_front.d.speed);
    } else {
      out.solver = "simplified";
      const StrongShock s{strong_front.d.speed, strong_front.d.left,
                          strong_front.d.right};
      fan = solve_simplified_strong(weak.d, s,
                                    weak_below ? StrongHitSide::below
                                               : StrongHitSide::above,
                                    lambda_hat_, cfg_.gas);
    }
    const int gen = std::max(lower.generation, upper.generation) + 1;
    splice(i, i + 1, fan, ev.x, ev.y, gen);
    out.waves_out = wave_list(fan);
    out.np_out = fan.nonphysical_strength;
    return out;
  }

  StepOutcome step_boundary(const Event& ev) {
    StepOutcome out;
    out.ev = ev;
    const size_t i = ev.pos;  // topmost front
    const Front hit = fs_.fronts[i];
    out.waves_in = {{family_index(hit.d.family), hit.d.strength}};
    out.np_in = hit.nonphysical() ? hit.d.strength : 0.0;
    out.np_involved = hit.nonphysical();
    out.solver = "accurate-lateral";
    if (hit.strong)
      throw structural_error("Engine: strong front reached the boundary");

    const size_t face = cfg_.boundary.face_index(ev.x);
    const WaveFan fan = solve_boundary_reflection(
        hit.d.left, hit.d.right, cfg_.boundary.normal(face), cfg_.gas,
        cfg_.delta());
    splice(i, i, fan, ev.x, ev.y, hit.generation + 1);
    // The reflection replaces the wall-adjacent state (the incoming front
    // is absorbed, a fresh tangent state sits above the reflected wave).
    fs_.regions.back() =
        fan.waves.empty() ? hit.d.left : fan.waves.back().right;
    fs_.face = face;
    out.waves_out = wave_list(fan);
    out.np_out = fan.nonphysical_strength;
    return out;
  }

  StepOutcome step_vertex(const Event& ev) {
    StepOutcome out;
    out.ev = ev;
    out.solver = "accurate-lateral";
    const size_t k = ev.vertex;
    out.omega_k = cfg_.boundary.turn_angle(k);

    const State wall = fs_.wall_state();
    const WaveFan fan = solve_boundary_vertex(
        {wall, out.omega_k, cfg_.boundary.normal(k)}, cfg_.gas, cfg_.delta());
    // Append on top: splice over an empty range at the wall.
    const size_t i = fs_.fronts.size();
    if (!fan.waves.empty()) {
      std::vector<Front> born;
      for (const auto& w : fan.waves)
        born.push_back(make_front(w, ev.x, ev.y, 0));
      fs_.fronts.insert(fs_.fronts.end(), born.begin(), born.end());
      for (size_t m = 0; m < born.size(); ++m)
        fs_.regions.push_back(born[m].d.right);
      for (const Front& f : born) open_segment(f);
    }
    (void)i;
    fs_.x = ev.x;
    fs_.face = k;
    out.waves_out = wave_list(fan);
    out.np_out = fan.nonphysical_strength;
    return out;
  }
};

// ---------------------------------------------------------------------------
// Sampling.
// ---------------------------------------------------------------------------

inline State Engine::sample(double x, double y) const {
  // Collect segments alive at x, ordered by their y there. Fronts are few
  // enough that a linear pass is fine.
  const Segment* best = nullptr;  // lowest segment strictly above y
  double best_y = std::numeric_limits<double>::infinity();
  const Segment* top = nullptr;   // highest segment at or below y
  double top_y = -std::numeric_limits<double>::infinity();
  for (const auto& s : segments_) {
    if (x < s.x0 || x >= s.x1) continue;
    const double ys = s.y0 + s.slope * (x - s.x0);
    if (ys > y && ys < best_y) {
      best_y = ys;
      best = &s;
    }
    if (ys <= y && ys >= top_y) {
      top_y = ys;
      top = &s;
    }
  }
  if (best) return best->left;
  if (top) return top->right;
  return cfg_.inflow.front().state;
}

}  // namespace wft
