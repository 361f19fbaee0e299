#include "orchardsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "orchardsim/rng.hpp"

namespace orchardsim {

namespace {

Vec3 poly(const PolySegment& s, double t, int derivative) {
  t = std::clamp(t, 0.0, s.T);
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  switch (derivative) {
    case 0: return s.alpha * (t5 / 120) + s.beta * (t4 / 24) + s.gamma * (t3 / 6) + s.a0 * (t2 / 2) + s.v0 * t + s.s0;
    case 1: return s.alpha * (t4 / 24) + s.beta * (t3 / 6) + s.gamma * (t2 / 2) + s.a0 * t + s.v0;
    case 2: return s.alpha * (t3 / 6) + s.beta * (t2 / 2) + s.gamma * t + s.a0;
    default: return s.alpha * (t2 / 2) + s.beta * t + s.gamma;
  }
}

// Unit vector at polar angle theta from `axis`, azimuth phi.
Vec3 cone_direction(const Vec3& axis, double theta, double phi) {
  const Vec3 helper = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  const Vec3 e1 = normalized(cross(axis, helper));
  const Vec3 e2 = cross(axis, e1);
  return axis * std::cos(theta) + (e1 * std::cos(phi) + e2 * std::sin(phi)) * std::sin(theta);
}

bool in_free_ball(const Vec3& p, double r, std::span<const FreeBall> balls) {
  for (const FreeBall& b : balls) {
    if (distance(p, b.center) + r <= b.radius) return true;
  }
  return false;
}

}  // namespace

Vec3 PolySegment::position(double t) const { return poly(*this, t, 0); }
Vec3 PolySegment::velocity(double t) const { return poly(*this, t, 1); }
Vec3 PolySegment::acceleration(double t) const { return poly(*this, t, 2); }
Vec3 PolySegment::jerk(double t) const { return poly(*this, t, 3); }

PolySegment min_jerk_segment(const Vec3& s0, const Vec3& v0, const Vec3& a0, const Vec3& sT, const Vec3& vT,
                             const Vec3& aT, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("segment duration must be positive");
  const Vec3 dp = sT - (s0 + v0 * T + a0 * (0.5 * T * T));
  const Vec3 dv = vT - (v0 + a0 * T);
  const Vec3 da = aT - a0;
  const double T2 = T * T, T3 = T2 * T, T5 = T3 * T2;
  PolySegment seg;
  seg.alpha = (dp * 720.0 - dv * (360.0 * T) + da * (60.0 * T2)) / T5;
  seg.beta = (dp * (-360.0 * T) + dv * (168.0 * T2) - da * (24.0 * T3)) / T5;
  seg.gamma = (dp * (60.0 * T2) - dv * (24.0 * T3) + da * (3.0 * T2 * T2)) / T5;
  seg.s0 = s0;
  seg.v0 = v0;
  seg.a0 = a0;
  seg.T = T;
  return seg;
}

void VehicleLimits::validate() const {
  if (!(v_max > 0.0 && a_max > 0.0 && radius > 0.0)) throw std::invalid_argument("vehicle limits must be positive");
}

std::vector<double> sample_times(double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample step must be positive");
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(std::floor(T / dt));
  times.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) times.push_back(static_cast<double>(k) * dt);
  if (times.back() < T) times.push_back(T);
  return times;
}

bool check_limits(const PolySegment& seg, const VehicleLimits& limits, double dt) {
  for (double t : sample_times(seg.T, dt)) {
    if (norm(seg.velocity(t)) > limits.v_max || norm(seg.acceleration(t)) > limits.a_max) return false;
  }
  return true;
}

bool Pyramid::contains(const Vec3& p, double margin) const {
  const Vec3 rel = p - apex;
  if (dot(rel, orientation.forward()) > d_base) return false;
  for (const Vec3& n : side_normals) {
    if (dot(rel, n) < margin) return false;
  }
  return true;
}

Pyramid make_pyramid(const CameraConfig& cam, int u0, int v0, int u1, int v1, double d_base) {
  // Image edges as slopes: y/x at columns u0/u1, z/x at rows v0/v1.
  const double a_left = -(u0 - cam.cx()) / cam.fx();
  const double a_right = -(u1 - cam.cx()) / cam.fx();
  const double b_top = -(v0 - cam.cy()) / cam.fy();
  const double b_bottom = -(v1 - cam.cy()) / cam.fy();
  const Rotation& R = cam.pose.orientation;
  Pyramid p;
  p.apex = cam.pose.position;
  p.orientation = R;
  p.u0 = u0;
  p.v0 = v0;
  p.u1 = u1;
  p.v1 = v1;
  p.d_base = d_base;
  p.side_normals = {R.to_world(normalized(Vec3{a_left, -1, 0})), R.to_world(normalized(Vec3{-a_right, 1, 0})),
                    R.to_world(normalized(Vec3{b_top, 0, -1})), R.to_world(normalized(Vec3{-b_bottom, 0, 1}))};
  return p;
}

std::optional<Pyramid> depth_to_pyramid(const DepthImage& depth, const Vec3& query, const VehicleLimits& limits) {
  const CameraConfig& cam = depth.camera;
  const int W = depth.width(), H = depth.height();
  const auto proj = project_point(cam, query);
  if (!proj) return std::nullopt;
  // Keep the grown rectangle one pixel inside the image so it can be dilated.
  const int qu = std::clamp(static_cast<int>(proj->u), 1, W - 2);
  const int qv = std::clamp(static_cast<int>(proj->v), 1, H - 2);
  const double x = proj->depth;
  const double r = limits.radius;

  double seed_min = kNoDepth;
  for (int v = qv - 1; v <= qv + 1; ++v) {
    for (int u = qu - 1; u <= qu + 1; ++u) seed_min = std::min(seed_min, depth.at(u, v));
  }
  const double d_max = std::min(cam.far - r, std::nextafter(seed_min - r, 0.0));
  if (!(d_max >= x)) return std::nullopt;

  std::vector<double> bases = {d_max, 0.5 * (d_max + x)};
  if (x + 1e-3 <= d_max) bases.push_back(x + 1e-3);
  for (double d : bases) {
    const double need = d + r;
    auto column_free = [&](int u, int va, int vb) {
      for (int v = va; v <= vb; ++v) {
        if (!(depth.at(u, v) > need)) return false;
      }
      return true;
    };
    auto row_free = [&](int v, int ua, int ub) {
      for (int u = ua; u <= ub; ++u) {
        if (!(depth.at(u, v) > need)) return false;
      }
      return true;
    };
    // Inclusive pixel bounds; the dilated ring is [lo - 1, hi + 1].
    int ul = qu, ur = qu, vt = qv, vb = qv;
    bool grown = true;
    while (grown) {
      grown = false;
      if (ul - 1 >= 1 && column_free(ul - 2, vt - 1, vb + 1)) { --ul; grown = true; }
      if (ur + 1 <= W - 2 && column_free(ur + 2, vt - 1, vb + 1)) { ++ur; grown = true; }
      if (vt - 1 >= 1 && row_free(vt - 2, ul - 1, ur + 1)) { --vt; grown = true; }
      if (vb + 1 <= H - 2 && row_free(vb + 2, ul - 1, ur + 1)) { ++vb; grown = true; }
    }
    Pyramid p = make_pyramid(cam, ul, vt, ur + 1, vb + 1, d);
    if (p.contains(query, r)) return p;
  }
  return std::nullopt;
}

bool segment_collision_free(const PolySegment& seg, std::vector<Pyramid>& pyramids, const DepthImage& depth,
                            const VehicleLimits& limits, double dt, std::span<const FreeBall> free_balls) {
  for (double t : sample_times(seg.T, dt)) {
    const Vec3 p = seg.position(t);
    if (in_free_ball(p, limits.radius, free_balls)) continue;
    const bool covered =
        std::any_of(pyramids.begin(), pyramids.end(), [&](const Pyramid& py) { return py.contains(p, limits.radius); });
    if (covered) continue;
    auto fresh = depth_to_pyramid(depth, p, limits);
    if (!fresh) return false;
    pyramids.push_back(*fresh);
  }
  return true;
}

void SamplerConfig::validate() const {
  if (candidates < 1) throw std::invalid_argument("sampler needs at least one candidate");
  if (!(min_duration > 0.0 && max_duration >= min_duration)) throw std::invalid_argument("bad sampler duration range");
  if (!(cone_half_angle >= 0.0 && cone_half_angle < kPi)) throw std::invalid_argument("cone half angle must lie in [0, pi)");
  if (!(max_step > 0.0 && cost_lambda >= 0.0 && check_dt > 0.0)) throw std::invalid_argument("bad sampler step settings");
  if (pyramid_history < 1) throw std::invalid_argument("pyramid history must keep at least the current frame");
}

nlohmann::json to_json(const PolySegment& seg) {
  auto v = [](const Vec3& a) { return nlohmann::json::array({a.x, a.y, a.z}); };
  return {{"alpha", v(seg.alpha)}, {"beta", v(seg.beta)}, {"gamma", v(seg.gamma)}, {"s0", v(seg.s0)},
          {"v0", v(seg.v0)},       {"a0", v(seg.a0)},     {"T", seg.T}};
}

nlohmann::json to_json(const PlanStepLog& log) {
  nlohmann::json j{{"step", log.step},
                   {"time", log.time},
                   {"candidates", log.candidates},
                   {"within_limits", log.within_limits},
                   {"evaluated", log.evaluated},
                   {"fallback", log.fallback}};
  if (log.chosen) {
    j["chosen"] = to_json(*log.chosen);
    j["cost"] = log.chosen_cost;
  } else {
    j["chosen"] = nullptr;
  }
  return j;
}

PlannerState plan_step(const PlannerState& state, double now, const Vec3& pos, const Vec3& vel, const Vec3& acc,
                       const DepthImage& depth, const VehicleLimits& limits, const SamplerConfig& sampler,
                       PlanStepLog* log) {
  limits.validate();
  sampler.validate();
  PlannerState next = state;
  ++next.step;

  std::vector<Pyramid> pyramids;
  for (const PlannerFrame& f : state.history) pyramids.insert(pyramids.end(), f.pyramids.begin(), f.pyramids.end());
  const std::size_t inherited = pyramids.size();

  struct Candidate {
    Vec3 end;
    double T;
    double cost;
  };
  std::vector<Candidate> cands;
  const Vec3 to_goal = state.goal - pos;
  const double dist = norm(to_goal);
  if (dist > 1e-9) {
    const Vec3 axis = to_goal / dist;
    const double reach = std::min(dist, sampler.max_step);
    Rng rng = Rng::substream(sampler.seed, "sampler", state.step);
    const double cos_max = std::cos(sampler.cone_half_angle);
    for (int i = 0; i < sampler.candidates; ++i) {
      Vec3 end;
      if (i == 0) {
        end = pos + axis * reach;
      } else {
        const double theta = std::acos(rng.uniform(cos_max, 1.0));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        end = pos + cone_direction(axis, theta, phi) * (reach * rng.uniform(0.3, 1.0));
      }
      const double T = rng.uniform(sampler.min_duration, sampler.max_duration);
      cands.push_back({end, T, T + sampler.cost_lambda * distance(end, state.goal)});
    }
  }
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cands[a].cost < cands[b].cost; });

  PlanStepLog entry;
  entry.step = state.step;
  entry.time = now;
  entry.candidates = static_cast<int>(cands.size());
  for (std::size_t idx : order) {
    const Candidate& c = cands[idx];
    ++entry.evaluated;
    const PolySegment seg = min_jerk_segment(pos, vel, acc, c.end, {}, {}, c.T);
    if (!check_limits(seg, limits, sampler.check_dt)) continue;
    ++entry.within_limits;
    if (segment_collision_free(seg, pyramids, depth, limits, sampler.check_dt, state.free_balls)) {
      entry.chosen = seg;
      entry.chosen_cost = c.cost;
      break;
    }
  }

  next.history.push_back({state.step, std::vector<Pyramid>(pyramids.begin() + static_cast<std::ptrdiff_t>(inherited),
                                                           pyramids.end())});
  // Expired frames keep only the pyramids still holding the vehicle, so a
  // hovering vehicle can always certify a departure.
  const auto keep = static_cast<std::size_t>(sampler.pyramid_history);
  if (next.history.size() > keep) {
    const auto expired = static_cast<std::ptrdiff_t>(next.history.size() - keep);
    std::vector<PlannerFrame> pruned;
    for (auto it = next.history.begin(); it != next.history.begin() + expired; ++it) {
      PlannerFrame f{it->frame, {}};
      for (const Pyramid& py : it->pyramids) {
        if (py.contains(pos, limits.radius)) f.pyramids.push_back(py);
      }
      if (!f.pyramids.empty()) pruned.push_back(std::move(f));
    }
    pruned.insert(pruned.end(), std::make_move_iterator(next.history.begin() + expired),
                  std::make_move_iterator(next.history.end()));
    next.history = std::move(pruned);
  }

  if (entry.chosen) {
    next.segment = entry.chosen;
    next.segment_start = now;
  } else {
    entry.fallback = true;
  }
  if (log) *log = entry;
  return next;
}

}  // namespace orchardsim
