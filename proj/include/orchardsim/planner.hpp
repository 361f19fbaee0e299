#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "orchardsim/depthrender.hpp"

namespace orchardsim {

/// s(t) = alpha t^5/120 + beta t^4/24 + gamma t^3/6 + a0 t^2/2 + v0 t + s0
/// for t in [0, T]; evaluation clamps t to that interval.
struct PolySegment {
  Vec3 alpha, beta, gamma;
  Vec3 s0, v0, a0;
  double T = 0.0;

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
  Vec3 jerk(double t) const;
};

/// Minimum-jerk segment meeting position, velocity and acceleration at both
/// ends. Throws std::invalid_argument unless T > 0.
PolySegment min_jerk_segment(const Vec3& s0, const Vec3& v0, const Vec3& a0, const Vec3& sT, const Vec3& vT,
                             const Vec3& aT, double T);

struct VehicleLimits {
  double v_max = 2.0;
  double a_max = 4.0;
  double radius = 0.25;

  void validate() const;
};

/// Sample times 0, dt, 2dt, ... plus T itself.
std::vector<double> sample_times(double T, double dt);

/// |velocity| <= v_max and |acceleration| <= a_max at every sample time.
bool check_limits(const PolySegment& seg, const VehicleLimits& limits, double dt);

/// Free-space pyramid from one depth image: the apex is the camera centre,
/// the sides pass through the edges of the pixel rectangle [u0, u1) x
/// [v0, v1), and the base sits at planar depth d_base. Every pixel of the
/// rectangle grown by one pixel on each side reads deeper than
/// d_base + radius.
struct Pyramid {
  Vec3 apex;
  Rotation orientation;
  int u0 = 0, v0 = 0, u1 = 0, v1 = 0;
  double d_base = 0.0;
  std::array<Vec3, 4> side_normals;  // world frame, pointing inwards, unit

  /// True iff the ball of radius `margin` around p lies inside the pyramid.
  bool contains(const Vec3& p, double margin) const;
};

Pyramid make_pyramid(const CameraConfig& cam, int u0, int v0, int u1, int v1, double d_base);

/// Greedy pyramid around `query`: tries base depths from deep to shallow and
/// grows the pixel rectangle outwards from the query pixel while every pixel
/// stays deeper than base + radius. Returns the first pyramid whose interior
/// holds the vehicle ball at `query`, or nullopt.
std::optional<Pyramid> depth_to_pyramid(const DepthImage& depth, const Vec3& query, const VehicleLimits& limits);

/// Region declared free without a depth observation (e.g. the launch area).
struct FreeBall {
  Vec3 center;
  double radius = 0.0;
};

/// True iff the vehicle ball at every sample of `seg` fits inside some
/// pyramid or free ball. Samples not yet covered get a new pyramid from
/// `depth`, which is appended to `pyramids`.
bool segment_collision_free(const PolySegment& seg, std::vector<Pyramid>& pyramids, const DepthImage& depth,
                            const VehicleLimits& limits, double dt, std::span<const FreeBall> free_balls = {});

struct SamplerConfig {
  int candidates = 100;
  double min_duration = 0.5;
  double max_duration = 3.0;
  double cone_half_angle = deg_to_rad(25.0);  // around the goal direction
  double max_step = 4.0;                        // endpoint distance cap, m
  double cost_lambda = 1.0;                     // s per m of terminal goal distance
  double check_dt = 0.02;
  int pyramid_history = 15;  // frames whose pyramids stay usable
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlannerFrame {
  std::uint64_t frame = 0;
  std::vector<Pyramid> pyramids;
};

struct PlannerState {
  std::optional<PolySegment> segment;
  double segment_start = 0.0;
  Vec3 goal;
  std::uint64_t step = 0;
  /// Pyramids of recent frames, oldest first.
  std::vector<PlannerFrame> history;
  std::vector<FreeBall> free_balls;
};

struct PlanStepLog {
  std::uint64_t step = 0;
  double time = 0.0;
  int candidates = 0;
  int evaluated = 0;      // examined in cost order until one passed
  int within_limits = 0;  // of those, passed the limit check
  bool fallback = false;
  std::optional<PolySegment> chosen;
  double chosen_cost = 0.0;
};

nlohmann::json to_json(const PolySegment& seg);
nlohmann::json to_json(const PlanStepLog& log);

/// One replanning cycle. Candidate endpoints are drawn in a cone towards the
/// goal (the goal itself is always candidate 0 when in reach), end at rest,
/// and are ranked by T + lambda * |s(T) - goal|. The cheapest candidate that
/// passes the limit check and the pyramid check replaces the active segment;
/// otherwise the previous segment stays active. Pyramids from the last
/// `pyramid_history` frames and the state's free balls count as free space.
PlannerState plan_step(const PlannerState& state, double now, const Vec3& pos, const Vec3& vel, const Vec3& acc,
                       const DepthImage& depth, const VehicleLimits& limits, const SamplerConfig& sampler,
                       PlanStepLog* log = nullptr);

}  // namespace orchardsim
