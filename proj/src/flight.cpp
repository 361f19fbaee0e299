#include "orchardsim/flight.hpp"

#include <cmath>
#include <stdexcept>

namespace orchardsim {

void FlightConfig::validate() const {
  limits.validate();
  sampler.validate();
  if (!(replan_period > 0.0 && sim_dt > 0.0 && sim_dt <= replan_period)) {
    throw std::invalid_argument("need 0 < sim_dt <= replan_period");
  }
  if (!(max_time > 0.0 && goal_tolerance > 0.0 && start_clear_radius >= 0.0)) {
    throw std::invalid_argument("bad flight time, tolerance or start radius");
  }
  CameraConfig cam;
  cam.hfov = camera.hfov;
  cam.vfov = camera.vfov;
  cam.far = camera.far;
  cam.image_width = camera.image_width;
  cam.image_height = camera.image_height;
  cam.validate();
}

FlightResult simulate_flight(const FlightConfig& config, const Bvh& bvh, int threads) {
  config.validate();
  const double probe = std::max(2.0, 4.0 * config.limits.radius);  // clearances saturate here
  auto clearance_at = [&](const Vec3& p) { return bvh.empty() ? probe : bvh.nearest_distance(p, probe); };

  PlannerState state;
  state.goal = config.goal;
  if (config.start_clear_radius > 0.0) state.free_balls.push_back({config.start, config.start_clear_radius});

  FlightResult result;
  Vec3 pos = config.start, vel, acc;
  double t = 0.0;
  result.min_clearance = clearance_at(pos);
  result.samples.push_back({t, pos, result.min_clearance});
  const int substeps = std::max(1, static_cast<int>(std::lround(config.replan_period / config.sim_dt)));

  while (t < config.max_time) {
    if (distance(pos, config.goal) <= config.goal_tolerance) {
      result.reached = true;
      break;
    }
    CameraConfig cam;
    const Vec3 heading = config.goal - pos;
    cam.pose = {pos, Rotation::from_yaw_pitch(std::atan2(heading.y, heading.x), 0.0)};
    cam.hfov = config.camera.hfov;
    cam.vfov = config.camera.vfov;
    cam.far = config.camera.far;
    cam.image_width = config.camera.image_width;
    cam.image_height = config.camera.image_height;
    const DepthImage depth = render_depth(cam, bvh, threads);

    PlanStepLog log;
    state = plan_step(state, t, pos, vel, acc, depth, config.limits, config.sampler, &log);
    if (log.fallback) ++result.fallbacks;
    result.trace.push_back(log);

    for (int k = 0; k < substeps; ++k) {
      t += config.sim_dt;
      if (state.segment) {
        const double local = t - state.segment_start;
        pos = state.segment->position(local);
        vel = local < state.segment->T ? state.segment->velocity(local) : Vec3{};
        acc = local < state.segment->T ? state.segment->acceleration(local) : Vec3{};
      }
      const double c = clearance_at(pos);
      result.min_clearance = std::min(result.min_clearance, c);
      result.samples.push_back({t, pos, c});
    }
  }
  if (!result.reached && distance(pos, config.goal) <= config.goal_tolerance) result.reached = true;
  result.time = t;
  result.contact = result.min_clearance < config.limits.radius;
  return result;
}

nlohmann::json to_json(const FlightResult& result, const FlightConfig& config) {
  return {{"reached", result.reached},
          {"time", result.time},
          {"min_clearance", result.min_clearance},
          {"vehicle_radius", config.limits.radius},
          {"contact", result.contact},
          {"fallbacks", result.fallbacks},
          {"plan_steps", result.trace.size()},
          {"goal", {config.goal.x, config.goal.y, config.goal.z}},
          {"final_position",
           {result.samples.back().position.x, result.samples.back().position.y, result.samples.back().position.z}}};
}

}  // namespace orchardsim
