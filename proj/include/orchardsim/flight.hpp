#pragma once

#include <vector>

#include "orchardsim/planner.hpp"
#include "orchardsim/trajectory.hpp"

namespace orchardsim {

struct FlightConfig {
  Vec3 start;
  Vec3 goal;
  VehicleLimits limits;
  SamplerConfig sampler;
  CameraIntrinsics camera{deg_to_rad(90.0), deg_to_rad(60.0), 8.0, 320, 240};
  double replan_period = 1.0 / 15.0;
  double sim_dt = 0.02;
  double max_time = 60.0;
  double goal_tolerance = 0.3;
  /// Radius of the launch area assumed clear before the first depth frame.
  double start_clear_radius = 1.0;

  void validate() const;
};

struct FlightSample {
  double time = 0.0;
  Vec3 position;
  double clearance = 0.0;
};

struct FlightResult {
  bool reached = false;
  double time = 0.0;
  double min_clearance = 0.0;
  bool contact = false;  // clearance dropped below the vehicle radius
  int fallbacks = 0;
  std::vector<PlanStepLog> trace;
  std::vector<FlightSample> samples;
};

/// Closed loop: render a depth frame facing the goal, replan, fly the active
/// segment for one replanning period, repeat. Clearance is the distance from
/// the vehicle centre to the nearest mesh triangle at every sim step.
FlightResult simulate_flight(const FlightConfig& config, const Bvh& bvh, int threads = 1);

nlohmann::json to_json(const FlightResult& result, const FlightConfig& config);

}  // namespace orchardsim
