// Copyright 2026 The mpcgps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPCGPS_ENVIRONMENT_H_
#define MPCGPS_ENVIRONMENT_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mpcgps/types.h"

namespace mpcgps {

// Vertical cylinder standing on the ground plane.
struct Cylinder {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.5;
  double height = 4.0;
};

// Zero-thickness vertical panel between two ground points.
struct Wall {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  double height = 4.0;
};

// Immutable obstacle world. The ground plane z = 0 is implicit.
struct Environment {
  std::vector<Cylinder> cylinders;
  std::vector<Wall> walls;
  std::string scenario = "empty";
  std::uint64_t seed = 0;

  void Validate() const;
};

struct Observation {
  Eigen::Matrix<double, kNumBeams, 1> ranges =
      Eigen::Matrix<double, kNumBeams, 1>::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();

  // [ranges; v; qw qx qy qz; omega]
  ObservationVector ToVector() const;
};

enum class CrashStatus {
  kFlying,
  kObstacleCollision,
  kGroundCollision,
  kOverflewObstacle,
};

const char* CrashStatusName(CrashStatus status);

struct SensorConfig {
  double max_range = 5.0;       // m
  double field_of_view = M_PI;  // rad, centered on the heading
  double range_noise_stddev = 0.0;
};

struct CrashConfig {
  double vehicle_radius = 0.3;     // bounding sphere, m
  double half_height = 0.055;      // m
  double overflight_margin = 1.0;  // horizontal footprint inflation, m
};

// Distance to the nearest obstacle surface (ground excluded); negative inside
// a cylinder. +infinity in a world without obstacles.
double SignedDistance(const Environment& env, const Eigen::Vector3d& position);

// Distance along a unit direction to the first obstacle or ground hit,
// clamped to (0, max_range].
double RayCast(const Environment& env, const Eigen::Vector3d& origin,
               const Eigen::Vector3d& direction, double max_range);

// Beam bearings relative to the heading, right to left.
std::vector<double> BeamAngles(const SensorConfig& sensor = {});

// Laser fan in the horizontal plane, rotated by yaw only. Position is used to
// cast rays but never copied into the result. Noise is drawn from rng when
// range_noise_stddev > 0 and rng is non-null.
Observation Observe(const Environment& env, const State& state,
                    const SensorConfig& sensor = {},
                    std::mt19937_64* rng = nullptr);

CrashStatus DetectCrash(const Environment& env, const State& state,
                        const CrashConfig& config = {});

// ----- scene generators ----- //

Environment EmptyWorld();

// Single training cylinder (radius 0.5, height 4) ahead of the start.
Environment CylinderScene(const Eigen::Vector2d& center = {6.0, 0.0});

struct ForestExtent {
  double x_min = -10.0;
  double x_max = 250.0;
  double half_width = 50.0;
  double spawn_clearance = 3.0;  // obstacle-free radius around the origin
  double height = 4.0;
};

// Jittered lattice rescaled to the requested mean nearest-neighbor spacing.
Environment GenerateForest(std::uint64_t seed, double mean_spacing,
                           double cylinder_radius,
                           const ForestExtent& extent = {});

// Hallway whose heading changes by a uniform angle in [-max_turn, max_turn]
// degrees at every segment boundary ahead of the origin. One straight segment
// extends behind the start. max_turn = 0 gives the straight training hallway.
Environment GenerateWindingHallway(std::uint64_t seed, double segment_length,
                                   double max_turn_deg, double width,
                                   int num_segments = 50, double height = 4.0);

Environment StraightHallway(double width = 5.0, int num_segments = 50);

double MeanNearestNeighborSpacing(const std::vector<Cylinder>& cylinders);

// Scenario names: empty, cylinder, straight_hallway, forest, winding_hallway.
bool IsKnownScenario(const std::string& name);
Environment MakeScenario(const std::string& name, std::uint64_t seed);

}  // namespace mpcgps

#endif  // MPCGPS_ENVIRONMENT_H_
