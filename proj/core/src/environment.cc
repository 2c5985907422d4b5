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

#include "mpcgps/environment.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpcgps {
namespace {

constexpr double kMinRange = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

double CylinderDistance(const Cylinder& c, const Eigen::Vector3d& p) {
  const double radial = (p.head<2>() - c.center).norm() - c.radius;
  const double vertical = p.z() - c.height;
  if (radial <= 0.0 && vertical <= 0.0) return std::max(radial, vertical);
  const double a = std::max(radial, 0.0);
  const double b = std::max(vertical, 0.0);
  return std::sqrt(a * a + b * b);
}

double SegmentDistance2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                         const Eigen::Vector2d& p) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * ab - p).norm();
}

double WallDistance(const Wall& w, const Eigen::Vector3d& p) {
  const double horizontal = SegmentDistance2d(w.a, w.b, p.head<2>());
  const double vertical = std::max(p.z() - w.height, 0.0);
  return std::sqrt(horizontal * horizontal + vertical * vertical);
}

double RayCylinder(const Cylinder& c, const Eigen::Vector3d& o,
                   const Eigen::Vector3d& d) {
  const Eigen::Vector2d rel = o.head<2>() - c.center;
  const Eigen::Vector2d dxy = d.head<2>();
  const double cc = rel.squaredNorm() - c.radius * c.radius;
  if (cc <= 0.0 && o.z() <= c.height && o.z() >= 0.0) return 0.0;
  double best = kInf;
  const double a = dxy.squaredNorm();
  if (a > 0.0) {
    const double b = 2.0 * dxy.dot(rel);
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t < 0.0) continue;
        const double z = o.z() + t * d.z();
        if (z >= 0.0 && z <= c.height) {
          best = std::min(best, t);
          break;
        }
      }
    }
  }
  if (d.z() != 0.0) {
    const double t = (c.height - o.z()) / d.z();
    if (t >= 0.0) {
      const Eigen::Vector2d xy = o.head<2>() + t * dxy;
      if ((xy - c.center).squaredNorm() <= c.radius * c.radius) {
        best = std::min(best, t);
      }
    }
  }
  return best;
}

double RayWall(const Wall& w, const Eigen::Vector3d& o,
               const Eigen::Vector3d& d) {
  // o + t d = a + s (b - a) in the plane
  const Eigen::Vector2d e = w.b - w.a;
  const Eigen::Vector2d dxy = d.head<2>();
  const double denom = dxy.x() * (-e.y()) - dxy.y() * (-e.x());
  if (std::abs(denom) < 1e-15) return kInf;
  const Eigen::Vector2d rhs = w.a - o.head<2>();
  const double t = (rhs.x() * (-e.y()) - rhs.y() * (-e.x())) / denom;
  const double s = (dxy.x() * rhs.y() - dxy.y() * rhs.x()) / denom;
  if (t < 0.0 || s < 0.0 || s > 1.0) return kInf;
  const double z = o.z() + t * d.z();
  if (z < 0.0 || z > w.height) return kInf;
  return t;
}

}  // namespace

void Environment::Validate() const {
  for (const Cylinder& c : cylinders) {
    if (!(c.radius > 0.0) || !(c.height > 0.0)) {
      throw ValidationError("cylinder radius and height must be positive");
    }
  }
  for (const Wall& w : walls) {
    if (!(w.height > 0.0) || (w.b - w.a).norm() <= 0.0) {
      throw ValidationError("walls need positive height and length");
    }
  }
}

ObservationVector Observation::ToVector() const {
  ObservationVector o;
  o.head<kNumBeams>() = ranges;
  o.segment<3>(kNumBeams) = velocity;
  o(kNumBeams + 3) = orientation.w();
  o(kNumBeams + 4) = orientation.x();
  o(kNumBeams + 5) = orientation.y();
  o(kNumBeams + 6) = orientation.z();
  o.segment<3>(kNumBeams + 7) = angular_velocity;
  return o;
}

const char* CrashStatusName(CrashStatus status) {
  switch (status) {
    case CrashStatus::kFlying: return "flying";
    case CrashStatus::kObstacleCollision: return "obstacle_collision";
    case CrashStatus::kGroundCollision: return "ground_collision";
    case CrashStatus::kOverflewObstacle: return "overflew_obstacle";
  }
  return "unknown";
}

double SignedDistance(const Environment& env, const Eigen::Vector3d& position) {
  double d = kInf;
  for (const Cylinder& c : env.cylinders) {
    d = std::min(d, CylinderDistance(c, position));
  }
  for (const Wall& w : env.walls) d = std::min(d, WallDistance(w, position));
  return d;
}

double RayCast(const Environment& env, const Eigen::Vector3d& origin,
               const Eigen::Vector3d& direction, double max_range) {
  double best = max_range;
  if (direction.z() < 0.0) {
    best = std::min(best, std::max(0.0, -origin.z() / direction.z()));
  } else if (origin.z() < 0.0) {
    best = 0.0;
  }
  for (const Cylinder& c : env.cylinders) {
    // cull cylinders out of reach
    if ((origin.head<2>() - c.center).norm() - c.radius > best) continue;
    best = std::min(best, RayCylinder(c, origin, direction));
  }
  for (const Wall& w : env.walls) {
    if (SegmentDistance2d(w.a, w.b, origin.head<2>()) > best) continue;
    best = std::min(best, RayWall(w, origin, direction));
  }
  return std::clamp(best, kMinRange, max_range);
}

std::vector<double> BeamAngles(const SensorConfig& sensor) {
  std::vector<double> angles(kNumBeams);
  for (int k = 0; k < kNumBeams; ++k) {
    angles[k] = -0.5 * sensor.field_of_view +
                sensor.field_of_view * k / (kNumBeams - 1);
  }
  return angles;
}

Observation Observe(const Environment& env, const State& state,
                    const SensorConfig& sensor, std::mt19937_64* rng) {
  Observation obs;
  const Eigen::Matrix3d rotation = state.orientation.normalized().toRotationMatrix();
  const double yaw = std::atan2(rotation(1, 0), rotation(0, 0));
  const std::vector<double> angles = BeamAngles(sensor);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int k = 0; k < kNumBeams; ++k) {
    const double bearing = yaw + angles[k];
    const Eigen::Vector3d dir(std::cos(bearing), std::sin(bearing), 0.0);
    double r = RayCast(env, state.position, dir, sensor.max_range);
    if (sensor.range_noise_stddev > 0.0 && rng != nullptr) {
      r = std::clamp(r + sensor.range_noise_stddev * noise(*rng), kMinRange,
                     sensor.max_range);
    }
    obs.ranges(k) = r;
  }
  obs.velocity = state.velocity;
  obs.orientation = state.orientation;
  obs.angular_velocity = state.angular_velocity;
  return obs;
}

CrashStatus DetectCrash(const Environment& env, const State& state,
                        const CrashConfig& config) {
  const Eigen::Vector3d& p = state.position;
  if (SignedDistance(env, p) < config.vehicle_radius) {
    return CrashStatus::kObstacleCollision;
  }
  if (p.z() < config.half_height) return CrashStatus::kGroundCollision;
  for (const Cylinder& c : env.cylinders) {
    if (p.z() > c.height &&
        (p.head<2>() - c.center).norm() < c.radius + config.overflight_margin) {
      return CrashStatus::kOverflewObstacle;
    }
  }
  for (const Wall& w : env.walls) {
    if (p.z() > w.height &&
        SegmentDistance2d(w.a, w.b, p.head<2>()) < config.overflight_margin) {
      return CrashStatus::kOverflewObstacle;
    }
  }
  return CrashStatus::kFlying;
}

// ----- scene generators ----- //

Environment EmptyWorld() { return Environment{}; }

Environment CylinderScene(const Eigen::Vector2d& center) {
  Environment env;
  env.scenario = "cylinder";
  env.cylinders.push_back(Cylinder{center, 0.5, 4.0});
  return env;
}

double MeanNearestNeighborSpacing(const std::vector<Cylinder>& cylinders) {
  if (cylinders.size() < 2) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < cylinders.size(); ++i) {
    double best = kInf;
    for (size_t j = 0; j < cylinders.size(); ++j) {
      if (i == j) continue;
      best = std::min(best, (cylinders[i].center - cylinders[j].center).norm());
    }
    total += best;
  }
  return total / cylinders.size();
}

Environment GenerateForest(std::uint64_t seed, double mean_spacing,
                           double cylinder_radius, const ForestExtent& extent) {
  if (!(cylinder_radius > 0.0)) {
    throw ValidationError("cylinder radius must be positive");
  }
  if (!(mean_spacing > 2.0 * cylinder_radius)) {
    throw ValidationError("mean spacing must exceed the cylinder diameter");
  }
  if (!(extent.x_max > extent.x_min) || !(extent.half_width > 0.0)) {
    throw ValidationError("forest extent is empty");
  }
  constexpr double kJitter = 0.3;  // lattice units
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-kJitter, kJitter);

  // Cover the extent assuming the rescaled lattice pitch is at least half the
  // requested spacing; the nearest-neighbor ratio of this lattice is ~0.8.
  const double min_pitch = 0.5 * mean_spacing;
  const int nx = static_cast<int>(std::ceil((extent.x_max - extent.x_min) / min_pitch)) + 1;
  const int ny = static_cast<int>(std::ceil(2.0 * extent.half_width / min_pitch)) + 1;
  std::vector<Eigen::Vector2d> unit;
  unit.reserve(static_cast<size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double jx = jitter(rng);
      const double jy = jitter(rng);
      unit.emplace_back(i + jx, j + jy);
    }
  }
  // mean nearest-neighbor distance of the unit lattice (local search suffices)
  double total = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Eigen::Vector2d& p = unit[i * ny + j];
      double best = kInf;
      for (int di = -2; di <= 2; ++di) {
        for (int dj = -2; dj <= 2; ++dj) {
          const int a = i + di, b = j + dj;
          if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= nx || b >= ny) continue;
          best = std::min(best, (unit[a * ny + b] - p).norm());
        }
      }
      total += best;
    }
  }
  const double pitch = mean_spacing / (total / unit.size());
  if ((1.0 - 2.0 * kJitter) * pitch <= 2.0 * cylinder_radius) {
    throw ValidationError("forest packing infeasible for this spacing");
  }

  Environment env;
  env.scenario = "forest";
  env.seed = seed;
  for (const Eigen::Vector2d& u : unit) {
    const Eigen::Vector2d c(extent.x_min + pitch * u.x(),
                            -extent.half_width + pitch * u.y());
    if (c.x() < extent.x_min || c.x() > extent.x_max ||
        std::abs(c.y()) > extent.half_width) {
      continue;
    }
    if (c.norm() < extent.spawn_clearance + cylinder_radius) continue;
    env.cylinders.push_back(Cylinder{c, cylinder_radius, extent.height});
  }
  return env;
}

Environment GenerateWindingHallway(std::uint64_t seed, double segment_length,
                                   double max_turn_deg, double width,
                                   int num_segments, double height) {
  if (!(width > 0.0)) throw ValidationError("hallway width must be positive");
  if (!(segment_length > 0.0) || num_segments < 1) {
    throw ValidationError("hallway needs positive segment length and count");
  }
  if (!(max_turn_deg >= 0.0 && max_turn_deg < 90.0)) {
    throw ValidationError("hallway max turn must lie in [0, 90) degrees");
  }
  std::mt19937_64 rng(seed);
  const double max_turn = max_turn_deg * M_PI / 180.0;
  std::uniform_real_distribution<double> turn(-max_turn, max_turn);

  // centerline: one segment behind the origin, then num_segments ahead
  std::vector<Eigen::Vector2d> points{{-segment_length, 0.0}, {0.0, 0.0}};
  std::vector<double> headings{0.0};
  double heading = 0.0;
  for (int k = 0; k < num_segments; ++k) {
    heading += max_turn > 0.0 ? turn(rng) : 0.0;
    headings.push_back(heading);
    points.push_back(points.back() +
                     segment_length * Eigen::Vector2d(std::cos(heading), std::sin(heading)));
  }

  const double half = 0.5 * width;
  auto normal = [](double h) { return Eigen::Vector2d(-std::sin(h), std::cos(h)); };
  std::vector<Eigen::Vector2d> left, right;
  for (size_t k = 0; k < points.size(); ++k) {
    Eigen::Vector2d offset;
    if (k == 0) {
      offset = half * normal(headings.front());
    } else if (k + 1 == points.size()) {
      offset = half * normal(headings.back());
    } else {
      // miter join keeps both walls closed at the corner
      const double h_in = headings[k - 1], h_out = headings[k];
      const Eigen::Vector2d bisector = (normal(h_in) + normal(h_out)).normalized();
      offset = bisector * (half / std::cos(0.5 * (h_out - h_in)));
    }
    left.push_back(points[k] + offset);
    right.push_back(points[k] - offset);
  }

  Environment env;
  env.scenario = max_turn_deg > 0.0 ? "winding_hallway" : "straight_hallway";
  env.seed = seed;
  for (size_t k = 0; k + 1 < points.size(); ++k) {
    env.walls.push_back(Wall{left[k], left[k + 1], height});
    env.walls.push_back(Wall{right[k], right[k + 1], height});
  }
  return env;
}

Environment StraightHallway(double width, int num_segments) {
  Environment env = GenerateWindingHallway(0, 5.0, 0.0, width, num_segments);
  env.scenario = "straight_hallway";
  return env;
}

bool IsKnownScenario(const std::string& name) {
  return name == "empty" || name == "cylinder" || name == "straight_hallway" ||
         name == "forest" || name == "winding_hallway";
}

Environment MakeScenario(const std::string& name, std::uint64_t seed) {
  if (name == "empty") return EmptyWorld();
  if (name == "cylinder") return CylinderScene();
  if (name == "straight_hallway") return StraightHallway();
  if (name == "forest") return GenerateForest(seed, 5.0, 0.5);
  if (name == "winding_hallway") {
    return GenerateWindingHallway(seed, 5.0, 30.0, 5.0);
  }
  throw ValidationError("unknown scenario '" + name + "'");
}

}  // namespace mpcgps
