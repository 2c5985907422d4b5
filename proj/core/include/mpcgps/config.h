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

#ifndef MPCGPS_CONFIG_H_
#define MPCGPS_CONFIG_H_

#include <cstdint>
#include <string>

#include "mpcgps/gps.h"

namespace mpcgps {

// Test-time flights of a trained policy.
struct TestSpec {
  std::string scenario = "winding_hallway";
  std::uint64_t first_seed = 1;  // run r uses environment seed first_seed + r
  int runs = 20;
  double episode_cap_s = 100.0;

  void Validate() const;
};

struct ExperimentConfig {
  GpsConfig gps;
  TestSpec test;
  std::string output_dir = "runs/default";

  void Validate() const;
};

// Parses the JSON experiment description. Unknown keys and out-of-range values
// raise ValidationError naming the offending field; syntax errors report the
// line and column. Missing keys keep their defaults.
ExperimentConfig ParseExperimentConfig(const std::string& text,
                                       const std::string& source = "<config>");
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Canonical JSON rendering; parsing it yields an identical config.
std::string ExperimentConfigToJson(const ExperimentConfig& config);

}  // namespace mpcgps

#endif  // MPCGPS_CONFIG_H_
