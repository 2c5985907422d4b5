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

#include "mpcgps/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpcgps/types.h"

namespace mpcgps {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void FieldError(const std::string& path, const std::string& what) {
  throw ValidationError("config field '" + path + "': " + what);
}

// Reads one JSON object, remembering which keys were used so that leftovers
// can be rejected.
class Section {
 public:
  Section(const Json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) FieldError(path_, "expected an object");
  }

  Section Child(const std::string& key) {
    used_.insert(key);
    const Json* child = Find(key);
    return Section(child, Path(key));
  }

  void Get(const std::string& key, double* out) {
    if (const Json* v = Use(key)) {
      if (!v->is_number()) FieldError(Path(key), "expected a number");
      *out = v->get<double>();
    }
  }
  void Get(const std::string& key, int* out) {
    if (const Json* v = Use(key)) {
      if (!v->is_number_integer()) FieldError(Path(key), "expected an integer");
      *out = v->get<int>();
    }
  }
  void Get(const std::string& key, std::uint64_t* out) {
    if (const Json* v = Use(key)) {
      if (!v->is_number_unsigned()) FieldError(Path(key), "expected a non-negative integer");
      *out = v->get<std::uint64_t>();
    }
  }
  void Get(const std::string& key, bool* out) {
    if (const Json* v = Use(key)) {
      if (!v->is_boolean()) FieldError(Path(key), "expected true or false");
      *out = v->get<bool>();
    }
  }
  void Get(const std::string& key, std::string* out) {
    if (const Json* v = Use(key)) {
      if (!v->is_string()) FieldError(Path(key), "expected a string");
      *out = v->get<std::string>();
    }
  }
  template <int N>
  void Get(const std::string& key, Eigen::Matrix<double, N, 1>* out) {
    if (const Json* v = Use(key)) {
      if (!v->is_array() || v->size() != N) {
        FieldError(Path(key), "expected an array of " + std::to_string(N) + " numbers");
      }
      for (int i = 0; i < N; ++i) {
        if (!(*v)[i].is_number()) FieldError(Path(key), "expected numbers");
        (*out)(i) = (*v)[i].get<double>();
      }
    }
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void Finish() const {
    if (node_ == nullptr) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!used_.count(it.key())) FieldError(Path(it.key()), "unknown field");
    }
  }

 private:
  const Json* Find(const std::string& key) const {
    if (node_ == nullptr) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }
  const Json* Use(const std::string& key) {
    used_.insert(key);
    return Find(key);
  }

  const Json* node_;
  std::string path_;
  std::set<std::string> used_;
};

const char* SideName(RotorSide side) {
  switch (side) {
    case RotorSide::kLeft: return "left";
    case RotorSide::kRight: return "right";
    case RotorSide::kFront: return "front";
    case RotorSide::kRear: return "rear";
  }
  return "left";
}

RotorSide ParseSide(const std::string& name, const std::string& path) {
  for (RotorSide s : {RotorSide::kLeft, RotorSide::kRight, RotorSide::kFront,
                      RotorSide::kRear}) {
    if (name == SideName(s)) return s;
  }
  FieldError(path, "unknown rotor side '" + name + "'");
}

const char* ErrorName(ModelErrorSpec::Variant v) {
  switch (v) {
    case ModelErrorSpec::Variant::kNone: return "none";
    case ModelErrorSpec::Variant::kMassOffset: return "mass_offset";
    case ModelErrorSpec::Variant::kRotorBias: return "rotor_bias";
    case ModelErrorSpec::Variant::kParameterRounding: return "parameter_rounding";
  }
  return "none";
}

void ReadSolver(Section s, ILQGOptions* o) {
  s.Get("max_iterations", &o->max_iterations);
  s.Get("relative_tolerance", &o->relative_tolerance);
  s.Get("min_regularization", &o->min_regularization);
  s.Get("max_regularization", &o->max_regularization);
  s.Get("regularization_increase", &o->regularization_increase);
  s.Get("regularization_decrease", &o->regularization_decrease);
  s.Get("line_search_steps", &o->line_search_steps);
  s.Finish();
}

Json WriteSolver(const ILQGOptions& o) {
  return {{"max_iterations", o.max_iterations},
          {"relative_tolerance", o.relative_tolerance},
          {"min_regularization", o.min_regularization},
          {"max_regularization", o.max_regularization},
          {"regularization_increase", o.regularization_increase},
          {"regularization_decrease", o.regularization_decrease},
          {"line_search_steps", o.line_search_steps}};
}

Json Vec(const Eigen::Vector3d& v) { return Json::array({v(0), v(1), v(2)}); }

ExperimentConfig FromJson(const Json& root) {
  ExperimentConfig c;
  GpsConfig& g = c.gps;
  Section top(&root, "");
  top.Get("scenario", &g.scenario);
  top.Get("scenario_seed", &g.scenario_seed);
  std::string variant = TrainingVariantName(g.variant);
  top.Get("variant", &variant);
  try {
    g.variant = ParseTrainingVariant(variant);
  } catch (const ValidationError& e) {
    FieldError("variant", e.what());
  }
  top.Get("seed", &g.seed);
  top.Get("threads", &g.threads);
  top.Get("output_dir", &c.output_dir);

  {
    Section s = top.Child("model_error");
    std::string type = "none";
    s.Get("type", &type);
    double mass = 0.0, fraction = 0.0;
    std::string side = "left";
    s.Get("mass_offset_kg", &mass);
    s.Get("rotor_bias_fraction", &fraction);
    s.Get("rotor_side", &side);
    s.Finish();
    if (type == "none") {
      g.model_error = ModelErrorSpec::None();
    } else if (type == "mass_offset") {
      g.model_error = ModelErrorSpec::MassOffset(mass);
    } else if (type == "rotor_bias") {
      g.model_error = ModelErrorSpec::RotorBias(fraction, ParseSide(side, "model_error.rotor_side"));
    } else if (type == "parameter_rounding") {
      g.model_error = ModelErrorSpec::ParameterRounding();
    } else {
      FieldError("model_error.type", "unknown model error '" + type + "'");
    }
  }
  {
    Section s = top.Child("gps");
    s.Get("iterations", &g.iterations);
    s.Get("initial_states", &g.num_initial_states);
    s.Get("samples_per_state", &g.samples_per_state);
    s.Get("horizon_steps", &g.horizon);
    s.Get("dt_s", &g.dt);
    s.Get("initial_jitter_m", &g.initial_jitter);
    s.Get("plant_noise_variance", &g.plant_noise_variance);
    s.Get("model_noise_variance", &g.model_noise_variance);
    s.Finish();
  }
  {
    Section s = top.Child("vehicle");
    VehicleParams& v = g.vehicle;
    s.Get("mass_kg", &v.mass);
    s.Get("inertia_kgm2", &v.inertia);
    s.Get("arm_length_m", &v.arm_length);
    s.Get("thrust_coefficient_n_per_radps2", &v.thrust_coefficient);
    s.Get("torque_coefficient_nm_per_radps2", &v.torque_coefficient);
    s.Get("linear_drag_n_per_mps", &v.linear_drag);
    s.Get("rotor_gains", &v.rotor_gains);
    s.Get("gravity_mps2", &v.gravity);
    s.Get("max_rotor_velocity_radps", &v.max_rotor_velocity);
    s.Finish();
  }
  {
    Section s = top.Child("targets");
    TaskTargets& t = g.targets;
    s.Get("velocity_mps", &t.velocity);
    s.Get("height_m", &t.height);
    Eigen::Vector4d q(t.orientation.w(), t.orientation.x(), t.orientation.y(),
                      t.orientation.z());
    s.Get("orientation_wxyz", &q);
    t.orientation = Eigen::Quaterniond(q(0), q(1), q(2), q(3));
    s.Get("angular_velocity_radps", &t.angular_velocity);
    Eigen::Vector4d hover = t.hover;
    s.Get("hover_radps", &hover);
    t.hover = hover;
    s.Get("safe_distance_m", &t.safe_distance);
    s.Finish();
  }
  {
    Section s = top.Child("cost_weights");
    CostWeights& w = g.weights;
    s.Get("velocity", &w.velocity);
    s.Get("height", &w.height);
    s.Get("orientation", &w.orientation);
    s.Get("angular_velocity", &w.angular_velocity);
    s.Get("action", &w.action);
    s.Get("obstacle", &w.obstacle);
    s.Finish();
  }
  {
    Section s = top.Child("sensor");
    s.Get("max_range_m", &g.sensor.max_range);
    s.Get("field_of_view_rad", &g.sensor.field_of_view);
    s.Get("range_noise_stddev_m", &g.sensor.range_noise_stddev);
    s.Finish();
  }
  {
    Section s = top.Child("crash");
    s.Get("vehicle_radius_m", &g.crash.vehicle_radius);
    s.Get("half_height_m", &g.crash.half_height);
    s.Get("overflight_margin_m", &g.crash.overflight_margin);
    s.Finish();
  }
  ReadSolver(top.Child("offline_solver"), &g.offline);
  {
    Section s = top.Child("mpc");
    s.Get("horizon_steps", &g.mpc.horizon);
    s.Get("solver_iterations", &g.mpc.iterations);
    s.Get("deterministic", &g.mpc.deterministic);
    s.Get("covariance_regularization", &g.mpc.covariance_regularization);
    ReadSolver(s.Child("solver"), &g.mpc.solver);
    s.Finish();
  }
  {
    Section s = top.Child("train");
    s.Get("steps", &g.train.steps);
    s.Get("batch_size", &g.train.batch_size);
    s.Get("learning_rate", &g.train.learning_rate);
    s.Get("beta1", &g.train.beta1);
    s.Get("beta2", &g.train.beta2);
    s.Get("epsilon", &g.train.epsilon);
    s.Get("report_every", &g.train.report_every);
    s.Finish();
  }
  {
    Section s = top.Child("policy_fit");
    s.Get("mixture_components", &g.fit.mixture_components);
    s.Get("em_iterations", &g.fit.em_iterations);
    s.Get("em_tolerance", &g.fit.em_tolerance);
    s.Get("regularization", &g.fit.regularization);
    s.Get("prior_strength", &g.fit.prior_strength);
    s.Get("min_samples", &g.fit.min_samples);
    s.Finish();
  }
  {
    Section s = top.Child("duals");
    s.Get("lambda_step", &g.duals.lambda_step);
    s.Get("lambda_bound", &g.duals.lambda_bound);
    s.Get("kl_target_nats", &g.duals.kl_target);
    s.Get("nu_min", &g.duals.nu_min);
    s.Get("nu_max", &g.duals.nu_max);
    s.Get("initial_nu", &g.duals.initial_nu);
    s.Finish();
  }
  {
    Section s = top.Child("test");
    s.Get("scenario", &c.test.scenario);
    s.Get("first_seed", &c.test.first_seed);
    s.Get("runs", &c.test.runs);
    s.Get("episode_cap_s", &c.test.episode_cap_s);
    s.Finish();
  }
  top.Finish();
  return c;
}

Json ToJson(const ExperimentConfig& c) {
  const GpsConfig& g = c.gps;
  const ModelErrorSpec& e = g.model_error;
  Json j;
  j["scenario"] = g.scenario;
  j["scenario_seed"] = g.scenario_seed;
  j["variant"] = TrainingVariantName(g.variant);
  j["seed"] = g.seed;
  j["threads"] = g.threads;
  j["output_dir"] = c.output_dir;
  j["model_error"] = {{"type", ErrorName(e.variant)},
                      {"mass_offset_kg", e.mass_offset},
                      {"rotor_bias_fraction", e.rotor_bias},
                      {"rotor_side", SideName(e.side)}};
  j["gps"] = {{"iterations", g.iterations},
              {"initial_states", g.num_initial_states},
              {"samples_per_state", g.samples_per_state},
              {"horizon_steps", g.horizon},
              {"dt_s", g.dt},
              {"initial_jitter_m", g.initial_jitter},
              {"plant_noise_variance", g.plant_noise_variance},
              {"model_noise_variance", g.model_noise_variance}};
  const VehicleParams& v = g.vehicle;
  j["vehicle"] = {{"mass_kg", v.mass},
                  {"inertia_kgm2", Vec(v.inertia)},
                  {"arm_length_m", v.arm_length},
                  {"thrust_coefficient_n_per_radps2", v.thrust_coefficient},
                  {"torque_coefficient_nm_per_radps2", v.torque_coefficient},
                  {"linear_drag_n_per_mps", v.linear_drag},
                  {"rotor_gains", Json::array({v.rotor_gains(0), v.rotor_gains(1),
                                               v.rotor_gains(2), v.rotor_gains(3)})},
                  {"gravity_mps2", v.gravity},
                  {"max_rotor_velocity_radps", v.max_rotor_velocity}};
  const TaskTargets& t = g.targets;
  j["targets"] = {
      {"velocity_mps", Vec(t.velocity)},
      {"height_m", t.height},
      {"orientation_wxyz", Json::array({t.orientation.w(), t.orientation.x(),
                                        t.orientation.y(), t.orientation.z()})},
      {"angular_velocity_radps", Vec(t.angular_velocity)},
      {"hover_radps", Json::array({t.hover(0), t.hover(1), t.hover(2), t.hover(3)})},
      {"safe_distance_m", t.safe_distance}};
  const CostWeights& w = g.weights;
  j["cost_weights"] = {{"velocity", w.velocity},
                       {"height", w.height},
                       {"orientation", w.orientation},
                       {"angular_velocity", w.angular_velocity},
                       {"action", w.action},
                       {"obstacle", w.obstacle}};
  j["sensor"] = {{"max_range_m", g.sensor.max_range},
                 {"field_of_view_rad", g.sensor.field_of_view},
                 {"range_noise_stddev_m", g.sensor.range_noise_stddev}};
  j["crash"] = {{"vehicle_radius_m", g.crash.vehicle_radius},
                {"half_height_m", g.crash.half_height},
                {"overflight_margin_m", g.crash.overflight_margin}};
  j["offline_solver"] = WriteSolver(g.offline);
  j["mpc"] = {{"horizon_steps", g.mpc.horizon},
              {"solver_iterations", g.mpc.iterations},
              {"deterministic", g.mpc.deterministic},
              {"covariance_regularization", g.mpc.covariance_regularization},
              {"solver", WriteSolver(g.mpc.solver)}};
  j["train"] = {{"steps", g.train.steps},
                {"batch_size", g.train.batch_size},
                {"learning_rate", g.train.learning_rate},
                {"beta1", g.train.beta1},
                {"beta2", g.train.beta2},
                {"epsilon", g.train.epsilon},
                {"report_every", g.train.report_every}};
  j["policy_fit"] = {{"mixture_components", g.fit.mixture_components},
                     {"em_iterations", g.fit.em_iterations},
                     {"em_tolerance", g.fit.em_tolerance},
                     {"regularization", g.fit.regularization},
                     {"prior_strength", g.fit.prior_strength},
                     {"min_samples", g.fit.min_samples}};
  j["duals"] = {{"lambda_step", g.duals.lambda_step},
                {"lambda_bound", g.duals.lambda_bound},
                {"kl_target_nats", g.duals.kl_target},
                {"nu_min", g.duals.nu_min},
                {"nu_max", g.duals.nu_max},
                {"initial_nu", g.duals.initial_nu}};
  j["test"] = {{"scenario", c.test.scenario},
               {"first_seed", c.test.first_seed},
               {"runs", c.test.runs},
               {"episode_cap_s", c.test.episode_cap_s}};
  return j;
}

}  // namespace

void TestSpec::Validate() const {
  if (!IsKnownScenario(scenario)) {
    throw ValidationError("config field 'test.scenario': unknown scenario '" + scenario + "'");
  }
  if (runs < 1) throw ValidationError("config field 'test.runs': must be >= 1");
  if (!(episode_cap_s > 0.0)) {
    throw ValidationError("config field 'test.episode_cap_s': must be positive");
  }
}

void ExperimentConfig::Validate() const {
  gps.Validate();
  ApplyModelError(gps.vehicle, gps.model_error).Validate();
  test.Validate();
  if (output_dir.empty()) throw ValidationError("config field 'output_dir': empty");
}

ExperimentConfig ParseExperimentConfig(const std::string& text,
                                       const std::string& source) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // locate the byte offset reported by the parser
    int line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(source + ":" + std::to_string(line) + ":" +
                          std::to_string(column) + ": invalid JSON");
  }
  ExperimentConfig config;
  try {
    config = FromJson(root);
    config.Validate();
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseExperimentConfig(text.str(), path);
}

std::string ExperimentConfigToJson(const ExperimentConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

}  // namespace mpcgps
