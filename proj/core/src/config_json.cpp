/*
Copyright 2026 The volreg Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <set>
#include <string>

#include "volreg/error.hpp"
#include "volreg/optimize.hpp"

namespace volreg {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "schema_version", "engine",        "objective",  "levels",       "iterations",
      "optimizer",      "step",          "lambda_diffusion", "lambda_bending", "window",
      "bins",           "seed",          "control_spacing",  "nmi_fd_step",    "update_sigma",
      "adam_beta1",     "adam_beta2",    "adam_epsilon"};
  return keys;
}

template <class T>
T read(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

RegistrationConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("registration config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().contains(item.key())) {
      throw InvalidArgument("unknown registration config key '" + item.key() + "'");
    }
  }
  if (j.contains("schema_version") && read<int>(j, "schema_version") != kConfigSchemaVersion) {
    throw InvalidArgument("unsupported config schema_version " + j.at("schema_version").dump());
  }
  const Engine engine = j.contains("engine") ? parse_engine(read<std::string>(j, "engine")) : Engine::Ffd;
  RegistrationConfig cfg = RegistrationConfig::defaults_for(engine);
  if (j.contains("objective")) cfg.objective = parse_objective(read<std::string>(j, "objective"));
  if (j.contains("levels")) cfg.levels = read<int>(j, "levels");
  if (j.contains("iterations")) cfg.iterations = read<int>(j, "iterations");
  if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(read<std::string>(j, "optimizer"));
  if (j.contains("step")) cfg.step = read<double>(j, "step");
  if (j.contains("lambda_diffusion")) cfg.weights.diffusion = read<double>(j, "lambda_diffusion");
  if (j.contains("lambda_bending")) cfg.weights.bending = read<double>(j, "lambda_bending");
  if (j.contains("window")) cfg.window = read<int>(j, "window");
  if (j.contains("bins")) cfg.bins = read<int>(j, "bins");
  if (j.contains("seed")) cfg.seed = read<std::uint64_t>(j, "seed");
  if (j.contains("control_spacing")) cfg.control_spacing = read<double>(j, "control_spacing");
  if (j.contains("nmi_fd_step")) cfg.nmi_fd_step = read<double>(j, "nmi_fd_step");
  if (j.contains("update_sigma")) cfg.update_sigma = read<double>(j, "update_sigma");
  if (j.contains("adam_beta1")) cfg.adam_beta1 = read<double>(j, "adam_beta1");
  if (j.contains("adam_beta2")) cfg.adam_beta2 = read<double>(j, "adam_beta2");
  if (j.contains("adam_epsilon")) cfg.adam_epsilon = read<double>(j, "adam_epsilon");
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const RegistrationConfig& cfg) {
  return {
      {"schema_version", kConfigSchemaVersion},
      {"engine", to_string(cfg.engine)},
      {"objective", to_string(cfg.objective)},
      {"levels", cfg.levels},
      {"iterations", cfg.iterations},
      {"optimizer", to_string(cfg.optimizer)},
      {"step", cfg.step},
      {"lambda_diffusion", cfg.weights.diffusion},
      {"lambda_bending", cfg.weights.bending},
      {"window", cfg.window},
      {"bins", cfg.bins},
      {"seed", cfg.seed},
      {"control_spacing", cfg.control_spacing},
      {"nmi_fd_step", cfg.nmi_fd_step},
      {"update_sigma", cfg.update_sigma},
      {"adam_beta1", cfg.adam_beta1},
      {"adam_beta2", cfg.adam_beta2},
      {"adam_epsilon", cfg.adam_epsilon},
  };
}

namespace {

nlohmann::json report_json(const SimilarityReport& r) {
  return {{"cc", r.cc}, {"mi", r.mi}, {"nmi", r.nmi}, {"msd", r.msd}};
}

}  // namespace

nlohmann::json result_metrics_json(const RegistrationResult& r, const RegistrationConfig& cfg) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& t : r.traces) {
    levels.push_back({{"dims", {t.dims.nx, t.dims.ny, t.dims.nz}},
                      {"iterations", t.iterations},
                      {"converged", t.converged},
                      {"objective_first", t.objective.empty() ? 0.0 : t.objective.front()},
                      {"objective_last", t.objective.empty() ? 0.0 : t.objective.back()}});
  }
  nlohmann::json j{{"schema_version", kConfigSchemaVersion},
                   {"engine", to_string(cfg.engine)},
                   {"objective", to_string(cfg.objective)},
                   {"before", report_json(r.before)},
                   {"after", report_json(r.after)},
                   {"seconds", r.seconds},
                   {"iterations_run", r.iterations_run},
                   {"converged", r.converged},
                   {"fell_back", r.fell_back},
                   {"levels", levels},
                   {"config", config_to_json(cfg)}};
  if (r.affine) j["affine"] = r.affine->m;
  return j;
}

}  // namespace volreg
