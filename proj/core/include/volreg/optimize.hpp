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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "volreg/field.hpp"
#include "volreg/models.hpp"
#include "volreg/similarity.hpp"
#include "volreg/volume.hpp"

namespace volreg {

enum class Engine { Affine, Ffd, DenseDiffeomorphic, DenseVoxelmorphEnergy };

std::string to_string(Engine e);
Engine parse_engine(const std::string& name);

enum class Optimizer { GradientDescent, Adam };

std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

/// Registration settings. Iterations are counted per pyramid level.
/// A step of 0 selects the engine's default (see default_step).
struct RegistrationConfig {
  Engine engine = Engine::Ffd;
  Objective objective = Objective::Nmi;
  int levels = 3;
  int iterations = 100;
  Optimizer optimizer = Optimizer::GradientDescent;
  double step = 0.0;
  RegularizerWeights weights{};
  int window = 9;
  int bins = 64;
  std::uint64_t seed = 0;
  double control_spacing = 8.0;    // FFD lattice spacing, full-resolution voxels
  double nmi_fd_step = 0.1;        // control-point finite-difference step, voxels
  double update_sigma = 1.0;       // Gaussian smoothing of diffeomorphic updates, voxels
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  /// Engine defaults: affine/msd, ffd/nmi, dense engines/local_cc with the
  /// optimiser each engine family uses.
  static RegistrationConfig defaults_for(Engine engine);

  /// Throws InvalidArgument on out-of-range values or an engine/objective
  /// combination the engine cannot optimise.
  void validate() const;
};

double default_step(Engine engine);

/// FFD spacing for a resolution annotation: 8 voxels at 10%, 12 at 15%.
double default_control_spacing(int scale_percent);

inline constexpr int kConfigSchemaVersion = 1;

/// JSON round-trip. Unknown keys are rejected; missing keys take the
/// engine defaults.
RegistrationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RegistrationConfig& cfg);

struct LevelTrace {
  Dims dims{};
  std::vector<double> objective;  // initial value, then one entry per accepted update
  int iterations = 0;
  bool converged = false;
};

struct RegistrationResult {
  DisplacementField3 field;  // full resolution
  std::vector<LevelTrace> traces;
  SimilarityReport before;
  SimilarityReport after;
  double seconds = 0.0;
  int iterations_run = 0;
  bool converged = false;
  bool fell_back = false;  // identity substituted because the optimised field degraded cc
  std::optional<AffineTransform> affine;
  std::optional<FfdGrid> ffd;
  std::optional<VelocityField3> velocity;
};

/// Pyramid grids, coarsest first; each level halves the next finer one using
/// the downscale rounding rule. Throws when the coarsest grid drops below 8.
std::vector<Dims> multires_schedule(Dims dims, int levels);

RegistrationResult register_affine(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg);
RegistrationResult register_ffd(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg);
RegistrationResult register_dense_diffeomorphic(const Volume3& fixed, const Volume3& moving,
                                                const RegistrationConfig& cfg);
RegistrationResult register_voxelmorph_energy(const Volume3& fixed, const Volume3& moving,
                                              const RegistrationConfig& cfg);

/// Dispatches on cfg.engine.
RegistrationResult register_pair(const Volume3& fixed, const Volume3& moving, const RegistrationConfig& cfg);

nlohmann::json result_metrics_json(const RegistrationResult& r, const RegistrationConfig& cfg);

}  // namespace volreg
