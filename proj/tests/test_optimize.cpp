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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "volreg/error.hpp"
#include "volreg/models.hpp"
#include "volreg/optimize.hpp"
#include "volreg/syngen.hpp"
#include "volreg/volume.hpp"
#include "volreg/warp.hpp"

using namespace volreg;

namespace {

RegistrationConfig quick(Engine engine, int levels, int iterations) {
  RegistrationConfig cfg = RegistrationConfig::defaults_for(engine);
  cfg.levels = levels;
  cfg.iterations = iterations;
  return cfg;
}

// Phantom and a syngen-deformed copy of it.
std::pair<Volume3, Volume3> deformed_pair(Dims d, std::uint64_t seed) {
  const Volume3 fixed = make_phantom(d, seed);
  DeformationSpec spec;
  spec.seed = seed + 100;
  spec.amplitude = 0.04 * d.min_extent();
  return {fixed, apply_displacement(fixed, generate_deformation(d, spec))};
}

Vec3 field_at_centre(const DisplacementField3& u) {
  const Dims d = u.dims();
  return u.at(d.index(d.nx / 2, d.ny / 2, d.nz / 2));
}

}  // namespace

TEST_CASE("multi-resolution schedule") {
  CHECK(multires_schedule({64, 64, 64}, 3) == std::vector<Dims>{{16, 16, 16}, {32, 32, 32}, {64, 64, 64}});
  CHECK(multires_schedule({20, 30, 40}, 1) == std::vector<Dims>{{20, 30, 40}});
  // 17 * 0.5 = 8.5 -> 9, 33 * 0.5 = 16.5 -> 17, 65 * 0.5 = 32.5 -> 33.
  CHECK(multires_schedule({17, 33, 65}, 2) == std::vector<Dims>{{9, 17, 33}, {17, 33, 65}});
  CHECK_THROWS_AS(multires_schedule({20, 20, 20}, 3), InvalidArgument);
  CHECK_THROWS_AS(multires_schedule({20, 20, 20}, 0), InvalidArgument);
}

TEST_CASE("registration config") {
  for (Engine e : {Engine::Affine, Engine::Ffd, Engine::DenseDiffeomorphic, Engine::DenseVoxelmorphEnergy}) {
    CHECK(parse_engine(to_string(e)) == e);
    RegistrationConfig cfg = RegistrationConfig::defaults_for(e);
    cfg.seed = 77;
    cfg.iterations = 12;
    const RegistrationConfig back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
  }
  CHECK(RegistrationConfig::defaults_for(Engine::DenseVoxelmorphEnergy).optimizer == Optimizer::Adam);
  CHECK(RegistrationConfig::defaults_for(Engine::DenseVoxelmorphEnergy).weights.diffusion == 1.0);
  CHECK_THROWS_AS(config_from_json({{"engine", "ffd"}, {"itterations", 3}}), InvalidArgument);
  CHECK_THROWS_AS(config_from_json({{"engine", "warp-drive"}}), InvalidArgument);
  CHECK_THROWS_AS(config_from_json({{"levels", 0}}), InvalidArgument);
  CHECK_THROWS_AS(config_from_json({{"engine", "ffd"}, {"objective", "local_cc"}}), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), InvalidArgument);
}

TEST_CASE("input validation") {
  const Volume3 a = make_phantom({16, 16, 16}, 1);
  const Volume3 b = testing::random_volume({16, 16, 12}, 1);
  CHECK_THROWS_AS(register_pair(a, b, quick(Engine::Affine, 1, 5)), DimensionMismatch);
  RegistrationConfig bad = quick(Engine::DenseDiffeomorphic, 1, 5);
  bad.objective = Objective::Nmi;
  CHECK_THROWS_AS(register_pair(a, a, bad), InvalidArgument);
}

TEST_CASE("affine engine recovers a translation") {
  const Dims d{48, 48, 48};
  const Volume3 fixed = make_phantom(d, 4);
  const Vec3 t{3.0, -2.0, 1.0};
  // moving(x) = fixed(x - t), so the recovered displacement is +t.
  const Volume3 moving = apply_displacement(fixed, testing::constant_field(d, {-t[0], -t[1], -t[2]}));
  const RegistrationResult r = register_affine(fixed, moving, quick(Engine::Affine, 3, 60));
  REQUIRE(r.affine.has_value());
  const Vec3 u = field_at_centre(r.field);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(u[a] - t[a]) <= 0.5);
  CHECK(r.after.cc > r.before.cc);
}

TEST_CASE("affine engine recovers a small rotation") {
  const Dims d{48, 48, 48};
  const Volume3 fixed = make_phantom(d, 5);
  const double angle = 5.0 * std::numbers::pi / 180.0;
  const Vec3 c{23.5, 23.5, 23.5};
  const Volume3 moving =
      apply_displacement(fixed, affine_to_displacement(AffineTransform::rotation_z(-angle, c), d));
  const RegistrationResult r = register_affine(fixed, moving, quick(Engine::Affine, 3, 80));
  REQUIRE(r.affine.has_value());
  const double found = std::atan2(r.affine->linear(1, 0), r.affine->linear(0, 0));
  CHECK(std::abs(found - angle) * 180.0 / std::numbers::pi <= 1.0);
}

TEST_CASE("identical pairs stay at the identity") {
  const Dims d{24, 24, 24};
  const Volume3 v = make_phantom(d, 6);
  for (Engine e : {Engine::Affine, Engine::Ffd, Engine::DenseDiffeomorphic, Engine::DenseVoxelmorphEnergy}) {
    CAPTURE(to_string(e));
    RegistrationConfig cfg = quick(e, 2, 20);
    if (e == Engine::DenseVoxelmorphEnergy) cfg.weights.diffusion = 1.5;
    const RegistrationResult r = register_pair(v, v, cfg);
    CHECK(r.after.cc >= 1.0 - 1e-9);
    CHECK(r.field.max_magnitude() <= 0.05);
    if (e == Engine::DenseDiffeomorphic) {
      const Volume3 det = jacobian_determinant(r.field);
      CHECK(det.min_value() >= 0.99);
      CHECK(det.max_value() <= 1.01);
    }
    if (e == Engine::DenseVoxelmorphEnergy) CHECK(diffusion_energy(r.field).value <= 1e-4);
  }
}

TEST_CASE("registration never reports a worse result") {
  const Dims d{20, 20, 20};
  for (std::uint64_t s = 0; s < 2; ++s) {
    // Unrelated images: any optimisation of a local objective may hurt cc.
    const Volume3 a = make_phantom(d, 10 + s);
    const Volume3 b = testing::random_volume(d, 20 + s, 0.0, 1000.0);
    for (Engine e : {Engine::Affine, Engine::Ffd, Engine::DenseDiffeomorphic, Engine::DenseVoxelmorphEnergy}) {
      CAPTURE(to_string(e));
      CAPTURE(s);
      const RegistrationResult r = register_pair(a, b, quick(e, 1, 10));
      CHECK(r.after.cc >= r.before.cc - 1e-6);
      if (r.fell_back) CHECK(r.field.max_magnitude() == 0.0);
    }
  }
}

TEST_CASE("registration is deterministic") {
  const auto [fixed, moving] = deformed_pair({24, 24, 24}, 3);
  for (Engine e : {Engine::Ffd, Engine::DenseDiffeomorphic, Engine::DenseVoxelmorphEnergy}) {
    CAPTURE(to_string(e));
    const RegistrationConfig cfg = quick(e, 2, 15);
    const RegistrationResult r1 = register_pair(fixed, moving, cfg);
    const RegistrationResult r2 = register_pair(fixed, moving, cfg);
    CHECK(std::abs(r1.after.cc - r2.after.cc) <= 1e-10);
    CHECK(std::abs(r1.after.nmi - r2.after.nmi) <= 1e-10);
    CHECK(std::abs(r1.after.msd - r2.after.msd) <= 1e-10);
    CHECK(r1.iterations_run == r2.iterations_run);
  }
}

TEST_CASE("diffeomorphic engine on a deformed phantom") {
  const auto [fixed, moving] = deformed_pair({48, 48, 48}, 7);
  const RegistrationResult r = register_dense_diffeomorphic(fixed, moving, quick(Engine::DenseDiffeomorphic, 3, 40));
  CHECK(local_cc(fixed, apply_displacement(moving, r.field), 9) >= 0.9);
  CHECK(positive_jacobian_fraction(jacobian_determinant(r.field)) >= 0.999);
  CHECK(r.after.cc > r.before.cc);
  REQUIRE(r.velocity.has_value());

  // More iterations never end at a worse objective on the finest level.
  const RegistrationResult shorter = register_dense_diffeomorphic(fixed, moving, quick(Engine::DenseDiffeomorphic, 3, 20));
  CHECK(r.traces.back().objective.back() <= shorter.traces.back().objective.back() + 1e-6);
}

TEST_CASE("dense energy engine: regularisation and trace") {
  const auto [fixed, moving] = deformed_pair({48, 48, 48}, 8);
  RegistrationConfig loose = quick(Engine::DenseVoxelmorphEnergy, 3, 40);
  RegistrationConfig tight = loose;
  tight.weights.diffusion = 1.5;
  const RegistrationResult a = register_voxelmorph_energy(fixed, moving, loose);
  const RegistrationResult b = register_voxelmorph_energy(fixed, moving, tight);
  CHECK(diffusion_energy(b.field).value < diffusion_energy(a.field).value);
  CHECK(a.after.cc > a.before.cc);

  int steps = 0, non_increasing = 0;
  for (const LevelTrace& t : a.traces)
    for (std::size_t i = 1; i < t.objective.size(); ++i) {
      ++steps;
      if (t.objective[i] <= t.objective[i - 1]) ++non_increasing;
    }
  REQUIRE(steps > 0);
  CHECK(non_increasing >= 0.9 * steps);
}

TEST_CASE("FFD engine improves a deformed phantom") {
  const auto [fixed, moving] = deformed_pair({24, 24, 24}, 9);
  RegistrationConfig cfg = quick(Engine::Ffd, 2, 15);
  cfg.control_spacing = 4.0;
  const RegistrationResult r = register_ffd(fixed, moving, cfg);
  REQUIRE(r.ffd.has_value());
  CHECK(r.after.nmi > r.before.nmi);
  CHECK(r.after.cc > r.before.cc);
  // The returned field is the grid evaluated at full resolution.
  const DisplacementField3 u = ffd_to_displacement(*r.ffd, fixed.dims());
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < u.size(); ++n)
      worst = std::max(worst, static_cast<double>(std::abs(u.component(c)[n] - r.field.component(c)[n])));
  CHECK(worst <= 1e-5);
}

TEST_CASE("coarse-only runs are faster than full multi-resolution runs") {
  const auto [fixed, moving] = deformed_pair({32, 32, 32}, 11);
  const RegistrationResult coarse = register_pair(fixed, moving, quick(Engine::DenseVoxelmorphEnergy, 1, 10));
  const RegistrationResult full = register_pair(fixed, moving, quick(Engine::DenseVoxelmorphEnergy, 3, 100));
  CHECK(coarse.seconds > 0.0);
  CHECK(coarse.seconds < full.seconds);
}
