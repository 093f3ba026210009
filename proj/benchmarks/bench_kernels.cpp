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

#include <benchmark/benchmark.h>

#include "volreg/models.hpp"
#include "volreg/similarity.hpp"
#include "volreg/syngen.hpp"
#include "volreg/volume.hpp"
#include "volreg/warp.hpp"

using namespace volreg;

namespace {

Dims cube(const benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  return {n, n, n};
}

DisplacementField3 field_for(Dims d) {
  DeformationSpec s;
  s.seed = 1;
  s.amplitude = 0.04 * d.min_extent();
  return generate_deformation(d, s);
}

void BM_ApplyDisplacement(benchmark::State& state) {
  const Dims d = cube(state);
  const Volume3 vol = make_phantom(d, 0);
  const DisplacementField3 u = field_for(d);
  for (auto _ : state) benchmark::DoNotOptimize(apply_displacement(vol, u));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(d.voxels()));
}
BENCHMARK(BM_ApplyDisplacement)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ExpVelocity(benchmark::State& state) {
  const Dims d = cube(state);
  const VelocityField3 v{field_for(d)};
  for (auto _ : state) benchmark::DoNotOptimize(exp_velocity(v));
}
BENCHMARK(BM_ExpVelocity)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LocalCc(benchmark::State& state) {
  const Dims d = cube(state);
  const Volume3 a = make_phantom(d, 0);
  const Volume3 b = apply_displacement(a, field_for(d));
  for (auto _ : state) benchmark::DoNotOptimize(local_cc(a, b, 9));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(d.voxels()));
}
BENCHMARK(BM_LocalCc)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Nmi(benchmark::State& state) {
  const Dims d = cube(state);
  const Volume3 a = make_phantom(d, 0);
  const Volume3 b = apply_displacement(a, field_for(d));
  for (auto _ : state) benchmark::DoNotOptimize(nmi(a, b, 64));
}
BENCHMARK(BM_Nmi)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LocalCcGradient(benchmark::State& state) {
  const Dims d = cube(state);
  const Volume3 a = make_phantom(d, 0);
  const Volume3 b = make_phantom(d, 1);
  const DisplacementField3 u = field_for(d);
  for (auto _ : state) benchmark::DoNotOptimize(objective_gradient(a, b, u, Objective::LocalCc, 9));
}
BENCHMARK(BM_LocalCcGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// One full control-point gradient sweep, the cost that dominates FFD runs.
void BM_NmiControlGradient(benchmark::State& state) {
  const Dims d = cube(state);
  const Volume3 a = make_phantom(d, 0);
  const Volume3 b = apply_displacement(a, field_for(d));
  const FfdGrid g(d, 8.0);
  for (auto _ : state) benchmark::DoNotOptimize(nmi_gradient_on_controls(a, b, g, 0.1, 64));
  state.counters["controls"] = static_cast<double>(g.control_count());
}
BENCHMARK(BM_NmiControlGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Downscale(benchmark::State& state) {
  const Dims d = cube(state);
  const Volume3 vol = make_phantom(d, 0);
  for (auto _ : state) benchmark::DoNotOptimize(downscale(vol, 0.15));
}
BENCHMARK(BM_Downscale)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
