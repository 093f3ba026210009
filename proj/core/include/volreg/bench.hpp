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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "volreg/optimize.hpp"
#include "volreg/volume.hpp"

namespace volreg {

inline constexpr int kPlanSchemaVersion = 1;
inline constexpr const char* kBenchCsvHeader = "engine,resolution,target,iterations,cc,mi,nmi,seconds";

struct EngineRun {
  std::string name;  // row label; several runs may share an engine
  RegistrationConfig config;
};

struct ExperimentPlan {
  std::string reference;
  std::vector<std::string> targets;
  std::vector<EngineRun> engines;
  std::vector<double> resolutions{0.10, 0.15};
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::map<std::string, std::filesystem::path> volumes;  // id -> NIfTI path

  void validate() const;
};

/// Plan JSON. Relative volume paths and output_dir are resolved against base_dir.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::filesystem::path& path);

using VolumeResolver = std::function<Volume3(const std::string& id)>;

/// Loads plan.volumes[id]; unknown ids throw InvalidArgument.
VolumeResolver file_resolver(const ExperimentPlan& plan);

struct BenchRow {
  std::string engine;
  double resolution = 1.0;
  std::string target;
  int iterations = 0;
  double cc = 0.0;
  double mi = 0.0;
  double nmi = 0.0;
  double seconds = 0.0;
  SimilarityReport before;
  bool fell_back = false;
};

struct OverlayPair {
  std::string key;  // file stem shared by the row's PNG and slice files
  Volume3 reference;
  Volume3 warped;
};

struct BenchReport {
  std::string reference;
  std::uint64_t seed = 0;
  std::vector<BenchRow> rows;
  std::vector<std::string> failures;  // "engine,resolution,target: cause"
  std::vector<OverlayPair> overlays;
  bool concurrent_rows = false;  // rows timed while other rows ran
};

/// Runs every (engine, resolution, target) in plan order. Engine failures
/// become entries in failures; the run continues.
BenchReport run_experiment(const ExperimentPlan& plan, const VolumeResolver& resolve);
BenchReport run_experiment(const ExperimentPlan& plan);

struct SwapDelta {
  std::string engine;
  double resolution = 1.0;
  std::string target;
  double cc_original = 0.0;
  double cc_alternate = 0.0;
  double mi_original = 0.0;
  double mi_alternate = 0.0;
  double delta_cc() const { return cc_alternate - cc_original; }
  double delta_mi() const { return mi_alternate - mi_original; }
};

struct PairedReport {
  std::string original_reference;
  std::string alternate_reference;
  BenchReport original;
  BenchReport alternate;
  std::vector<SwapDelta> deltas;  // rows present in both runs
};

PairedReport reference_swap_test(const ExperimentPlan& plan, const std::string& alternate_reference,
                                 const VolumeResolver& resolve);
PairedReport reference_swap_test(const ExperimentPlan& plan, const std::string& alternate_reference);

/// Mean |recovered - truth| over voxels of mask_source brighter than 5% of its maximum.
double recovery_error(const DisplacementField3& recovered, const DisplacementField3& truth,
                      const Volume3& mask_source);
double recovery_error(const RegistrationResult& result, const DisplacementField3& truth, const Volume3& mask_source);

/// Whole seconds, rounded to nearest, as HH:MM:SS. Hours grow past two digits if needed.
std::string format_hms(double seconds);

std::string report_csv(const BenchReport& report);
/// Markdown rendered from CSV text: metric table plus HH:MM:SS timing table.
std::string render_markdown(const std::string& csv, const std::vector<std::string>& failures = {});

/// Writes results.csv, results.md, report.json, overlays/<key>.png and the
/// slices the overlays were drawn from (slices/<key>_ref.nii, _warped.nii).
void emit_report(const BenchReport& report, const std::filesystem::path& dir);

std::string swap_csv(const PairedReport& paired);
void emit_paired_report(const PairedReport& paired, const std::filesystem::path& dir);

/// Rebuilds results.md and overlay PNGs in dir from results.csv and stored slices.
void rerender_report(const std::filesystem::path& dir);

}  // namespace volreg
