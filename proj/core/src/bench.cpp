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

#include "volreg/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "volreg/error.hpp"
#include "volreg/nifti.hpp"
#include "volreg/png_writer.hpp"
#include "volreg/rng.hpp"
#include "volreg/warp.hpp"

namespace volreg {

void ExperimentPlan::validate() const {
  if (reference.empty()) throw InvalidArgument("plan has no reference");
  if (targets.empty()) throw InvalidArgument("plan has no targets");
  if (std::find(targets.begin(), targets.end(), reference) != targets.end()) {
    throw InvalidArgument("reference '" + reference + "' is also listed as a target");
  }
  if (engines.empty()) throw InvalidArgument("plan has no engines");
  std::set<std::string> names;
  for (const auto& e : engines) {
    if (e.name.empty()) throw InvalidArgument("engine run without a name");
    if (!names.insert(e.name).second) throw InvalidArgument("duplicate engine run name '" + e.name + "'");
    e.config.validate();
  }
  if (resolutions.empty()) throw InvalidArgument("plan has no resolutions");
  for (double r : resolutions) {
    if (!(r > 0.0) || r > 1.0) throw InvalidArgument("resolution factor must lie in (0, 1]");
  }
}

ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("plan must be a JSON object");
  static const std::set<std::string> keys{"schema_version", "reference", "targets",    "engines",
                                          "resolutions",    "output_dir", "seed",      "volumes"};
  for (const auto& item : j.items()) {
    if (!keys.contains(item.key())) throw InvalidArgument("unknown plan key '" + item.key() + "'");
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  ExperimentPlan plan;
  try {
    if (j.value("schema_version", kPlanSchemaVersion) != kPlanSchemaVersion) {
      throw InvalidArgument("unsupported plan schema_version " + j.at("schema_version").dump());
    }
    plan.reference = j.at("reference").get<std::string>();
    plan.targets = j.at("targets").get<std::vector<std::string>>();
    if (j.contains("resolutions")) plan.resolutions = j.at("resolutions").get<std::vector<double>>();
    plan.output_dir = resolve(j.value("output_dir", std::string("bench_out")));
    plan.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("volumes")) {
      for (const auto& [id, path] : j.at("volumes").items()) plan.volumes[id] = resolve(path.get<std::string>());
    }
    for (const auto& je : j.at("engines")) {
      EngineRun run;
      if (je.is_string()) {
        run.name = je.get<std::string>();
        run.config = RegistrationConfig::defaults_for(parse_engine(run.name));
      } else {
        nlohmann::json cfg = je.value("config", nlohmann::json::object());
        run.name = je.value("name", cfg.value("engine", std::string()));
        if (!cfg.contains("engine")) cfg["engine"] = run.name;
        run.config = config_from_json(cfg);
      }
      plan.engines.push_back(std::move(run));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

nlohmann::json plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json engines = nlohmann::json::array();
  for (const auto& e : plan.engines) engines.push_back({{"name", e.name}, {"config", config_to_json(e.config)}});
  nlohmann::json volumes = nlohmann::json::object();
  for (const auto& [id, path] : plan.volumes) volumes[id] = path.string();
  return {{"schema_version", kPlanSchemaVersion}, {"reference", plan.reference},
          {"targets", plan.targets},              {"engines", engines},
          {"resolutions", plan.resolutions},      {"output_dir", plan.output_dir.string()},
          {"seed", plan.seed},                    {"volumes", volumes}};
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("plan " + path.string() + " is not valid JSON: " + e.what());
  }
  return plan_from_json(j, path.parent_path());
}

VolumeResolver file_resolver(const ExperimentPlan& plan) {
  return [volumes = plan.volumes](const std::string& id) {
    const auto it = volumes.find(id);
    if (it == volumes.end()) throw InvalidArgument("volume id '" + id + "' is not listed in the plan");
    return load_volume(it->second);
  };
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string metric(double v) { return fmt("%.12g", v); }

std::string resolution_label(double r) { return fmt("%g", r); }

std::string row_key(const std::string& engine, double resolution, const std::string& target) {
  std::string key = engine + "_" + fmt("%g", resolution * 100.0) + "pct_" + target;
  for (char& c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return key;
}

nlohmann::json similarity_json(const SimilarityReport& r) {
  return {{"cc", r.cc}, {"mi", r.mi}, {"nmi", r.nmi}, {"msd", r.msd}};
}

Volume3 at_resolution(const Volume3& v, double factor) { return factor < 1.0 ? downscale(v, factor) : v; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

BenchReport run_experiment(const ExperimentPlan& plan, const VolumeResolver& resolve) {
  plan.validate();
  const Volume3 reference = resolve(plan.reference);
  std::map<std::string, Volume3> targets;
  for (const auto& id : plan.targets) targets.emplace(id, resolve(id));

  BenchReport report;
  report.reference = plan.reference;
  report.seed = plan.seed;
  for (double res : plan.resolutions) {
    const Volume3 fixed = at_resolution(reference, res);
    for (const auto& target_id : plan.targets) {
      const Volume3 moving = at_resolution(targets.at(target_id), res);
      for (std::size_t e = 0; e < plan.engines.size(); ++e) {
        const EngineRun& run = plan.engines[e];
        try {
          if (fixed.dims() != moving.dims()) {
            throw DimensionMismatch("reference " + to_string(fixed.dims()) + " vs target " +
                                    to_string(moving.dims()));
          }
          RegistrationConfig cfg = run.config;
          cfg.seed = derive_seed(plan.seed, e);
          const RegistrationResult r = register_pair(fixed, moving, cfg);
          BenchRow row;
          row.engine = run.name;
          row.resolution = res;
          row.target = target_id;
          row.iterations = r.iterations_run;
          row.cc = r.after.cc;
          row.mi = r.after.mi;
          row.nmi = r.after.nmi;
          row.seconds = r.seconds;
          row.before = r.before;
          row.fell_back = r.fell_back;
          report.rows.push_back(row);

          const Volume3 warped = apply_displacement(moving, r.field);
          const int z = fixed.dims().nz / 2;
          report.overlays.push_back(
              {row_key(run.name, res, target_id), axial_slice(fixed, z), axial_slice(warped, z)});
        } catch (const std::exception& ex) {
          report.failures.push_back(run.name + "," + resolution_label(res) + "," + target_id + ": " + ex.what());
        }
      }
    }
  }
  return report;
}

BenchReport run_experiment(const ExperimentPlan& plan) { return run_experiment(plan, file_resolver(plan)); }

PairedReport reference_swap_test(const ExperimentPlan& plan, const std::string& alternate_reference,
                                 const VolumeResolver& resolve) {
  if (alternate_reference == plan.reference) {
    throw InvalidArgument("alternate reference must differ from the original reference");
  }
  ExperimentPlan swapped = plan;
  swapped.reference = alternate_reference;
  swapped.validate();

  PairedReport paired;
  paired.original_reference = plan.reference;
  paired.alternate_reference = alternate_reference;
  paired.original = run_experiment(plan, resolve);
  paired.alternate = run_experiment(swapped, resolve);
  for (const auto& a : paired.original.rows) {
    for (const auto& b : paired.alternate.rows) {
      if (a.engine == b.engine && a.resolution == b.resolution && a.target == b.target) {
        paired.deltas.push_back({a.engine, a.resolution, a.target, a.cc, b.cc, a.mi, b.mi});
        break;
      }
    }
  }
  return paired;
}

PairedReport reference_swap_test(const ExperimentPlan& plan, const std::string& alternate_reference) {
  return reference_swap_test(plan, alternate_reference, file_resolver(plan));
}

double recovery_error(const DisplacementField3& recovered, const DisplacementField3& truth,
                      const Volume3& mask_source) {
  if (recovered.dims() != truth.dims() || recovered.dims() != mask_source.dims()) {
    throw DimensionMismatch("recovery_error needs matching dims: " + to_string(recovered.dims()) + ", " +
                            to_string(truth.dims()) + ", " + to_string(mask_source.dims()));
  }
  const double threshold = 0.05 * mask_source.max_value();
  const auto data = mask_source.data();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (!(data[n] > threshold)) continue;
    const Vec3 a = recovered.at(n);
    const Vec3 b = truth.at(n);
    sum += std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
    ++count;
  }
  if (count == 0) throw InvalidArgument("recovery_error: empty foreground mask");
  return sum / static_cast<double>(count);
}

double recovery_error(const RegistrationResult& result, const DisplacementField3& truth, const Volume3& mask_source) {
  return recovery_error(result.field, truth, mask_source);
}

std::string format_hms(double seconds) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) throw InvalidArgument("wall time must be finite and >= 0");
  const auto total = static_cast<long long>(std::floor(seconds + 0.5));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld", total / 3600, (total / 60) % 60, total % 60);
  return buf;
}

std::string report_csv(const BenchReport& report) {
  std::string out = std::string(kBenchCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    out += r.engine + "," + resolution_label(r.resolution) + "," + r.target + "," + std::to_string(r.iterations) +
           "," + metric(r.cc) + "," + metric(r.mi) + "," + metric(r.nmi) + "," + fmt("%.3f", r.seconds) + "\n";
  }
  return out;
}

std::string render_markdown(const std::string& csv, const std::vector<std::string>& failures) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kBenchCsvHeader) throw FormatError("unexpected results CSV header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != 8) throw FormatError("malformed results CSV row: " + line);
    rows.push_back(std::move(cells));
  }
  std::string md = "## Similarity after registration\n\n";
  md += "| Engine | Resolution | Target | Iterations | CC | MI | NMI |\n";
  md += "|---|---|---|---:|---:|---:|---:|\n";
  for (const auto& c : rows) {
    md += "| " + c[0] + " | " + c[1] + " | " + c[2] + " | " + c[3] + " | " + c[4] + " | " + c[5] + " | " + c[6] +
          " |\n";
  }
  md += "\n## Computation time\n\n";
  md += "| Engine | Resolution | Target | Time | Seconds |\n";
  md += "|---|---|---|---:|---:|\n";
  for (const auto& c : rows) {
    double s = 0.0;
    try {
      s = std::stod(c[7]);
    } catch (const std::exception&) {
      throw FormatError("bad seconds value '" + c[7] + "'");
    }
    md += "| " + c[0] + " | " + c[1] + " | " + c[2] + " | " + format_hms(s) + " | " + c[7] + " |\n";
  }
  if (!failures.empty()) {
    md += "\n## Failed runs\n\n";
    for (const auto& f : failures) md += "- " + f + "\n";
  }
  return md;
}

namespace {

nlohmann::json report_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"engine", r.engine},
                    {"resolution", r.resolution},
                    {"target", r.target},
                    {"iterations", r.iterations},
                    {"before", similarity_json(r.before)},
                    {"after", {{"cc", r.cc}, {"mi", r.mi}, {"nmi", r.nmi}}},
                    {"seconds", r.seconds},
                    {"fell_back", r.fell_back}});
  }
  return {{"schema_version", kPlanSchemaVersion}, {"reference", report.reference},
          {"seed", report.seed},                  {"concurrent_rows", report.concurrent_rows},
          {"rows", rows},                         {"failures", report.failures}};
}

void render_overlay(const std::filesystem::path& png, const Volume3& ref, const Volume3& warped) {
  write_png_rgb(png, ref.dims().nx, ref.dims().ny, overlay_rgb(ref, warped));
}

}  // namespace

void emit_report(const BenchReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "overlays");
  std::filesystem::create_directories(dir / "slices");
  const std::string csv = report_csv(report);
  write_text(dir / "results.csv", csv);
  write_text(dir / "results.md", render_markdown(csv, report.failures));
  write_text(dir / "report.json", report_json(report).dump(2) + "\n");
  for (const auto& o : report.overlays) {
    save_volume(o.reference, dir / "slices" / (o.key + "_ref.nii"));
    save_volume(o.warped, dir / "slices" / (o.key + "_warped.nii"));
    render_overlay(dir / "overlays" / (o.key + ".png"), o.reference, o.warped);
  }
}

std::string swap_csv(const PairedReport& paired) {
  std::string out = "engine,resolution,target,cc_original,cc_alternate,delta_cc,mi_original,mi_alternate,delta_mi\n";
  for (const auto& d : paired.deltas) {
    out += d.engine + "," + resolution_label(d.resolution) + "," + d.target + "," + metric(d.cc_original) + "," +
           metric(d.cc_alternate) + "," + metric(d.delta_cc()) + "," + metric(d.mi_original) + "," +
           metric(d.mi_alternate) + "," + metric(d.delta_mi()) + "\n";
  }
  return out;
}

void emit_paired_report(const PairedReport& paired, const std::filesystem::path& dir) {
  emit_report(paired.original, dir / "original");
  emit_report(paired.alternate, dir / "alternate");
  write_text(dir / "swap.csv", swap_csv(paired));
  const nlohmann::json meta{{"schema_version", kPlanSchemaVersion},
                            {"original_reference", paired.original_reference},
                            {"alternate_reference", paired.alternate_reference},
                            {"pairs", paired.deltas.size()}};
  write_text(dir / "swap.json", meta.dump(2) + "\n");
}

void rerender_report(const std::filesystem::path& dir) {
  const std::string csv = read_text(dir / "results.csv");
  std::vector<std::string> failures;
  if (std::filesystem::exists(dir / "report.json")) {
    try {
      failures = nlohmann::json::parse(read_text(dir / "report.json")).value("failures", failures);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("report.json is not valid JSON: " + std::string(e.what()));
    }
  }
  write_text(dir / "results.md", render_markdown(csv, failures));
  const auto slices = dir / "slices";
  if (!std::filesystem::is_directory(slices)) return;
  std::filesystem::create_directories(dir / "overlays");
  std::vector<std::filesystem::path> refs;
  for (const auto& entry : std::filesystem::directory_iterator(slices)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 8 && name.ends_with("_ref.nii")) refs.push_back(entry.path());
  }
  std::sort(refs.begin(), refs.end());
  for (const auto& ref_path : refs) {
    const std::string name = ref_path.filename().string();
    const std::string key = name.substr(0, name.size() - 8);
    const auto warped_path = slices / (key + "_warped.nii");
    if (!std::filesystem::exists(warped_path)) continue;
    render_overlay(dir / "overlays" / (key + ".png"), load_volume(ref_path), load_volume(warped_path));
  }
}

}  // namespace volreg
