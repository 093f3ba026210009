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

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include "volreg/bench.hpp"
#include "volreg/error.hpp"
#include "volreg/nifti.hpp"
#include "volreg/optimize.hpp"
#include "volreg/parallel.hpp"
#include "volreg/similarity.hpp"
#include "volreg/syngen.hpp"
#include "volreg/volume.hpp"
#include "volreg/warp.hpp"

namespace volreg::cli {

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool quiet = false;
};

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Dims parse_dims(const std::string& text) {
  int x = 0, y = 0, z = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%dx%dx%d%c", &x, &y, &z, &tail) == 3) return {x, y, z};
  if (std::sscanf(text.c_str(), "%d%c", &x, &tail) == 1) return {x, x, x};
  throw InvalidArgument("dims must be N or NxNxN, got '" + text + "'");
}

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deformable volume registration toolkit and benchmark harness", "volreg"};
  app.require_subcommand(1, 1);
  app.fallthrough();  // global options may follow the subcommand
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Base random seed");
  app.add_option("--threads", g.threads, "Worker threads (default: VOLREG_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("-q,--quiet", g.quiet, "Suppress non-error output");

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Write a synthetic brain-like volume");
  std::string phantom_dims = "64";
  std::string phantom_out;
  phantom->add_option("--dims", phantom_dims, "N or NxNxN")->capture_default_str();
  phantom->add_option("-o,--output", phantom_out, "Output .nii")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a deformed dataset from source volumes");
  std::vector<std::string> gen_sources;
  int gen_per_brain = 100;
  std::string gen_out;
  gen->add_option("sources", gen_sources, "Source volumes (.nii); ids are file stems")->required();
  gen->add_option("--per-brain", gen_per_brain, "Deformations per expanded brain")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "Output directory")->required();

  // register
  auto* reg = app.add_subcommand("register", "Register a moving volume to a fixed volume");
  std::string reg_fixed, reg_moving, reg_engine, reg_config, reg_out;
  std::optional<int> reg_levels, reg_iterations;
  reg->add_option("fixed", reg_fixed, "Fixed (reference) volume")->required();
  reg->add_option("moving", reg_moving, "Moving volume")->required();
  reg->add_option("--engine", reg_engine, "affine | ffd | dense-diffeomorphic | dense-voxelmorph-energy");
  reg->add_option("--config", reg_config, "Registration config JSON");
  reg->add_option("--levels", reg_levels, "Pyramid levels");
  reg->add_option("--iterations", reg_iterations, "Iterations per level");
  reg->add_option("-o,--output", reg_out, "Output directory")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Similarity metrics between two volumes");
  std::string eval_a, eval_b;
  int eval_bins = 64;
  bool eval_json = false;
  eval->add_option("a", eval_a, "First volume")->required();
  eval->add_option("b", eval_b, "Second volume")->required();
  eval->add_option("--bins", eval_bins, "Histogram bins")->capture_default_str();
  eval->add_flag("--json", eval_json, "Print JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment plan and write a report");
  std::string bench_plan, bench_out;
  bench->add_option("--plan", bench_plan, "Experiment plan JSON")->required();
  bench->add_option("-o,--output", bench_out, "Report directory (default: plan output_dir)");

  // swap-test
  auto* swap = app.add_subcommand("swap-test", "Re-run a plan against an alternate reference");
  std::string swap_plan, swap_alt, swap_out;
  swap->add_option("--plan", swap_plan, "Experiment plan JSON")->required();
  swap->add_option("--alternate", swap_alt, "Alternate reference volume id")->required();
  swap->add_option("-o,--output", swap_out, "Report directory (default: plan output_dir)");

  // report
  auto* report = app.add_subcommand("report", "Re-render Markdown and overlays from a results directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "Directory holding results.csv")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;
  auto log = [&](const std::string& line) {
    if (!g.quiet) out << line << "\n";
  };

  try {
    if (g.threads > 0) set_thread_count(g.threads);

    if (phantom->parsed()) {
      const Volume3 vol = make_phantom(parse_dims(phantom_dims), g.seed.value_or(0));
      save_volume(vol, phantom_out);
      log("wrote " + phantom_out + " (" + to_string(vol.dims()) + ")");
    } else if (gen->parsed()) {
      std::vector<std::string> ids;
      std::map<std::string, Volume3> sources;
      for (const auto& path : gen_sources) {
        const std::string id = std::filesystem::path(path).stem().string();
        if (sources.contains(id)) throw InvalidArgument("duplicate source id '" + id + "'");
        sources.emplace(id, load_volume(path));
        ids.push_back(id);
      }
      const DatasetManifest manifest = build_manifest(ids, gen_per_brain, g.seed.value_or(0));
      std::filesystem::create_directories(gen_out);
      write_json(std::filesystem::path(gen_out) / "manifest.json", manifest_to_json(manifest));
      const MaterializeStats stats = materialize(manifest, sources, gen_out);
      for (const auto& f : stats.failures) err << "failed: " << f << "\n";
      log(std::to_string(manifest.entries.size()) + " entries, " + std::to_string(stats.written) + " files written, " +
          std::to_string(stats.skipped) + " unchanged");
      if (!stats.failures.empty()) return kRuntime;
    } else if (reg->parsed()) {
      nlohmann::json cfg_json = reg_config.empty() ? nlohmann::json::object() : read_json(reg_config);
      if (!reg_engine.empty()) cfg_json["engine"] = to_string(parse_engine(reg_engine));
      RegistrationConfig cfg = config_from_json(cfg_json);
      if (reg_levels) cfg.levels = *reg_levels;
      if (reg_iterations) cfg.iterations = *reg_iterations;
      if (g.seed) cfg.seed = *g.seed;
      cfg.validate();
      const Volume3 fixed = load_volume(reg_fixed);
      const Volume3 moving = load_volume(reg_moving);
      const RegistrationResult r = register_pair(fixed, moving, cfg);
      const std::filesystem::path dir(reg_out);
      std::filesystem::create_directories(dir);
      save_field(r.field, dir / "field.nii");
      save_volume(apply_displacement(moving, r.field), dir / "warped.nii");
      write_json(dir / "metrics.json", result_metrics_json(r, cfg));
      if (r.ffd) save_ffd(*r.ffd, dir / "ffd.grid");
      if (r.velocity) save_field(r.velocity->v, dir / "velocity.nii");
      for (const auto& t : r.traces) {
        log("level " + to_string(t.dims) + ": " + std::to_string(t.iterations) + " iterations, objective " +
            fixed6(t.objective.empty() ? 0.0 : t.objective.front()) + " -> " +
            fixed6(t.objective.empty() ? 0.0 : t.objective.back()));
      }
      log("cc " + fixed6(r.before.cc) + " -> " + fixed6(r.after.cc) + " in " + fixed6(r.seconds) + " s" +
          (r.fell_back ? " (identity fallback)" : ""));
    } else if (eval->parsed()) {
      const SimilarityReport s = similarity_report(load_volume(eval_a), load_volume(eval_b), eval_bins);
      if (eval_json) {
        out << nlohmann::json{{"schema_version", 1}, {"cc", s.cc}, {"mi", s.mi}, {"nmi", s.nmi}, {"msd", s.msd}}.dump()
            << "\n";
      } else {
        out << "cc=" << fixed6(s.cc) << " mi=" << fixed6(s.mi) << " nmi=" << fixed6(s.nmi) << " msd=" << fixed6(s.msd)
            << "\n";
      }
    } else if (bench->parsed()) {
      ExperimentPlan plan = load_plan(bench_plan);
      if (g.seed) plan.seed = *g.seed;
      const std::filesystem::path dir = bench_out.empty() ? plan.output_dir : std::filesystem::path(bench_out);
      const BenchReport rep = run_experiment(plan);
      emit_report(rep, dir);
      for (const auto& f : rep.failures) err << "failed: " << f << "\n";
      log(std::to_string(rep.rows.size()) + " rows written to " + dir.string());
    } else if (swap->parsed()) {
      ExperimentPlan plan = load_plan(swap_plan);
      if (g.seed) plan.seed = *g.seed;
      const std::filesystem::path dir = swap_out.empty() ? plan.output_dir : std::filesystem::path(swap_out);
      const PairedReport paired = reference_swap_test(plan, swap_alt);
      emit_paired_report(paired, dir);
      double worst = 0.0;
      for (const auto& d : paired.deltas) worst = std::max(worst, std::abs(d.delta_cc()));
      log(std::to_string(paired.deltas.size()) + " paired rows, max |delta cc| " + fixed6(worst));
    } else if (report->parsed()) {
      rerender_report(report_dir);
      log("re-rendered " + report_dir);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace volreg::cli
