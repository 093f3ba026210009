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

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"
#include "volreg/nifti.hpp"
#include "volreg/syngen.hpp"
#include "volreg/warp.hpp"

using namespace volreg;

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int line_count(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors exit with 1") {
  const Outcome none = run_cli({});
  CHECK(none.code == cli::kUsage);
  CHECK(none.err.find("phantom") != std::string::npos);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
  const Outcome flag = run_cli({"evaluate", "a.nii", "b.nii", "--no-such-flag"});
  CHECK(flag.code == cli::kUsage);
  CHECK(flag.err.find("evaluate") != std::string::npos);
  CHECK(run_cli({"register", "only_one.nii", "-o", "x"}).code == cli::kUsage);
  CHECK(run_cli({"--threads", "-2", "evaluate", "a", "b"}).code == cli::kUsage);
  CHECK(run_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("runtime failures exit with 2 and one line") {
  const Outcome bench = run_cli({"bench", "--plan", "definitely_missing.json"});
  CHECK(bench.code == cli::kRuntime);
  CHECK(line_count(bench.err) == 1);
  CHECK(bench.err.rfind("error: ", 0) == 0);
  const Outcome eval = run_cli({"evaluate", "missing_a.nii", "missing_b.nii"});
  CHECK(eval.code == cli::kRuntime);
  CHECK(line_count(eval.err) == 1);
}

TEST_CASE("phantom, evaluate and register") {
  testing::TempDir dir("cli");
  const std::string a = (dir / "a.nii").string();
  const std::string b = (dir / "b.nii").string();
  REQUIRE(run_cli({"--seed", "3", "phantom", "--dims", "24", "-o", a}).code == cli::kOk);
  CHECK(load_volume(a).dims() == Dims{24, 24, 24});
  CHECK(load_volume(a) == make_phantom({24, 24, 24}, 3));

  const Outcome self = run_cli({"evaluate", a, a});
  CHECK(self.code == cli::kOk);
  CHECK(self.out.find("cc=1.000000") == 0);
  CHECK(self.out.find("nmi=2.000000") != std::string::npos);
  const Outcome js = run_cli({"evaluate", a, a, "--json", "--bins", "16"});
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("cc").get<double>() == doctest::Approx(1.0));

  DeformationSpec spec;
  spec.seed = 5;
  spec.amplitude = 1.0;
  save_volume(apply_displacement(load_volume(a), generate_deformation({24, 24, 24}, spec)), b);

  std::ofstream(dir / "c.json") << R"({"levels": 2, "iterations": 4, "control_spacing": 4.0})";
  const std::string out1 = (dir / "r1").string();
  const Outcome reg = run_cli({"register", "--engine", "ffd", "--config", (dir / "c.json").string(), a, b, "-o", out1});
  REQUIRE(reg.code == cli::kOk);
  CHECK(fs::exists(dir / "r1" / "field.nii"));
  CHECK(fs::exists(dir / "r1" / "warped.nii"));
  CHECK(fs::exists(dir / "r1" / "ffd.grid"));
  CHECK(reg.out.find("level 12x12x12") != std::string::npos);
  const auto metrics = nlohmann::json::parse(slurp(dir / "r1" / "metrics.json"));
  CHECK(metrics.at("engine") == "ffd");
  CHECK(metrics.at("config").at("iterations") == 4);
  CHECK(metrics.at("after").at("cc").get<double>() >= metrics.at("before").at("cc").get<double>());

  SUBCASE("quiet runs print nothing and write the same outputs") {
    const std::string out2 = (dir / "r2").string();
    const Outcome quiet =
        run_cli({"register", "--engine", "ffd", "--config", (dir / "c.json").string(), a, b, "-o", out2, "--quiet"});
    CHECK(quiet.code == cli::kOk);
    CHECK(quiet.out.empty());
    CHECK(slurp(dir / "r2" / "field.nii") == slurp(dir / "r1" / "field.nii"));
    auto m2 = nlohmann::json::parse(slurp(dir / "r2" / "metrics.json"));
    auto m1 = metrics;
    m1.erase("seconds");
    m2.erase("seconds");
    CHECK(m1 == m2);
    // Machine output of evaluate is not verbosity.
    CHECK(run_cli({"-q", "evaluate", a, b}).out.find("cc=") == 0);
  }

  SUBCASE("dense engines write their artefacts") {
    const Outcome dd = run_cli({"register", "--engine", "dense-diffeomorphic", "--levels", "2", "--iterations", "3", a,
                                b, "-o", (dir / "dd").string()});
    CHECK(dd.code == cli::kOk);
    CHECK(fs::exists(dir / "dd" / "velocity.nii"));
    CHECK(run_cli({"register", "--engine", "warp-drive", a, b, "-o", (dir / "x").string()}).code == cli::kRuntime);
  }
}

TEST_CASE("gen, bench, swap-test and report") {
  testing::TempDir dir("cli_bench");
  const std::string src = (dir / "s.nii").string();
  REQUIRE(run_cli({"phantom", "--dims", "16", "-o", src, "-q"}).code == cli::kOk);

  const Outcome gen = run_cli({"--seed", "2", "gen", src, "--per-brain", "2", "-o", (dir / "data").string()});
  CHECK(gen.code == cli::kOk);
  CHECK(fs::exists(dir / "data" / "manifest.json"));
  const auto manifest = manifest_from_json(nlohmann::json::parse(slurp(dir / "data" / "manifest.json")));
  CHECK(manifest.entries.size() == 10);
  const Outcome regen = run_cli({"--seed", "2", "gen", src, "--per-brain", "2", "-o", (dir / "data").string()});
  CHECK(regen.out.find(" 0 files written") != std::string::npos);

  const std::string target = (dir / "data" / manifest.entries[0].volume_path).string();
  const std::string target2 = (dir / "data" / manifest.entries[1].volume_path).string();
  const nlohmann::json plan = {
      {"reference", "s"},
      {"targets", {"t"}},
      {"engines", {{{"name", "aff"}, {"config", {{"engine", "affine"}, {"levels", 1}, {"iterations", 3}}}}}},
      {"resolutions", {1.0}},
      {"output_dir", "report"},
      {"volumes", {{"s", src}, {"t", target}, {"u", target2}}}};
  std::ofstream(dir / "plan.json") << plan.dump(2);

  const Outcome bench = run_cli({"bench", "--plan", (dir / "plan.json").string()});
  CHECK(bench.code == cli::kOk);
  CHECK(fs::exists(dir / "report" / "results.csv"));
  CHECK(fs::exists(dir / "report" / "results.md"));
  CHECK(slurp(dir / "report" / "results.csv").rfind("engine,resolution,target,iterations,cc,mi,nmi,seconds\n", 0) == 0);

  fs::remove(dir / "report" / "results.md");
  CHECK(run_cli({"report", (dir / "report").string()}).code == cli::kOk);
  CHECK(fs::exists(dir / "report" / "results.md"));

  const Outcome swap =
      run_cli({"swap-test", "--plan", (dir / "plan.json").string(), "--alternate", "u", "-o", (dir / "swap").string()});
  CHECK(swap.code == cli::kOk);
  CHECK(fs::exists(dir / "swap" / "swap.csv"));
  CHECK(run_cli({"swap-test", "--plan", (dir / "plan.json").string(), "--alternate", "s"}).code == cli::kRuntime);
}
