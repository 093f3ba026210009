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

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "volreg/error.hpp"
#include "volreg/similarity.hpp"
#include "volreg/volume.hpp"

using namespace volreg;

TEST_CASE("volume constructor enforces its invariants") {
  CHECK_THROWS_AS(Volume3(Dims{0, 4, 4}), InvalidArgument);
  CHECK_THROWS_AS(Volume3(Dims{2, 2, 2}, std::vector<float>(7)), InvalidArgument);
  CHECK_THROWS_AS(Volume3(Dims{2, 2, 2}, Vec3{1.0, 0.0, 1.0}), InvalidArgument);
  Volume3 v(Dims{3, 4, 5});
  CHECK(v.size() == 60);
  v.at(2, 3, 4) = 7.0f;
  CHECK(v[v.dims().index(2, 3, 4)] == 7.0f);
  CHECK(v.dims().index(1, 0, 0) == 1);
  CHECK(v.dims().index(0, 1, 0) == 3);
}

TEST_CASE("scaled extent rounds half up and never drops below two") {
  CHECK(scaled_extent(25, 0.1) == 3);  // 2.5 rounds up
  CHECK(scaled_extent(24, 0.1) == 2);
  CHECK(scaled_extent(10, 0.1) == 2);  // 1.0 is floored at 2
  CHECK(scaled_extent(64, 0.15) == 10);
  CHECK(scaled_extent(40, 0.5) == 20);
}

TEST_CASE("downscale of a constant volume is constant") {
  Volume3 v(Dims{40, 40, 40});
  std::fill(v.data().begin(), v.data().end(), 3.25f);
  const Volume3 d = downscale(v, 0.5);
  CHECK(d.dims() == Dims{20, 20, 20});
  for (float x : d.data()) CHECK(x == doctest::Approx(3.25).epsilon(1e-6));
  CHECK(d.spacing()[0] == doctest::Approx(2.0));
}

TEST_CASE("downscale by 1.0 is the identity") {
  const Volume3 v = testing::random_volume({7, 5, 6}, 11);
  CHECK(downscale(v, 1.0) == v);
}

TEST_CASE("downscale matches the overlap-weight oracle") {
  SUBCASE("ramp 20^3 by one half") {
    Volume3 v(Dims{20, 20, 20});
    for (int z = 0; z < 20; ++z)
      for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) v.at(x, y, z) = static_cast<float>(x + 2 * y + 3 * z);
    const Volume3 d = downscale(v, 0.5);
    const auto expect = oracle::downscale(v, d.dims());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(d[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
  SUBCASE("non-integer ratios") {
    const Volume3 v = testing::random_volume({17, 13, 11}, 5, 0.0, 100.0);
    const Volume3 d = downscale(v, 0.3);
    CHECK(d.dims() == Dims{5, 4, 3});
    const auto expect = oracle::downscale(v, d.dims());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(d[i] == doctest::Approx(expect[i]).epsilon(1e-5));
    CHECK(d.spacing()[0] == doctest::Approx(17.0 / 5.0));
    CHECK(d.spacing()[2] == doctest::Approx(11.0 / 3.0));
  }
}

TEST_CASE("downscale preserves the global mean") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Volume3 v = testing::random_volume({23, 19, 30}, seed, 0.0, 500.0);
    for (double f : {0.1, 0.15, 0.37, 0.5, 0.9}) {
      const Volume3 d = downscale(v, f);
      CHECK(d.mean() == doctest::Approx(v.mean()).epsilon(1e-3));
    }
  }
  Volume3 even = testing::random_volume({32, 32, 32}, 9, 0.0, 500.0);
  CHECK(downscale(even, 0.25).mean() == doctest::Approx(even.mean()).epsilon(1e-3));
}

TEST_CASE("downscale rejects factors outside (0, 1]") {
  const Volume3 v(Dims{8, 8, 8});
  CHECK_THROWS_AS(downscale(v, 0.0), InvalidArgument);
  CHECK_THROWS_AS(downscale(v, -0.5), InvalidArgument);
  CHECK_THROWS_AS(downscale(v, 1.5), InvalidArgument);
}

TEST_CASE("flip") {
  const Volume3 v = testing::random_volume({5, 6, 7}, 21);
  CHECK(flip(flip(v, FlipAxes::parse("X")), FlipAxes::parse("X")) == v);
  CHECK(flip(v, FlipAxes{}) == v);
  const Volume3 seq = flip(flip(flip(v, {true, false, false}), {false, true, false}), {false, false, true});
  CHECK(flip(v, FlipAxes::parse("xyz")) == seq);

  const Volume3 fx = flip(v, {true, false, false});
  CHECK(fx.at(0, 2, 3) == v.at(4, 2, 3));
  const Volume3 fz = flip(v, {false, false, true});
  CHECK(fz.at(1, 2, 0) == v.at(1, 2, 6));

  std::vector<float> a(v.data().begin(), v.data().end());
  const Volume3 all = flip(v, FlipAxes::parse("XYZ"));
  std::vector<float> b(all.data().begin(), all.data().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(all.spacing() == v.spacing());
}

TEST_CASE("flip axes parse and print") {
  CHECK(FlipAxes::parse("").none());
  CHECK(FlipAxes::parse("zx").to_string() == "XZ");
  CHECK_THROWS_AS(FlipAxes::parse("W"), InvalidArgument);
}

TEST_CASE("phantom") {
  const Dims d{32, 32, 32};
  const Volume3 a = make_phantom(d, 1);
  CHECK(make_phantom(d, 1) == a);
  CHECK(cc_global(a, make_phantom(d, 2)) < 0.99);
  CHECK(a.at(0, 0, 0) == 0.0f);
  CHECK(a.at(31, 31, 31) == 0.0f);
  std::size_t inside = 0;
  for (float x : a.data()) {
    if (x != 0.0f) {
      ++inside;
      CHECK(x >= 100.0f);
      CHECK(x <= 1000.0f);
    }
  }
  CHECK(inside > d.voxels() / 5);
  CHECK_THROWS_AS(make_phantom({15, 32, 32}, 0), InvalidArgument);
}
