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

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "volreg/error.hpp"
#include "volreg/parallel.hpp"
#include "volreg/similarity.hpp"

using namespace volreg;

namespace {

Volume3 from_values(Dims d, std::vector<float> v) { return Volume3(d, std::move(v)); }

Volume3 affine_map(const Volume3& v, double a, double b) {
  Volume3 out = v;
  for (float& x : out.data()) x = static_cast<float>(a * x + b);
  return out;
}

Volume3 constant(Dims d, float c) {
  Volume3 v(d);
  std::fill(v.data().begin(), v.data().end(), c);
  return v;
}

// 8^3 checkerboard against two constant half-blocks: exactly independent.
std::pair<Volume3, Volume3> independent_pair() {
  Volume3 a(Dims{8, 8, 8}), b(Dims{8, 8, 8});
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        a.at(x, y, z) = static_cast<float>((x + y + z) % 2);
        b.at(x, y, z) = z < 4 ? 0.0f : 1.0f;
      }
  return {a, b};
}

}  // namespace

TEST_CASE("global correlation") {
  const Volume3 x = testing::random_volume({7, 6, 5}, 1, 0.0, 10.0);
  CHECK(cc_global(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cc_global(x, affine_map(x, 2.5, -7.0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cc_global(x, affine_map(x, -1.0, 0.0)) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cc_global(constant(x.dims(), 3.0f), x) == 0.0);
  CHECK(cc_global(constant(x.dims(), 3.0f), constant(x.dims(), 4.0f)) == 0.0);
  CHECK_THROWS_AS(cc_global(x, Volume3(Dims{7, 6, 4})), DimensionMismatch);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Volume3 a = testing::random_volume({8, 8, 8}, 100 + s, -5.0, 5.0);
    const Volume3 b = testing::random_volume({8, 8, 8}, 200 + s, 0.0, 1.0);
    const double c = cc_global(a, b);
    CHECK(c == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-9));
    // Invariance under positive affine rescaling of either side. Exact rescaling
    // by powers of two keeps float storage lossless.
    CHECK(cc_global(affine_map(a, 4.0, 0.0), b) == doctest::Approx(c).epsilon(1e-12));
    CHECK(cc_global(a, affine_map(b, 0.5, 0.0)) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("joint histogram") {
  SUBCASE("hand-enumerated 2x2x2 pairs") {
    const Volume3 a = from_values({2, 2, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
    const Volume3 b = from_values({2, 2, 2}, {0, 0, 0, 0, 1, 1, 1, 1});
    const JointHistogram h = joint_histogram(a, b, 2);
    CHECK(h.total == 8);
    CHECK(h.at(0, 0) == 4);
    CHECK(h.at(1, 1) == 4);
    CHECK(h.at(0, 1) == 0);
    const Volume3 c = from_values({2, 2, 2}, {1, 0, 1, 0, 1, 0, 1, 0});
    const JointHistogram hc = joint_histogram(a, c, 2);
    CHECK(hc.at(0, 0) == 2);
    CHECK(hc.at(0, 1) == 2);
    CHECK(hc.at(1, 0) == 2);
    CHECK(hc.at(1, 1) == 2);
    // Top edge inclusive: the maximum lands in the last bin.
    const JointHistogram h4 = joint_histogram(a, a, 4);
    CHECK(h4.at(3, 3) == 2);  // values 6 and 7 (t = 6/7 and 1)
    CHECK(h4.at(0, 0) == 2);  // values 0 and 1
  }
  SUBCASE("identical images put all mass on the diagonal") {
    const Volume3 x = testing::random_volume({6, 6, 6}, 3);
    const JointHistogram h = joint_histogram(x, x, 16);
    std::int64_t diag = 0;
    for (int i = 0; i < 16; ++i) diag += h.at(i, i);
    CHECK(diag == h.total);
  }
  SUBCASE("two constants occupy one cell") {
    const JointHistogram h = joint_histogram(constant({4, 4, 4}, 2.0f), constant({4, 4, 4}, -1.0f), 8);
    CHECK(h.at(0, 0) == 64);
  }
  SUBCASE("marginals and total agree with the oracle") {
    const Volume3 a = testing::random_volume({8, 8, 8}, 5);
    const Volume3 b = testing::random_volume({8, 8, 8}, 6);
    const JointHistogram h = joint_histogram(a, b, 10);
    const oracle::Hist o = oracle::histogram(a, b, 10);
    for (const auto& [cell, count] : o.joint) CHECK(h.at(cell.first, cell.second) == count);
    std::int64_t sum = 0;
    for (auto c : h.counts) {
      CHECK(c >= 0);
      sum += c;
    }
    CHECK(sum == h.total);
  }
  CHECK_THROWS_AS(joint_histogram(Volume3(Dims{2, 2, 2}), Volume3(Dims{2, 2, 2}), 1), InvalidArgument);
}

TEST_CASE("mutual information") {
  const Volume3 x = testing::random_volume({8, 8, 8}, 9, 0.0, 100.0);
  const oracle::Hist hx = oracle::histogram(x, x, 64);
  const double h_x = oracle::entropy(hx.ma, hx.total);
  CHECK(mi(x, x) == doctest::Approx(h_x).epsilon(1e-9));
  CHECK(std::abs(mi(x, x) - h_x) <= 1e-9);
  CHECK(std::abs(nmi(x, x) - 2.0) <= 1e-9);

  const auto [a, b] = independent_pair();
  CHECK(mi(a, b) <= 0.05);
  CHECK(nmi(a, b) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(mi(a, b) == doctest::Approx(oracle::mi(a, b, 64)).epsilon(1e-9));

  CHECK(mi(constant(x.dims(), 1.0f), x) == 0.0);
  CHECK(nmi(constant(x.dims(), 1.0f), x) == 1.0);
  CHECK(nmi(constant(x.dims(), 1.0f), constant(x.dims(), 5.0f)) == 1.0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const Volume3 p = testing::random_volume({8, 8, 8}, 300 + s, 0.0, 1.0);
    Volume3 q = testing::random_volume({8, 8, 8}, 400 + s, 0.0, 1.0);
    for (std::size_t i = 0; i < q.size(); i += 2) q[i] = p[i];  // partial dependence
    for (int bins : {4, 16, 64}) {
      const double m = mi(p, q, bins);
      const double n = nmi(p, q, bins);
      CHECK(std::abs(m - oracle::mi(p, q, bins)) <= 1e-6);
      CHECK(std::abs(n - oracle::nmi(p, q, bins)) <= 1e-6);
      CHECK(m >= -1e-12);
      CHECK(n >= 1.0 - 1e-9);
      CHECK(mi(q, p, bins) == m);
      CHECK(nmi(q, p, bins) == n);
    }
  }
}

TEST_CASE("mean squared difference") {
  const Volume3 x = testing::random_volume({4, 4, 4}, 12);
  CHECK(msd(x, x) == 0.0);
  CHECK(msd(constant({4, 4, 4}, 0.0f), constant({4, 4, 4}, 3.0f)) == doctest::Approx(9.0));
  const Volume3 y = testing::random_volume({4, 4, 4}, 13);
  CHECK(msd(x, y) == doctest::Approx(oracle::msd(x, y)).epsilon(1e-12));
}

TEST_CASE("local correlation") {
  const Volume3 x = testing::smooth_volume({10, 9, 8}, 4);
  CHECK(local_cc(x, x, 3) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(local_cc(x, affine_map(x, 3.0, 1.0), 5) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(local_cc(constant({6, 6, 6}, 1.0f), constant({6, 6, 6}, 2.0f), 3) == 1.0);
  CHECK_THROWS_AS(local_cc(x, x, 4), InvalidArgument);
  CHECK_THROWS_AS(local_cc(x, x, 1), InvalidArgument);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Volume3 a = testing::random_volume({6, 6, 6}, 500 + s);
    const Volume3 b = testing::random_volume({6, 6, 6}, 600 + s);
    for (int w : {3, 5, 9}) CHECK(std::abs(local_cc(a, b, w) - oracle::local_cc(a, b, w)) <= 1e-6);
    const double v = local_cc(a, b, 3);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // One constant half: windows there score 0 against a varying image.
  Volume3 half = testing::random_volume({6, 6, 6}, 7);
  for (int z = 0; z < 6; ++z)
    for (int y = 0; y < 6; ++y)
      for (int xx = 0; xx < 6; ++xx)
        if (xx < 3) half.at(xx, y, z) = 1.0f;
  const Volume3 other = testing::random_volume({6, 6, 6}, 8);
  CHECK(std::abs(local_cc(half, other, 3) - oracle::local_cc(half, other, 3)) <= 1e-6);
}

TEST_CASE("report row") {
  CHECK(similarity_csv_header() == "method,iteration,brain_id,cc,mi,nmi,msd");
  const SimilarityReport r{0.5, 1.25, 1.125, 3.0};
  CHECK(similarity_csv_row("ffd", 3, "b7", r) == "ffd,3,b7,0.5000000000,1.2500000000,1.1250000000,3");
  const Volume3 x = testing::random_volume({5, 5, 5}, 1);
  const SimilarityReport self = similarity_report(x, x);
  CHECK(self.cc == doctest::Approx(1.0));
  CHECK(self.nmi == doctest::Approx(2.0));
  CHECK(self.msd == 0.0);
}

TEST_CASE("objective gradients match finite differences") {
  const Dims d{12, 12, 12};
  SUBCASE("zero at the msd optimum") {
    const Volume3 m = testing::smooth_volume(d, 1);
    const DisplacementField3 g = objective_gradient(m, m, VectorField3(d), Objective::Msd);
    CHECK(g.max_magnitude() == 0.0);
  }
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Volume3 fixed = testing::random_volume(d, 700 + seed, 0.0, 4.0);
    const Volume3 moving = testing::random_volume(d, 800 + seed, 0.0, 4.0);
    const VectorField3 u = testing::kink_free_field(d, 900 + seed, 2.0);
    CAPTURE(seed);
    CHECK(testing::check_objective_gradient(fixed, moving, u, Objective::Msd, 9, 40, seed).relative() <= 1e-3);
    CHECK(testing::check_objective_gradient(fixed, moving, u, Objective::LocalCc, 5, 40, seed).relative() <= 5e-3);
    CHECK(testing::check_objective_gradient(fixed, moving, u, Objective::Cc, 9, 40, seed).relative() <= 1e-3);
  }
  const Volume3 v = testing::random_volume(d, 1);
  CHECK_THROWS_AS(objective_gradient(v, v, VectorField3(d), Objective::Nmi), InvalidArgument);
}

TEST_CASE("metrics do not depend on the thread count") {
  const Volume3 a = testing::random_volume({17, 15, 13}, 21);
  const Volume3 b = testing::random_volume({17, 15, 13}, 22);
  set_thread_count(1);
  const double c1 = cc_global(a, b), l1 = local_cc(a, b, 5), m1 = msd(a, b), n1 = nmi(a, b);
  set_thread_count(3);
  CHECK(cc_global(a, b) == c1);
  CHECK(local_cc(a, b, 5) == l1);
  CHECK(msd(a, b) == m1);
  CHECK(nmi(a, b) == n1);
  set_thread_count(0);
}
