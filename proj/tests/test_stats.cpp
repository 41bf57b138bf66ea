// Copyright 2026 The Coadapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "error.h"
#include "rng.h"
#include "stats.h"

using namespace coadapt;

namespace {

// Two-sided tail of Student's t by Simpson integration of the density.
double t_tail_by_quadrature(double t, double df) {
  double c = std::exp(std::lgamma(0.5 * (df + 1)) - std::lgamma(0.5 * df)) / std::sqrt(df * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -0.5 * (df + 1)); };
  const int n = 200000;
  double a = 0.0, b = std::fabs(t), h = (b - a) / n, s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * (s * h / 3.0);
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("two-sided p at the 5% critical value") {
  double p = student_t_two_sided_p(2.093, 19);
  CHECK(std::fabs(p - 0.05) < 1e-3);
  CHECK(p == doctest::Approx(t_tail_by_quadrature(2.093, 19)).epsilon(1e-8));
  for (double t : {0.3, 1.0, 2.5, 4.0}) {
    for (double df : {1.0, 5.0, 19.0, 60.0}) {
      CHECK(student_t_two_sided_p(t, df) == doctest::Approx(t_tail_by_quadrature(t, df)).epsilon(1e-7));
    }
  }
}

TEST_CASE("t test definitions") {
  std::vector<double> same(20, 0.3);
  StatResult z = t_test_one_sample(same, 0.3, Sidedness::kTwoSided);
  CHECK(z.t == 0.0);
  CHECK(z.p == 1.0);
  CHECK(z.df == 19);

  StatResult inf = t_test_one_sample(same, 0.1, Sidedness::kTwoSided);
  CHECK(std::isinf(inf.t));
  CHECK(inf.t > 0);
  CHECK(inf.p == 0.0);
  CHECK(std::isinf(t_test_one_sample(same, 0.5, Sidedness::kTwoSided).t));
  CHECK(t_test_one_sample(same, 0.5, Sidedness::kTwoSided).t < 0);

  Rng rng(1);
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) v.push_back(rng.uniform(-1, 1));
  double mean = 0, ss = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  for (double x : v) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (v.size() - 1));
  StatResult d1 = t_test_one_sample(v, mean - sd, Sidedness::kTwoSided);
  CHECK(d1.d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d1.t == doctest::Approx(std::sqrt(20.0)).epsilon(1e-12));
  StatResult d01 = t_test_one_sample(v, mean - 0.1 * sd, Sidedness::kTwoSided);
  CHECK(d01.d == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(d01.sd == doctest::Approx(sd).epsilon(1e-14));

  StatResult g = t_test_one_sample(v, mean - sd, Sidedness::kGreater);
  StatResult l = t_test_one_sample(v, mean - sd, Sidedness::kLess);
  CHECK(g.p == doctest::Approx(0.5 * d1.p).epsilon(1e-12));
  CHECK(l.p == doctest::Approx(1 - 0.5 * d1.p).epsilon(1e-12));
  CHECK_THROWS_AS(t_test_one_sample({1.0}, 0.0, Sidedness::kTwoSided), Error);
}

TEST_CASE("medians") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(median({0.2, 0.2, 0.2, 50.0, 0.2}) == 0.2);
  CHECK_THROWS_AS(median({}), Error);
  std::vector<double> s{9, 9, 9, 1, 2, 3};
  CHECK(tail_median(s, 0.5) == 2);
  CHECK(tail_median(s, 1.0) == 6);
  CHECK_THROWS_AS(tail_median(s, 0.0), Error);
  Rng rng(2);
  std::vector<double> r;
  for (int i = 0; i < 101; ++i) r.push_back(rng.uniform());
  double m = median(r);
  for (int k = 0; k < 5; ++k) {
    for (size_t i = r.size() - 1; i > 0; --i) std::swap(r[i], r[rng.below(i + 1)]);
    CHECK(median(r) == m);
  }
}

}  // TEST_SUITE
