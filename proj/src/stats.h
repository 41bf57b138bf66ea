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

#ifndef COADAPT_STATS_H_
#define COADAPT_STATS_H_

#include <string>
#include <vector>

namespace coadapt {

enum class Sidedness { kTwoSided, kGreater, kLess };

const char* sidedness_name(Sidedness s);

struct StatResult {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double d = 0.0;
  Sidedness sidedness = Sidedness::kTwoSided;
};

// One-sample t test against the hypothesized mean. Zero variance gives
// t = 0 at the hypothesized mean and t = +-inf elsewhere. Throws for n < 2.
StatResult t_test_one_sample(const std::vector<double>& values,
                             double hypothesized, Sidedness sidedness);

// P(|T| >= |t|) for Student's t with df degrees of freedom, from the
// regularized incomplete beta function.
double student_t_two_sided_p(double t, double df);

// Median of the values (mean of the middle pair for even counts).
double median(std::vector<double> values);
// Median of the trailing fraction of the series.
double tail_median(const std::vector<double>& series, double fraction);

}  // namespace coadapt

#endif  // COADAPT_STATS_H_
