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

#include "stats.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>

#include "error.h"

namespace coadapt {

const char* sidedness_name(Sidedness s) {
  switch (s) {
    case Sidedness::kTwoSided: return "two";
    case Sidedness::kGreater: return "greater";
    case Sidedness::kLess: return "less";
  }
  return "two";
}

double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
}

StatResult t_test_one_sample(const std::vector<double>& values,
                             double hypothesized, Sidedness sidedness) {
  const size_t n = values.size();
  if (n < 2) fail(ErrorCode::kInvalidArgument, "t test needs at least two values");
  StatResult r;
  r.n = static_cast<int>(n);
  r.df = static_cast<double>(n - 1);
  r.sidedness = sidedness;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.sd = std::sqrt(ss / (n - 1));
  double diff = r.mean - hypothesized;

  // Exactly repeated values leave rounding residue in the mean; treat a
  // spread below that as zero variance.
  double scale = std::max(std::fabs(r.mean), std::fabs(hypothesized));
  bool zero_variance = r.sd <= 1e-14 * std::max(scale, 1e-300);
  if (zero_variance) {
    r.sd = 0.0;
    if (std::fabs(diff) <= 1e-14 * std::max(scale, 1e-300)) {
      r.t = 0.0;
      r.d = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.t = std::copysign(INFINITY, diff);
      r.d = std::copysign(INFINITY, diff);
    }
  } else {
    r.t = diff / (r.sd / std::sqrt(static_cast<double>(n)));
    r.d = diff / r.sd;
  }

  double two = student_t_two_sided_p(r.t, r.df);
  switch (sidedness) {
    case Sidedness::kTwoSided:
      r.p = two;
      break;
    case Sidedness::kGreater:
      r.p = r.t > 0.0 ? 0.5 * two : 1.0 - 0.5 * two;
      break;
    case Sidedness::kLess:
      r.p = r.t < 0.0 ? 0.5 * two : 1.0 - 0.5 * two;
      break;
  }
  if (zero_variance && r.t == 0.0) r.p = 1.0;
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "median of empty series");
  size_t n = values.size();
  size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (n % 2 == 1) return upper;
  double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double tail_median(const std::vector<double>& series, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "tail fraction must be in (0, 1]");
  }
  size_t n = series.size();
  size_t keep = static_cast<size_t>(std::ceil(fraction * n));
  if (keep == 0) keep = 1;
  return median(std::vector<double>(series.end() - keep, series.end()));
}

}  // namespace coadapt
