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

// Independent oracles shared by the unit tests. Nothing here calls into the
// library's solvers; the point is to check them from a second route.

#ifndef COADAPT_TESTS_SUPPORT_H_
#define COADAPT_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

// Canonical costs typed in directly from their polynomial form.
inline double c_H(double h, double m) {
  return 0.5 * h * h + 7.0 / 30.0 * m * m - h * m / 3.0 + 2.0 / 15.0 * h - 22.0 / 75.0 * m +
         12.0 / 125.0;
}
inline double c_M(double h, double m) { return 0.5 * m * m + h * h - h * m; }

inline double central_diff(const std::function<double(double)>& f, double x,
                           double step = 1e-6) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

// Relative error with a unit floor so values near zero compare absolutely.
inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

// Minimizer by dense sampling followed by ternary refinement. Slow but
// shares no code with the library's golden-section search.
inline double minimize_1d(const std::function<double(double)>& f, double lo, double hi) {
  const int n = 2000;
  double best = lo, fbest = f(lo);
  for (int i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double fx = f(x);
    if (fx < fbest) {
      fbest = fx;
      best = x;
    }
  }
  double a = std::max(lo, best - (hi - lo) / n), b = std::min(hi, best + (hi - lo) / n);
  for (int i = 0; i < 200; ++i) {
    double x1 = a + (b - a) / 3.0, x2 = b - (b - a) / 3.0;
    if (f(x1) < f(x2)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  return 0.5 * (a + b);
}

// Human best response to the line m = L h + delta in the canonical game.
inline double canonical_response(double L, double delta) {
  return minimize_1d([&](double h) { return c_H(h, L * h + delta); }, -5.0, 5.0);
}

// Steered machine cost for the canonical game: the machine's cost at the
// human's best response to m = L h.
inline double canonical_steered(double L) {
  double h = (22.0 * L - 10.0) / (35.0 * L * L - 50.0 * L + 75.0);
  return c_M(h, L * h);
}

}  // namespace oracle

#endif  // COADAPT_TESTS_SUPPORT_H_
