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

#ifndef COADAPT_EQUILIBRIA_H_
#define COADAPT_EQUILIBRIA_H_

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "game.h"

namespace coadapt {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Width of the band around the stability threshold reported as undetermined.
constexpr double kStabilityDeadBand = 1e-9;
// Denominators smaller than this make a slope map singular.
constexpr double kSingularTol = 1e-12;

enum class Stability { kStable, kUnstable, kUndetermined };

const char* stability_name(Stability s);

struct StabilityInfo {
  Stability flag = Stability::kUndetermined;
  double diagnostic = kNaN;
};

// Gradient dynamics are locally stable when every eigenvalue of the game
// Jacobian has positive real part. The diagnostic is the smallest real part.
StabilityInfo classify_real_parts(double min_real_part);
// Fixed-point iterations are stable when the multiplier is inside the unit
// disk. The diagnostic is the multiplier magnitude.
StabilityInfo classify_multiplier(double magnitude);

struct Eigenvalues2 {
  std::complex<double> first;
  std::complex<double> second;
};

Eigenvalues2 eigenvalues_2x2(double a11, double a12, double a21, double a22);

// Solves [[a11, a12], [a21, a22]] x = r. Throws kDegenerate when singular.
JointAction solve_2x2(double a11, double a12, double a21, double a22,
                      double r1, double r2, const char* what);

struct Optima {
  JointAction human;
  JointAction machine;
};

Optima solve_optima(const ScalarQuadraticGame& g);

struct NashResult {
  JointAction action;
  Eigenvalues2 eigenvalues;
  StabilityInfo stability;
};

NashResult solve_nash(const ScalarQuadraticGame& g);

struct StackelbergResult {
  JointAction action;
  double L_H = kNaN;  // leader's conjecture-consistent response slope
  double L_M = kNaN;  // follower slope
  StabilityInfo stability;
};

StackelbergResult solve_stackelberg(const ScalarQuadraticGame& g);

// L_H as a function of the machine's policy slope.
double human_slope_map(const ScalarQuadraticGame& g, double L_M);
double human_slope_map_derivative(const ScalarQuadraticGame& g, double L_M);
// L_M as a function of the conjectured human slope.
double machine_slope_map(const ScalarQuadraticGame& g, double L_H);
double machine_slope_map_derivative(const ScalarQuadraticGame& g, double L_H);
double machine_intercept_map(const ScalarQuadraticGame& g, double L_H);
// Slope L_H whose machine best response is L_M.
double machine_slope_map_inverse(const ScalarQuadraticGame& g, double L_M);
// F = machine_slope_map o human_slope_map.
double cv_best_response_map(const ScalarQuadraticGame& g, double L);
double cv_best_response_map_derivative(const ScalarQuadraticGame& g, double L);

struct CcveRoot {
  double L_M = kNaN;
  double L_H = kNaN;
  double dF = kNaN;
  StabilityInfo stability;
  JointAction action;
  bool action_valid = false;
  std::string note;
};

struct CcveResult {
  // Ordered stable first (smallest |dF| first).
  std::vector<CcveRoot> roots;
  const CcveRoot& selected() const { return roots.front(); }
};

// Coefficients (c2, c1, c0) of the slope polynomial whose roots are the
// consistent machine slopes.
void ccve_polynomial(const ScalarQuadraticGame& g, double* c2, double* c1,
                     double* c0);
JointAction ccve_actions(const ScalarQuadraticGame& g, double L_H, double L_M);
CcveResult solve_ccve(const ScalarQuadraticGame& g);

struct RseResult {
  double L_H = kNaN;
  double L_M = kNaN;
  JointAction action;
  StabilityInfo stability;  // diagnostic: second derivative of steered cost
};

RseResult solve_rse(const ScalarQuadraticGame& g, JointAction target);

struct CvIterationStep {
  int k = 0;
  double L_H = kNaN;
  double L_M = kNaN;
  double ell_M = kNaN;
  JointAction action;
};

struct CvIterationTrace {
  std::vector<CvIterationStep> steps;
  bool truncated = false;
  std::string error;
};

CvIterationTrace k_level_iteration(const ScalarQuadraticGame& g, double L0,
                                   int K);

// Machine cost when the human best-responds to m = L (h - anchor.h) +
// anchor.m.
double steered_machine_cost(const ScalarQuadraticGame& g, double L,
                            JointAction anchor);
double policy_gradient_closed_form(const ScalarQuadraticGame& g, double L,
                                   JointAction anchor);
double policy_gradient_closed_form(const ScalarQuadraticGame& g, double L);
double policy_gradient_second_derivative(const ScalarQuadraticGame& g,
                                         double L, JointAction anchor);

struct CurvePoint {
  double param = kNaN;
  JointAction action;
  bool valid = false;
  std::string note;
};

std::vector<CurvePoint> pareto_frontier(const ScalarQuadraticGame& g,
                                        const std::vector<double>& gammas);
// Joint actions reached when the human best-responds to policies anchored at
// the machine optimum (or the given anchor) as the slope sweeps the grid.
std::vector<CurvePoint> consistency_curve(
    const ScalarQuadraticGame& g, const std::vector<double>& slopes,
    std::optional<JointAction> anchor = std::nullopt);

// Numeric solvers for games with non-quadratic costs.
namespace numeric {

Optima solve_optima(const Game& game);
NashResult solve_nash(const Game& game);
StackelbergResult solve_stackelberg(const Game& game);
// Action of `who` satisfying its first-order condition when it conjectures
// the opponent slope, given the opponent's action. Clamped to bounds.
double conjectural_response(const Game& game, Player who, double other,
                            double opponent_slope);
JointAction conjectural_actions(const Game& game, double L_H, double L_M);
CcveRoot solve_ccve(const Game& game);
RseResult solve_rse(const Game& game, JointAction target);

}  // namespace numeric

struct EquilibriumEntry {
  std::string name;
  bool valid = false;
  JointAction action;
  double L_H = kNaN;
  double L_M = kNaN;
  StabilityInfo stability;
  std::string note;
};

struct EquilibriumReport {
  EquilibriumEntry human_optimum;
  EquilibriumEntry machine_optimum;
  EquilibriumEntry nash;
  EquilibriumEntry stackelberg;
  EquilibriumEntry ccve;
  EquilibriumEntry rse;
  std::vector<CcveRoot> ccve_roots;

  std::vector<const EquilibriumEntry*> entries() const {
    return {&human_optimum, &machine_optimum, &nash, &stackelberg, &ccve, &rse};
  }
};

// Solves every equilibrium the game admits. Failures are recorded in the
// entry note rather than thrown. The reverse Stackelberg target defaults to
// the machine optimum.
EquilibriumReport solve_report(const Game& game,
                               std::optional<JointAction> rse_target = {});

std::string report_to_text(const EquilibriumReport& report);
std::string report_to_csv(const EquilibriumReport& report);

}  // namespace coadapt

#endif  // COADAPT_EQUILIBRIA_H_
