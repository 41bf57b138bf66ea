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

#ifndef COADAPT_ADAPTATION_H_
#define COADAPT_ADAPTATION_H_

#include <optional>
#include <variant>

#include "game.h"

namespace coadapt {

// Guard on |m' - m| when estimating the human's conjecture.
constexpr double kConjectureDenominatorTol = 1e-6;

enum class Phase { kNominal, kPerturbed };

const char* phase_name(Phase p);

// Action-space gradient play, m+ = m - alpha d_m c_M(h, m).
struct GradientPlay {
  double alpha = 0.0;
  double m = 0.0;
  // Action the machine holds when alpha = 0.
  double hold = 0.0;
  // Policy applied when alpha is infinite.
  std::optional<AffinePolicy> limit_policy;

  static GradientPlay make(double alpha, double m0, double nash_m,
                           std::optional<AffinePolicy> limit_policy);
  // Rates above the tested range [0, 1] are permitted but flagged.
  bool rate_flagged() const;
};

// Advances the machine one sample given the human action h; returns the new
// action. Results are clamped to the machine's bounds.
double gradient_play_step(const Game& game, GradientPlay& s, double h);

// Conjectural-variation policy iteration over pairs of trials.
struct ConjVar {
  double delta = 0.1;
  double conjecture = 0.0;  // estimated human slope
  AffinePolicy policy;
  int k = 0;
  Phase phase = Phase::kNominal;

  // Initial conjecture 0 and its best-response policy. An explicit initial
  // slope is reached by inverting the machine's slope map.
  static ConjVar initial(const Game& game, double delta,
                         std::optional<double> initial_slope = std::nullopt);
  // Policy played in the trial of the given phase (intercept + delta when
  // perturbed).
  AffinePolicy trial_policy(Phase p) const;
};

double conjvar_estimate(const ConjVar& s, JointAction nominal,
                        JointAction perturbed);
// Machine best response to the conjectured human line. Advances k.
AffinePolicy conjvar_update(const Game& game, ConjVar& s, double L_hat);
AffinePolicy conjvar_update_cobbdouglas(const CobbDouglasCost& machine,
                                        double L_hat);
// Machine best-response policy for a conjectured human slope, dispatched on
// the machine cost.
AffinePolicy machine_policy_for_conjecture(const Game& game, double L_hat);

// Policy-gradient descent on the slope of a policy anchored at the machine
// optimum.
struct PolicyGrad {
  double Delta = 0.1;
  double gamma = 2.0;
  JointAction anchor;
  double slope = 0.0;
  int k = 0;
  Phase phase = Phase::kNominal;

  static PolicyGrad make(double Delta, double gamma, JointAction anchor,
                         double slope);
  AffinePolicy trial_policy(Phase p) const;
};

double policygrad_estimate(const PolicyGrad& s, double nominal_cost,
                           double perturbed_cost);
// Steps the slope against the gradient. Advances k.
double policygrad_update(PolicyGrad& s, double grad);

using MachineStrategy = std::variant<GradientPlay, ConjVar, PolicyGrad>;

// Follower slope and intercept of the machine's best response to a fixed
// human action: the policy gradient play converges to for alpha > 0.
AffinePolicy machine_response_line(const Game& game);

}  // namespace coadapt

#endif  // COADAPT_ADAPTATION_H_
