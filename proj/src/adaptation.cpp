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

#include "adaptation.h"

#include <cmath>

#include "equilibria.h"
#include "error.h"

namespace coadapt {

const char* phase_name(Phase p) {
  return p == Phase::kNominal ? "nominal" : "perturbed";
}

GradientPlay GradientPlay::make(double alpha, double m0, double nash_m,
                                std::optional<AffinePolicy> limit_policy) {
  if (!(alpha >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "gradient play rate must be non-negative");
  }
  GradientPlay s;
  s.alpha = alpha;
  s.m = m0;
  s.hold = nash_m;
  s.limit_policy = limit_policy;
  if (std::isinf(alpha) && !limit_policy) {
    fail(ErrorCode::kInvalidArgument, "infinite rate needs a limit policy");
  }
  return s;
}

bool GradientPlay::rate_flagged() const { return alpha > 1.0; }

double gradient_play_step(const Game& game, GradientPlay& s, double h) {
  double next;
  if (s.alpha == 0.0) {
    next = s.hold;
  } else if (std::isinf(s.alpha)) {
    next = (*s.limit_policy)(h);
  } else {
    next = s.m - s.alpha * grad(game, Player::kMachine, {h, s.m}).dm;
  }
  if (game.machine_bounds) next = game.machine_bounds->clamp(next);
  s.m = next;
  return next;
}

AffinePolicy machine_policy_for_conjecture(const Game& game, double L_hat) {
  if (const auto* c = std::get_if<CobbDouglasCost>(&game.machine)) {
    return conjvar_update_cobbdouglas(*c, L_hat);
  }
  ScalarQuadraticGame g;
  const auto& q = std::get<QuadraticCost>(game.machine);
  g.A_M = q.A; g.B_M = q.B; g.D_M = q.D; g.b_M = q.b; g.d_M = q.d; g.a_M = q.a;
  return AffinePolicy::line(machine_slope_map(g, L_hat), machine_intercept_map(g, L_hat));
}

ConjVar ConjVar::initial(const Game& game, double delta,
                         std::optional<double> initial_slope) {
  ConjVar s;
  s.delta = delta;
  s.conjecture = 0.0;
  if (initial_slope) {
    if (const auto* c = std::get_if<CobbDouglasCost>(&game.machine)) {
      // Invert L = -a d / (a + b + b d L_hat).
      if (*initial_slope == 0.0 || c->b * c->d == 0.0) {
        fail(ErrorCode::kSingular, "initial slope is unreachable for this machine cost");
      }
      s.conjecture = (-c->a * c->d / *initial_slope - c->a - c->b) / (c->b * c->d);
    } else {
      const auto& q = std::get<QuadraticCost>(game.machine);
      ScalarQuadraticGame g;
      g.A_M = q.A; g.B_M = q.B; g.D_M = q.D;
      s.conjecture = machine_slope_map_inverse(g, *initial_slope);
    }
  }
  s.policy = machine_policy_for_conjecture(game, s.conjecture);
  return s;
}

AffinePolicy ConjVar::trial_policy(Phase p) const {
  AffinePolicy out = policy.unanchored();
  if (p == Phase::kPerturbed) out.intercept += delta;
  return out;
}

double conjvar_estimate(const ConjVar&, JointAction nominal,
                        JointAction perturbed) {
  double dm = perturbed.m - nominal.m;
  if (!(std::fabs(dm) > kConjectureDenominatorTol)) {
    fail(ErrorCode::kConjectureUndefined,
         "conjecture undefined: machine medians differ by " + format_real(dm));
  }
  return (perturbed.h - nominal.h) / dm;
}

AffinePolicy conjvar_update(const Game& game, ConjVar& s, double L_hat) {
  AffinePolicy next = machine_policy_for_conjecture(game, L_hat);
  s.conjecture = L_hat;
  s.policy = next;
  s.k += 1;
  s.phase = Phase::kNominal;
  return next;
}

AffinePolicy conjvar_update_cobbdouglas(const CobbDouglasCost& c, double L_hat) {
  double den = c.a + c.b + c.b * c.d * L_hat;
  if (std::fabs(den) < kSingularTol) {
    fail(ErrorCode::kSingular, "Cobb-Douglas conjectural update: denominator vanishes");
  }
  return AffinePolicy::line(-c.a * c.d / den, (c.b + c.b * c.d * L_hat) / den);
}

PolicyGrad PolicyGrad::make(double Delta, double gamma, JointAction anchor,
                            double slope) {
  if (Delta == 0.0) fail(ErrorCode::kInvalidArgument, "policy-gradient perturbation must be nonzero");
  PolicyGrad s;
  s.Delta = Delta;
  s.gamma = gamma;
  s.anchor = anchor;
  s.slope = slope;
  return s;
}

AffinePolicy PolicyGrad::trial_policy(Phase p) const {
  return AffinePolicy::anchored(p == Phase::kPerturbed ? slope + Delta : slope, anchor);
}

double policygrad_estimate(const PolicyGrad& s, double nominal_cost,
                           double perturbed_cost) {
  return (perturbed_cost - nominal_cost) / s.Delta;
}

double policygrad_update(PolicyGrad& s, double grad) {
  s.slope -= s.gamma * grad;
  s.k += 1;
  s.phase = Phase::kNominal;
  return s.slope;
}

AffinePolicy machine_response_line(const Game& game) {
  return machine_policy_for_conjecture(game, 0.0);
}

}  // namespace coadapt
