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

#include "human_sim.h"

#include <cmath>

#include "error.h"

namespace coadapt {

int fd_block_length(double alpha, double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::kInvalidArgument, "human step size must be positive");
  // The limit policy answers one sample late, so a block needs two samples
  // for the probe to reach the observed cost.
  if (std::isinf(alpha)) return 2;
  if (std::isnan(alpha)) return 1;
  double r = std::ceil(alpha / beta);
  return r < 1.0 ? 1 : static_cast<int>(r);
}

double fd_human_step(const Game& game, FDGradient& s, double probe_cost,
                     double nominal_cost) {
  if (!(s.probe > 0.0)) fail(ErrorCode::kInvalidArgument, "probe must be positive");
  double g = (probe_cost - nominal_cost) / s.probe;
  double next = s.h - s.K * s.beta * g;
  if (game.human_bounds) next = game.human_bounds->clamp(next);
  s.h = next;
  return next;
}

double conjaware_human_step(const Game& game, ConjAware& s, double L_M,
                            JointAction a) {
  double next = s.h - s.beta * grad_with_conjecture(game, Player::kHuman, a, L_M);
  if (game.human_bounds) next = game.human_bounds->clamp(next);
  s.h = next;
  return next;
}

double best_response_oracle(const Game& game, const AffinePolicy& policy) {
  AffinePolicy line = policy.unanchored();
  if (const auto* q = std::get_if<QuadraticCost>(&game.human)) {
    if (!game.machine_bounds) {
      double h = quadratic_best_response_to_policy(*q, line.slope, line.intercept);
      return game.human_bounds ? game.human_bounds->clamp(h) : h;
    }
  }
  if (!game.human_bounds) {
    fail(ErrorCode::kInvalidArgument, "best response needs human bounds for this game");
  }
  auto machine = [&](double h) {
    double m = line(h);
    return game.machine_bounds ? game.machine_bounds->clamp(m) : m;
  };
  return golden_section_minimize(
      [&](double h) { return eval_cost(game, Player::kHuman, {h, machine(h)}); },
      game.human_bounds->lo, game.human_bounds->hi);
}

}  // namespace coadapt
