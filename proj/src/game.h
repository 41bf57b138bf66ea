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

#ifndef COADAPT_GAME_H_
#define COADAPT_GAME_H_

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace coadapt {

enum class Player { kHuman, kMachine };

const char* player_name(Player p);

struct JointAction {
  double h = 0.0;
  double m = 0.0;
};

// Costs are written in own/other form. For the human own = h and other = m;
// for the machine own = m and other = h.
//
//   c = A/2 own^2 + B own other + D/2 other^2 + b own + d other + a
struct QuadraticCost {
  double A = 1.0;
  double B = 0.0;
  double D = 0.0;
  double b = 0.0;
  double d = 0.0;
  double a = 0.0;

  // Cost with the given curvature whose minimum value 0 sits at
  // (own_star, other_star).
  static QuadraticCost centered(double A, double B, double D, double own_star,
                                double other_star);
};

//   c = 1 - 2 (1 - own)^a (own + d other)^b
struct CobbDouglasCost {
  double a = 0.0;
  double b = 0.0;
  double d = 1.0;
};

using Cost = std::variant<QuadraticCost, CobbDouglasCost>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

struct ScalarQuadraticGame {
  double A_H = 1.0, B_H = 0.0, D_H = 0.0, b_H = 0.0, d_H = 0.0, a_H = 0.0;
  double A_M = 1.0, B_M = 0.0, D_M = 0.0, b_M = 0.0, d_M = 0.0, a_M = 0.0;

  QuadraticCost human() const { return {A_H, B_H, D_H, b_H, d_H, a_H}; }
  QuadraticCost machine() const { return {A_M, B_M, D_M, b_M, d_M, a_M}; }
  static ScalarQuadraticGame from_costs(const QuadraticCost& human,
                                        const QuadraticCost& machine);
};

struct Game {
  Cost human;
  Cost machine;
  std::optional<Interval> human_bounds;
  std::optional<Interval> machine_bounds;

  static Game from(const ScalarQuadraticGame& g);

  const Cost& cost(Player p) const {
    return p == Player::kHuman ? human : machine;
  }
  const std::optional<Interval>& bounds(Player p) const {
    return p == Player::kHuman ? human_bounds : machine_bounds;
  }
  bool is_quadratic() const;
  // Throws kInvalidArgument unless both costs are quadratic.
  ScalarQuadraticGame quadratic() const;
};

ScalarQuadraticGame canonical_game();
// Cobb-Douglas costs for both players, used by the generalization runs of
// the action-gradient and conjectural-variation experiments.
Game cobb_douglas_game();
// Cobb-Douglas human against the quadratic machine cost
// (m - 0.5)^2 + (h - 0.5)^2 used by the policy-gradient generalization run.
Game cobb_douglas_policy_game();
// Canonical game with the machine optimum moved to (h_star, m_star).
ScalarQuadraticGame shifted_machine_game(double h_star, double m_star);

// m = L h + l, or m = L (h - anchor.h) + anchor.m when anchored. The same
// type is used for human-side lines with the roles of h and m swapped.
struct AffinePolicy {
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<JointAction> anchor;

  static AffinePolicy line(double slope, double intercept);
  static AffinePolicy anchored(double slope, JointAction anchor);
  static AffinePolicy constant(double value) { return line(0.0, value); }

  double operator()(double x) const;
  AffinePolicy unanchored() const;
};

double eval_cost(const Cost& cost, double own, double other);
double eval_cost(const Game& game, Player who, JointAction a);

struct Gradient {
  double dh = 0.0;
  double dm = 0.0;
};

// Partial derivatives of the cost with respect to (own, other).
void cost_partials(const Cost& cost, double own, double other, double* d_own,
                   double* d_other);
Gradient grad(const Game& game, Player who, JointAction a);
// d(own cost)/d(own action) when the opponent follows a policy with the
// given slope.
double grad_with_conjecture(const Game& game, Player who, JointAction a,
                            double opponent_slope);

double human_best_response_to_action(const ScalarQuadraticGame& g, double m);
double machine_best_response_to_action(const ScalarQuadraticGame& g, double h);
// Minimizer of c_H(h, L h + delta); throws kInfeasiblePolicy when the
// composed cost is not strictly convex.
double human_best_response_to_policy(const ScalarQuadraticGame& g, double L,
                                     double delta);
// Minimizer over own of cost(own, L own + delta).
double quadratic_best_response_to_policy(const QuadraticCost& c, double L,
                                         double delta);

// Best response to a fixed opponent action for any cost; Cobb-Douglas costs
// are minimized over the player's bounds.
double best_response_to_action(const Game& game, Player who, double other);

double display_value(double cost);

double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol = 1e-10);

std::string format_real(double x);

}  // namespace coadapt

#endif  // COADAPT_GAME_H_
