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

#include "game.h"

#include <charconv>
#include <cmath>
#include <limits>

#include "error.h"

namespace coadapt {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kDegenerate: return "degenerate-game";
    case ErrorCode::kNoOptimum: return "no-global-optimum";
    case ErrorCode::kNoEquilibrium: return "no-equilibrium";
    case ErrorCode::kInfeasiblePolicy: return "infeasible-policy";
    case ErrorCode::kSingular: return "singular";
    case ErrorCode::kDesignInfeasible: return "design-infeasible";
    case ErrorCode::kConjectureUndefined: return "conjecture-undefined";
    case ErrorCode::kPairing: return "pairing";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kReplay: return "replay";
    case ErrorCode::kState: return "state";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

const char* player_name(Player p) {
  return p == Player::kHuman ? "human" : "machine";
}

QuadraticCost QuadraticCost::centered(double A, double B, double D,
                                      double own_star, double other_star) {
  QuadraticCost c;
  c.A = A;
  c.B = B;
  c.D = D;
  c.b = -(A * own_star + B * other_star);
  c.d = -(B * own_star + D * other_star);
  c.a = 0.5 * A * own_star * own_star + B * own_star * other_star +
        0.5 * D * other_star * other_star;
  return c;
}

ScalarQuadraticGame ScalarQuadraticGame::from_costs(
    const QuadraticCost& human, const QuadraticCost& machine) {
  ScalarQuadraticGame g;
  g.A_H = human.A; g.B_H = human.B; g.D_H = human.D;
  g.b_H = human.b; g.d_H = human.d; g.a_H = human.a;
  g.A_M = machine.A; g.B_M = machine.B; g.D_M = machine.D;
  g.b_M = machine.b; g.d_M = machine.d; g.a_M = machine.a;
  return g;
}

Game Game::from(const ScalarQuadraticGame& g) {
  Game game;
  game.human = g.human();
  game.machine = g.machine();
  return game;
}

bool Game::is_quadratic() const {
  return std::holds_alternative<QuadraticCost>(human) &&
         std::holds_alternative<QuadraticCost>(machine);
}

ScalarQuadraticGame Game::quadratic() const {
  if (!is_quadratic()) {
    fail(ErrorCode::kInvalidArgument, "game is not quadratic for both players");
  }
  return ScalarQuadraticGame::from_costs(std::get<QuadraticCost>(human),
                                         std::get<QuadraticCost>(machine));
}

ScalarQuadraticGame canonical_game() {
  ScalarQuadraticGame g;
  g.A_H = 1.0;
  g.B_H = -1.0 / 3.0;
  g.D_H = 7.0 / 15.0;
  g.b_H = 2.0 / 15.0;
  g.d_H = -22.0 / 75.0;
  g.a_H = 12.0 / 125.0;
  g.A_M = 1.0;
  g.B_M = -1.0;
  g.D_M = 2.0;
  return g;
}

Game cobb_douglas_game() {
  Game g;
  g.human = CobbDouglasCost{0.175, 0.5, 1.1};
  g.machine = CobbDouglasCost{0.2, 0.5, 1.1};
  g.human_bounds = Interval{0.2, 0.8};
  g.machine_bounds = Interval{0.0, 1.0};
  return g;
}

Game cobb_douglas_policy_game() {
  Game g;
  g.human = CobbDouglasCost{0.175, 0.5, 1.1};
  g.machine = QuadraticCost::centered(2.0, 0.0, 2.0, 0.5, 0.5);
  g.human_bounds = Interval{0.2, 0.8};
  g.machine_bounds = Interval{0.0, 1.0};
  return g;
}

ScalarQuadraticGame shifted_machine_game(double h_star, double m_star) {
  ScalarQuadraticGame g = canonical_game();
  QuadraticCost mc = QuadraticCost::centered(g.A_M, g.B_M, g.D_M, m_star, h_star);
  return ScalarQuadraticGame::from_costs(g.human(), mc);
}

AffinePolicy AffinePolicy::line(double slope, double intercept) {
  AffinePolicy p;
  p.slope = slope;
  p.intercept = intercept;
  return p;
}

AffinePolicy AffinePolicy::anchored(double slope, JointAction anchor) {
  AffinePolicy p;
  p.slope = slope;
  p.intercept = anchor.m - slope * anchor.h;
  p.anchor = anchor;
  return p;
}

double AffinePolicy::operator()(double x) const {
  if (anchor) return slope * (x - anchor->h) + anchor->m;
  return slope * x + intercept;
}

AffinePolicy AffinePolicy::unanchored() const {
  if (!anchor) return *this;
  return line(slope, anchor->m - slope * anchor->h);
}

namespace {

double quadratic_value(const QuadraticCost& c, double x, double y) {
  return 0.5 * c.A * x * x + c.B * x * y + 0.5 * c.D * y * y + c.b * x +
         c.d * y + c.a;
}

void check_cobb_douglas_domain(const CobbDouglasCost& c, double own,
                               double other, double* u, double* v) {
  *u = 1.0 - own;
  *v = own + c.d * other;
  if (!(*u > 0.0)) {
    fail(ErrorCode::kDomain,
         "Cobb-Douglas base term (1 - own) = " + format_real(*u) +
             " is not positive");
  }
  if (!(*v > 0.0)) {
    fail(ErrorCode::kDomain,
         "Cobb-Douglas base term (own + d*other) = " + format_real(*v) +
             " is not positive");
  }
}

}  // namespace

double eval_cost(const Cost& cost, double own, double other) {
  if (const auto* q = std::get_if<QuadraticCost>(&cost)) {
    return quadratic_value(*q, own, other);
  }
  const auto& c = std::get<CobbDouglasCost>(cost);
  double u, v;
  check_cobb_douglas_domain(c, own, other, &u, &v);
  return 1.0 - 2.0 * std::pow(u, c.a) * std::pow(v, c.b);
}

double eval_cost(const Game& game, Player who, JointAction a) {
  return who == Player::kHuman ? eval_cost(game.human, a.h, a.m)
                               : eval_cost(game.machine, a.m, a.h);
}

void cost_partials(const Cost& cost, double own, double other, double* d_own,
                   double* d_other) {
  if (const auto* q = std::get_if<QuadraticCost>(&cost)) {
    *d_own = q->A * own + q->B * other + q->b;
    *d_other = q->B * own + q->D * other + q->d;
    return;
  }
  const auto& c = std::get<CobbDouglasCost>(cost);
  double u, v;
  check_cobb_douglas_domain(c, own, other, &u, &v);
  double p = std::pow(u, c.a) * std::pow(v, c.b);
  *d_own = -2.0 * p * (-c.a / u + c.b / v);
  *d_other = -2.0 * p * (c.b * c.d / v);
}

Gradient grad(const Game& game, Player who, JointAction a) {
  Gradient g;
  if (who == Player::kHuman) {
    cost_partials(game.human, a.h, a.m, &g.dh, &g.dm);
  } else {
    cost_partials(game.machine, a.m, a.h, &g.dm, &g.dh);
  }
  return g;
}

double grad_with_conjecture(const Game& game, Player who, JointAction a,
                            double opponent_slope) {
  Gradient g = grad(game, who, a);
  return who == Player::kHuman ? g.dh + opponent_slope * g.dm
                               : g.dm + opponent_slope * g.dh;
}

double human_best_response_to_action(const ScalarQuadraticGame& g, double m) {
  return -(g.B_H * m + g.b_H) / g.A_H;
}

double machine_best_response_to_action(const ScalarQuadraticGame& g, double h) {
  return -(g.B_M * h + g.b_M) / g.A_M;
}

double quadratic_best_response_to_policy(const QuadraticCost& c, double L,
                                         double delta) {
  double q = c.A + 2.0 * L * c.B + L * L * c.D;
  if (!(q > 0.0)) {
    fail(ErrorCode::kInfeasiblePolicy,
         "second-order condition A + 2LB + L^2 D > 0 fails at L = " +
             format_real(L));
  }
  return -(c.b + L * c.d + delta * (c.B + L * c.D)) / q;
}

double human_best_response_to_policy(const ScalarQuadraticGame& g, double L,
                                     double delta) {
  return quadratic_best_response_to_policy(g.human(), L, delta);
}

double best_response_to_action(const Game& game, Player who, double other) {
  const Cost& cost = game.cost(who);
  if (const auto* q = std::get_if<QuadraticCost>(&cost)) {
    if (!(q->A > 0.0)) {
      fail(ErrorCode::kNoOptimum, "own curvature A must be positive");
    }
    double x = -(q->B * other + q->b) / q->A;
    const auto& bounds = game.bounds(who);
    return bounds ? bounds->clamp(x) : x;
  }
  const auto& bounds = game.bounds(who);
  if (!bounds) {
    fail(ErrorCode::kInvalidArgument,
         "Cobb-Douglas best response needs action bounds");
  }
  return golden_section_minimize(
      [&](double x) { return eval_cost(cost, x, other); }, bounds->lo,
      bounds->hi);
}

double display_value(double cost) { return std::sqrt(cost > 0.0 ? cost : 0.0); }

double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace coadapt
