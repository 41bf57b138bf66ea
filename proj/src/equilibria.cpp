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

#include "equilibria.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "error.h"

namespace coadapt {

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::kStable: return "stable";
    case Stability::kUnstable: return "unstable";
    case Stability::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

StabilityInfo classify_real_parts(double min_real_part) {
  StabilityInfo info;
  info.diagnostic = min_real_part;
  if (std::isnan(min_real_part) || std::fabs(min_real_part) <= kStabilityDeadBand) {
    info.flag = Stability::kUndetermined;
  } else {
    info.flag = min_real_part > 0.0 ? Stability::kStable : Stability::kUnstable;
  }
  return info;
}

StabilityInfo classify_multiplier(double magnitude) {
  StabilityInfo info;
  info.diagnostic = magnitude;
  if (std::isnan(magnitude) || std::fabs(magnitude - 1.0) <= kStabilityDeadBand) {
    info.flag = Stability::kUndetermined;
  } else {
    info.flag = magnitude < 1.0 ? Stability::kStable : Stability::kUnstable;
  }
  return info;
}

Eigenvalues2 eigenvalues_2x2(double a11, double a12, double a21, double a22) {
  double half_trace = 0.5 * (a11 + a22);
  double det = a11 * a22 - a12 * a21;
  std::complex<double> disc = std::sqrt(std::complex<double>(half_trace * half_trace - det, 0.0));
  return {half_trace + disc, half_trace - disc};
}

JointAction solve_2x2(double a11, double a12, double a21, double a22,
                      double r1, double r2, const char* what) {
  double det = a11 * a22 - a12 * a21;
  double scale = std::max({std::fabs(a11 * a22), std::fabs(a12 * a21), 1e-300});
  if (std::fabs(det) <= kSingularTol * scale || !std::isfinite(det)) {
    fail(ErrorCode::kDegenerate, std::string(what) + ": linear system is singular");
  }
  return {(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det};
}

namespace {

double min_real(const Eigenvalues2& e) {
  return std::min(e.first.real(), e.second.real());
}

void require_positive_definite(double a11, double a12, double a22,
                               const char* who) {
  if (!(a11 > 0.0) || !(a11 * a22 - a12 * a12 > 0.0)) {
    fail(ErrorCode::kNoOptimum,
         std::string(who) + " cost Hessian is not positive definite");
  }
}

double checked_ratio(double num, double den, const char* what) {
  if (std::fabs(den) < kSingularTol) {
    fail(ErrorCode::kSingular, std::string(what) + ": denominator vanishes");
  }
  return num / den;
}

}  // namespace

Optima solve_optima(const ScalarQuadraticGame& g) {
  require_positive_definite(g.A_H, g.B_H, g.D_H, "human");
  require_positive_definite(g.D_M, g.B_M, g.A_M, "machine");
  Optima o;
  o.human = solve_2x2(g.A_H, g.B_H, g.B_H, g.D_H, -g.b_H, -g.d_H, "human optimum");
  o.machine = solve_2x2(g.D_M, g.B_M, g.B_M, g.A_M, -g.d_M, -g.b_M, "machine optimum");
  return o;
}

NashResult solve_nash(const ScalarQuadraticGame& g) {
  NashResult r;
  r.action = solve_2x2(g.A_H, g.B_H, g.B_M, g.A_M, -g.b_H, -g.b_M, "nash");
  r.eigenvalues = eigenvalues_2x2(g.A_H, g.B_H, g.B_M, g.A_M);
  r.stability = classify_real_parts(min_real(r.eigenvalues));
  return r;
}

StackelbergResult solve_stackelberg(const ScalarQuadraticGame& g) {
  if (!(g.A_M > 0.0)) {
    fail(ErrorCode::kNoEquilibrium, "stackelberg: follower curvature A_M must be positive");
  }
  double L = -g.B_M / g.A_M;
  double a11 = g.A_H + L * g.B_H;
  if (!(a11 > 0.0)) {
    fail(ErrorCode::kNoEquilibrium,
         "stackelberg: second-order condition A_H - B_H B_M / A_M > 0 fails");
  }
  if (!(g.A_H + 2.0 * L * g.B_H + L * L * g.D_H > 0.0)) {
    fail(ErrorCode::kNoEquilibrium,
         "stackelberg: leader's steered cost is not strictly convex");
  }
  double a12 = g.B_H + L * g.D_H;
  StackelbergResult r;
  r.action = solve_2x2(a11, a12, g.B_M, g.A_M, -(g.b_H + L * g.d_H), -g.b_M,
                       "stackelberg");
  r.L_M = L;
  r.L_H = human_slope_map(g, L);
  r.stability = classify_real_parts(min_real(eigenvalues_2x2(a11, a12, g.B_M, g.A_M)));
  return r;
}

double human_slope_map(const ScalarQuadraticGame& g, double L_M) {
  return checked_ratio(-(g.B_H + L_M * g.D_H), g.A_H + L_M * g.B_H,
                       "human slope map");
}

double human_slope_map_derivative(const ScalarQuadraticGame& g, double L_M) {
  double den = g.A_H + L_M * g.B_H;
  return checked_ratio(-(g.A_H * g.D_H - g.B_H * g.B_H), den * den,
                       "human slope map");
}

double machine_slope_map(const ScalarQuadraticGame& g, double L_H) {
  return checked_ratio(-(g.B_M + L_H * g.D_M), g.A_M + L_H * g.B_M,
                       "machine slope map");
}

double machine_slope_map_derivative(const ScalarQuadraticGame& g, double L_H) {
  double den = g.A_M + L_H * g.B_M;
  return checked_ratio(-(g.A_M * g.D_M - g.B_M * g.B_M), den * den,
                       "machine slope map");
}

double machine_intercept_map(const ScalarQuadraticGame& g, double L_H) {
  return checked_ratio(-(g.b_M + L_H * g.d_M), g.A_M + L_H * g.B_M,
                       "machine intercept map");
}

double machine_slope_map_inverse(const ScalarQuadraticGame& g, double L_M) {
  return checked_ratio(-(g.B_M + L_M * g.A_M), L_M * g.B_M + g.D_M,
                       "inverse machine slope map");
}

double cv_best_response_map(const ScalarQuadraticGame& g, double L) {
  return machine_slope_map(g, human_slope_map(g, L));
}

double cv_best_response_map_derivative(const ScalarQuadraticGame& g, double L) {
  return machine_slope_map_derivative(g, human_slope_map(g, L)) *
         human_slope_map_derivative(g, L);
}

void ccve_polynomial(const ScalarQuadraticGame& g, double* c2, double* c1,
                     double* c0) {
  *c2 = g.A_M * g.B_H - g.B_M * g.D_H;
  *c1 = g.A_H * g.A_M - g.D_H * g.D_M;
  *c0 = g.A_H * g.B_M - g.B_H * g.D_M;
}

JointAction ccve_actions(const ScalarQuadraticGame& g, double L_H, double L_M) {
  return solve_2x2(g.A_H + L_M * g.B_H, g.B_H + L_M * g.D_H,
                   g.B_M + L_H * g.D_M, g.A_M + L_H * g.B_M,
                   -(g.b_H + L_M * g.d_H), -(g.b_M + L_H * g.d_M), "ccve");
}

CcveResult solve_ccve(const ScalarQuadraticGame& g) {
  double c2, c1, c0;
  ccve_polynomial(g, &c2, &c1, &c0);
  std::vector<double> slopes;
  double scale = std::max({std::fabs(c2), std::fabs(c1), std::fabs(c0)});
  if (scale == 0.0) {
    fail(ErrorCode::kNoEquilibrium, "ccve: every slope is consistent");
  }
  if (std::fabs(c2) <= 1e-14 * scale) {
    if (std::fabs(c1) <= 1e-14 * scale) {
      fail(ErrorCode::kNoEquilibrium, "ccve: slope polynomial has no root");
    }
    slopes.push_back(-c0 / c1);
  } else {
    double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) {
      fail(ErrorCode::kNoEquilibrium, "ccve: negative discriminant, no real CCVE");
    }
    double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
    if (q == 0.0) {
      slopes.push_back(0.0);
    } else {
      slopes.push_back(q / c2);
      slopes.push_back(c0 / q);
    }
  }

  CcveResult result;
  for (double L_M : slopes) {
    CcveRoot root;
    root.L_M = L_M;
    try {
      root.L_H = human_slope_map(g, L_M);
      root.dF = cv_best_response_map_derivative(g, L_M);
      root.stability = classify_multiplier(std::fabs(root.dF));
      root.action = ccve_actions(g, root.L_H, L_M);
      root.action_valid = true;
    } catch (const Error& e) {
      root.note = e.what();
    }
    result.roots.push_back(root);
  }
  std::stable_sort(result.roots.begin(), result.roots.end(),
                   [](const CcveRoot& a, const CcveRoot& b) {
                     double fa = std::isnan(a.dF) ? INFINITY : std::fabs(a.dF);
                     double fb = std::isnan(b.dF) ? INFINITY : std::fabs(b.dF);
                     return fa < fb;
                   });
  return result;
}

RseResult solve_rse(const ScalarQuadraticGame& g, JointAction target) {
  QuadraticCost hc = g.human();
  double gh = hc.A * target.h + hc.B * target.m + hc.b;
  double gm = hc.B * target.h + hc.D * target.m + hc.d;
  if (std::fabs(gm) < kSingularTol) {
    fail(ErrorCode::kInfeasiblePolicy,
         "rse: target is not reachable by an anchored linear policy "
         "(human cost is flat in m at the target)");
  }
  double L = -gh / gm;
  if (!(g.A_H + g.B_H * L > 0.0)) {
    fail(ErrorCode::kInfeasiblePolicy, "rse: second-order condition A_H + B_H L_M > 0 fails");
  }
  if (!(g.A_H + 2.0 * L * g.B_H + L * L * g.D_H > 0.0)) {
    fail(ErrorCode::kInfeasiblePolicy, "rse: steered human cost is not strictly convex");
  }
  RseResult r;
  r.L_M = L;
  r.L_H = human_slope_map(g, L);
  double h = human_best_response_to_policy(g, L, target.m - L * target.h);
  r.action = {h, L * (h - target.h) + target.m};
  r.stability = classify_real_parts(policy_gradient_second_derivative(g, L, target));
  return r;
}

CvIterationTrace k_level_iteration(const ScalarQuadraticGame& g, double L0,
                                   int K) {
  CvIterationTrace trace;
  double L_M = L0;
  double L_H;
  try {
    L_H = machine_slope_map_inverse(g, L0);
  } catch (const Error& e) {
    trace.truncated = true;
    trace.error = e.what();
    return trace;
  }
  for (int k = 0; k <= K; ++k) {
    try {
      CvIterationStep step;
      step.k = k;
      step.L_H = L_H;
      step.L_M = L_M;
      step.ell_M = machine_intercept_map(g, L_H);
      double h = human_best_response_to_policy(g, L_M, step.ell_M);
      step.action = {h, L_M * h + step.ell_M};
      trace.steps.push_back(step);
      if (k == K) break;
      L_H = human_slope_map(g, L_M);
      L_M = machine_slope_map(g, L_H);
    } catch (const Error& e) {
      trace.truncated = true;
      trace.error = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  return trace;
}

namespace {

struct SteerTerms {
  double h, dh, d2h, m, dm, d2m;
};

// Human best response h(L) to m = L (h - anchor.h) + anchor.m and its first
// two derivatives in L, from h = N / Q.
SteerTerms steer(const ScalarQuadraticGame& g, double L, JointAction anchor) {
  QuadraticCost c = g.human();
  double delta = anchor.m - L * anchor.h;
  double ddelta = -anchor.h;
  double N = -(c.b + L * c.d + delta * (c.B + L * c.D));
  double dN = -(c.d + ddelta * (c.B + L * c.D) + delta * c.D);
  double d2N = -2.0 * ddelta * c.D;
  double Q = c.A + 2.0 * L * c.B + L * L * c.D;
  if (!(Q > kSingularTol)) {
    fail(ErrorCode::kInfeasiblePolicy,
         "steered cost undefined: human second-order condition fails at L = " +
             format_real(L));
  }
  double dQ = 2.0 * c.B + 2.0 * L * c.D;
  double d2Q = 2.0 * c.D;
  SteerTerms t;
  t.h = N / Q;
  t.dh = (dN * Q - N * dQ) / (Q * Q);
  t.d2h = (d2N * Q - N * d2Q) / (Q * Q) - 2.0 * dQ * (dN * Q - N * dQ) / (Q * Q * Q);
  t.m = L * t.h + delta;
  t.dm = t.h + L * t.dh + ddelta;
  t.d2m = 2.0 * t.dh + L * t.d2h;
  return t;
}

}  // namespace

double steered_machine_cost(const ScalarQuadraticGame& g, double L,
                            JointAction anchor) {
  SteerTerms t = steer(g, L, anchor);
  return eval_cost(Cost(g.machine()), t.m, t.h);
}

double policy_gradient_closed_form(const ScalarQuadraticGame& g, double L,
                                   JointAction anchor) {
  SteerTerms t = steer(g, L, anchor);
  QuadraticCost c = g.machine();
  double dm_c = c.A * t.m + c.B * t.h + c.b;
  double dh_c = c.B * t.m + c.D * t.h + c.d;
  return dm_c * t.dm + dh_c * t.dh;
}

double policy_gradient_closed_form(const ScalarQuadraticGame& g, double L) {
  return policy_gradient_closed_form(g, L, solve_optima(g).machine);
}

double policy_gradient_second_derivative(const ScalarQuadraticGame& g,
                                         double L, JointAction anchor) {
  SteerTerms t = steer(g, L, anchor);
  QuadraticCost c = g.machine();
  double dm_c = c.A * t.m + c.B * t.h + c.b;
  double dh_c = c.B * t.m + c.D * t.h + c.d;
  return (c.A * t.dm + c.B * t.dh) * t.dm + dm_c * t.d2m +
         (c.B * t.dm + c.D * t.dh) * t.dh + dh_c * t.d2h;
}

std::vector<CurvePoint> pareto_frontier(const ScalarQuadraticGame& g,
                                        const std::vector<double>& gammas) {
  std::vector<CurvePoint> out;
  for (double gamma : gammas) {
    CurvePoint p;
    p.param = gamma;
    double w = 1.0 - gamma;
    double a11 = gamma * g.A_H + w * g.D_M;
    double a12 = gamma * g.B_H + w * g.B_M;
    double a22 = gamma * g.D_H + w * g.A_M;
    if (!(a11 > 0.0) || !(a11 * a22 - a12 * a12 > 0.0)) {
      p.note = "weighted Hessian not positive definite";
    } else {
      p.action = solve_2x2(a11, a12, a12, a22, -(gamma * g.b_H + w * g.d_M),
                           -(gamma * g.d_H + w * g.b_M), "pareto");
      p.valid = true;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> consistency_curve(const ScalarQuadraticGame& g,
                                          const std::vector<double>& slopes,
                                          std::optional<JointAction> anchor) {
  JointAction a = anchor ? *anchor : solve_optima(g).machine;
  std::vector<CurvePoint> out;
  for (double L : slopes) {
    CurvePoint p;
    p.param = L;
    try {
      double delta = a.m - L * a.h;
      double h = human_best_response_to_policy(g, L, delta);
      p.action = {h, L * h + delta};
      p.valid = true;
    } catch (const Error& e) {
      p.note = e.what();
    }
    out.push_back(p);
  }
  return out;
}

namespace numeric {

namespace {

constexpr double kSlopeStep = 1e-5;
constexpr double kMapStep = 1e-3;

Player opponent(Player who) {
  return who == Player::kHuman ? Player::kMachine : Player::kHuman;
}

Interval bounds_or_fail(const Game& game, Player who) {
  const auto& b = game.bounds(who);
  if (!b) {
    fail(ErrorCode::kInvalidArgument,
         std::string("numeric solver needs ") + player_name(who) + " action bounds");
  }
  return *b;
}

JointAction make_action(Player who, double own, double other) {
  return who == Player::kHuman ? JointAction{own, other} : JointAction{other, own};
}

JointAction start_point(const Game& game) {
  JointAction x;
  if (game.human_bounds) x.h = 0.5 * (game.human_bounds->lo + game.human_bounds->hi);
  if (game.machine_bounds) x.m = 0.5 * (game.machine_bounds->lo + game.machine_bounds->hi);
  return x;
}

JointAction player_optimum(const Game& game, Player who) {
  const Cost& cost = game.cost(who);
  if (const auto* q = std::get_if<QuadraticCost>(&cost)) {
    require_positive_definite(q->A, q->B, q->D, player_name(who));
    JointAction x = solve_2x2(q->A, q->B, q->B, q->D, -q->b, -q->d, "optimum");
    return make_action(who, x.h, x.m);
  }
  Interval own_b = bounds_or_fail(game, who);
  Interval other_b = bounds_or_fail(game, opponent(who));
  auto inner = [&](double other) {
    return golden_section_minimize(
        [&](double own) { return eval_cost(cost, own, other); }, own_b.lo, own_b.hi);
  };
  double other = golden_section_minimize(
      [&](double o) { return eval_cost(cost, inner(o), o); }, other_b.lo, other_b.hi);
  return make_action(who, inner(other), other);
}

// Jacobian of (d_h c_H + L_M d_m c_H, d_m c_M + L_H d_h c_M) by central
// differences.
StabilityInfo field_stability(const Game& game, JointAction x, double L_H,
                              double L_M) {
  auto field = [&](JointAction a, double* fh, double* fm) {
    *fh = grad_with_conjecture(game, Player::kHuman, a, L_M);
    *fm = grad_with_conjecture(game, Player::kMachine, a, L_H);
  };
  const double e = kSlopeStep;
  double fh_p, fm_p, fh_n, fm_n;
  field({x.h + e, x.m}, &fh_p, &fm_p);
  field({x.h - e, x.m}, &fh_n, &fm_n);
  double j11 = (fh_p - fh_n) / (2 * e), j21 = (fm_p - fm_n) / (2 * e);
  field({x.h, x.m + e}, &fh_p, &fm_p);
  field({x.h, x.m - e}, &fh_n, &fm_n);
  double j12 = (fh_p - fh_n) / (2 * e), j22 = (fm_p - fm_n) / (2 * e);
  return classify_real_parts(min_real(eigenvalues_2x2(j11, j12, j21, j22)));
}

double response_slope(const Game& game, Player who, double other,
                      double opponent_slope) {
  const double e = kSlopeStep;
  return (conjectural_response(game, who, other + e, opponent_slope) -
          conjectural_response(game, who, other - e, opponent_slope)) /
         (2 * e);
}

}  // namespace

Optima solve_optima(const Game& game) {
  return {player_optimum(game, Player::kHuman), player_optimum(game, Player::kMachine)};
}

double conjectural_response(const Game& game, Player who, double other,
                            double opponent_slope) {
  const Cost& cost = game.cost(who);
  const auto& bounds = game.bounds(who);
  if (const auto* q = std::get_if<QuadraticCost>(&cost)) {
    double den = q->A + opponent_slope * q->B;
    double own = checked_ratio(
        -(q->B * other + q->b + opponent_slope * (q->D * other + q->d)), den,
        "conjectural response");
    return bounds ? bounds->clamp(own) : own;
  }
  const auto& c = std::get<CobbDouglasCost>(cost);
  Interval b = bounds_or_fail(game, who);
  double lo = std::max(b.lo, -c.d * other + 1e-12);
  double hi = std::min(b.hi, 1.0 - 1e-12);
  if (lo > hi) {
    fail(ErrorCode::kDomain, "conjectural response: empty Cobb-Douglas domain");
  }
  auto f = [&](double own) {
    double d_own, d_other;
    cost_partials(cost, own, other, &d_own, &d_other);
    return d_own + opponent_slope * d_other;
  };
  double flo = f(lo), fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  boost::uintmax_t max_iter = 200;
  auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (r.first + r.second);
}

JointAction conjectural_actions(const Game& game, double L_H, double L_M) {
  JointAction x = start_point(game);
  for (int it = 0; it < 10000; ++it) {
    double h = conjectural_response(game, Player::kHuman, x.m, L_M);
    double m = conjectural_response(game, Player::kMachine, h, L_H);
    double change = std::fabs(h - x.h) + std::fabs(m - x.m);
    x = {h, m};
    if (change < 1e-14) return x;
  }
  fail(ErrorCode::kNoEquilibrium, "conjectural action iteration did not converge");
}

NashResult solve_nash(const Game& game) {
  JointAction x = start_point(game);
  for (int it = 0; it < 10000; ++it) {
    double bh = best_response_to_action(game, Player::kHuman, x.m);
    double bm = best_response_to_action(game, Player::kMachine, x.h);
    double residual = std::max(std::fabs(bh - x.h), std::fabs(bm - x.m));
    if (residual < 1e-9) {
      NashResult r;
      r.action = {bh, bm};
      r.stability = field_stability(game, r.action, 0.0, 0.0);
      return r;
    }
    x = {0.5 * (x.h + bh), 0.5 * (x.m + bm)};
  }
  fail(ErrorCode::kNoEquilibrium, "nash: best-response iteration did not converge");
}

StackelbergResult solve_stackelberg(const Game& game) {
  Interval hb = bounds_or_fail(game, Player::kHuman);
  auto follower = [&](double h) {
    return best_response_to_action(game, Player::kMachine, h);
  };
  double h = golden_section_minimize(
      [&](double x) { return eval_cost(game, Player::kHuman, {x, follower(x)}); },
      hb.lo, hb.hi);
  StackelbergResult r;
  r.action = {h, follower(h)};
  const double e = kSlopeStep;
  r.L_M = (follower(h + e) - follower(h - e)) / (2 * e);
  r.L_H = response_slope(game, Player::kHuman, r.action.m, r.L_M);
  r.stability = field_stability(game, r.action, 0.0, r.L_M);
  return r;
}

CcveRoot solve_ccve(const Game& game) {
  double L_H = 0.0;
  JointAction x = conjectural_actions(game, 0.0, 0.0);
  double L_M = response_slope(game, Player::kMachine, x.h, 0.0);
  bool converged = false;
  for (int it = 0; it < 1000 && !converged; ++it) {
    x = conjectural_actions(game, L_H, L_M);
    double L_H_next = response_slope(game, Player::kHuman, x.m, L_M);
    double L_M_next = response_slope(game, Player::kMachine, x.h, L_H_next);
    converged = std::fabs(L_H_next - L_H) + std::fabs(L_M_next - L_M) < 1e-10;
    L_H = L_H_next;
    L_M = L_M_next;
  }
  if (!converged) {
    fail(ErrorCode::kNoEquilibrium, "ccve: slope iteration did not converge");
  }
  CcveRoot root;
  root.L_H = L_H;
  root.L_M = L_M;
  root.action = conjectural_actions(game, L_H, L_M);
  root.action_valid = true;
  auto F = [&](double l) {
    double lh = response_slope(game, Player::kHuman, root.action.m, l);
    return response_slope(game, Player::kMachine, root.action.h, lh);
  };
  root.dF = (F(L_M + kMapStep) - F(L_M - kMapStep)) / (2 * kMapStep);
  root.stability = classify_multiplier(std::fabs(root.dF));
  return root;
}

RseResult solve_rse(const Game& game, JointAction target) {
  Gradient gh = grad(game, Player::kHuman, target);
  if (std::fabs(gh.dm) < kSingularTol) {
    fail(ErrorCode::kInfeasiblePolicy,
         "rse: target is not reachable by an anchored linear policy");
  }
  double L = -gh.dh / gh.dm;
  AffinePolicy policy = AffinePolicy::anchored(L, target);
  auto along = [&](double h) { return eval_cost(game, Player::kHuman, {h, policy(h)}); };
  const double e = 1e-4;
  double curvature = along(target.h + e) - 2 * along(target.h) + along(target.h - e);
  if (!(curvature > 0.0)) {
    fail(ErrorCode::kInfeasiblePolicy, "rse: steered human cost is not convex at the target");
  }
  RseResult r;
  r.L_M = L;
  r.L_H = response_slope(game, Player::kHuman, target.m, L);
  Interval hb = game.human_bounds.value_or(Interval{target.h - 1.0, target.h + 1.0});
  auto steered = [&](double slope) {
    AffinePolicy p = AffinePolicy::anchored(slope, target);
    double h = golden_section_minimize(
        [&](double x) { return eval_cost(game, Player::kHuman, {x, p(x)}); }, hb.lo, hb.hi);
    return eval_cost(game, Player::kMachine, {h, p(h)});
  };
  double h = golden_section_minimize(along, hb.lo, hb.hi);
  r.action = {h, policy(h)};
  const double s = 1e-2;
  r.stability = classify_real_parts((steered(L + s) - 2 * steered(L) + steered(L - s)) / (s * s));
  return r;
}

}  // namespace numeric

namespace {

template <typename Fn>
void fill(EquilibriumEntry& e, Fn&& fn) {
  try {
    fn();
    e.valid = true;
  } catch (const Error& ex) {
    e.valid = false;
    e.note = ex.what();
  }
}

}  // namespace

EquilibriumReport solve_report(const Game& game,
                               std::optional<JointAction> rse_target) {
  EquilibriumReport r;
  r.human_optimum.name = "human_optimum";
  r.machine_optimum.name = "machine_optimum";
  r.nash.name = "nash";
  r.stackelberg.name = "stackelberg";
  r.ccve.name = "ccve";
  r.rse.name = "rse";

  const bool quad = game.is_quadratic();
  std::optional<ScalarQuadraticGame> g;
  if (quad) g = game.quadratic();

  std::optional<Optima> optima;
  try {
    optima = quad ? solve_optima(*g) : numeric::solve_optima(game);
  } catch (const Error& ex) {
    r.human_optimum.note = r.machine_optimum.note = ex.what();
  }
  if (optima) {
    r.human_optimum.action = optima->human;
    r.human_optimum.valid = true;
    r.machine_optimum.action = optima->machine;
    r.machine_optimum.valid = true;
  }

  fill(r.nash, [&] {
    NashResult n = quad ? solve_nash(*g) : numeric::solve_nash(game);
    r.nash.action = n.action;
    r.nash.stability = n.stability;
  });
  fill(r.stackelberg, [&] {
    StackelbergResult s = quad ? solve_stackelberg(*g) : numeric::solve_stackelberg(game);
    r.stackelberg.action = s.action;
    r.stackelberg.L_H = s.L_H;
    r.stackelberg.L_M = s.L_M;
    r.stackelberg.stability = s.stability;
  });
  fill(r.ccve, [&] {
    CcveRoot root;
    if (quad) {
      CcveResult c = solve_ccve(*g);
      r.ccve_roots = c.roots;
      root = c.selected();
    } else {
      root = numeric::solve_ccve(game);
      r.ccve_roots = {root};
    }
    if (!root.action_valid) fail(ErrorCode::kNoEquilibrium, "ccve: " + root.note);
    r.ccve.action = root.action;
    r.ccve.L_H = root.L_H;
    r.ccve.L_M = root.L_M;
    r.ccve.stability = root.stability;
  });
  fill(r.rse, [&] {
    if (!rse_target && !optima) {
      fail(ErrorCode::kNoOptimum, "rse: no machine optimum to target");
    }
    JointAction target = rse_target ? *rse_target : optima->machine;
    RseResult s = quad ? solve_rse(*g, target) : numeric::solve_rse(game, target);
    r.rse.action = s.action;
    r.rse.L_H = s.L_H;
    r.rse.L_M = s.L_M;
    r.rse.stability = s.stability;
  });
  return r;
}

std::string report_to_text(const EquilibriumReport& report) {
  std::ostringstream os;
  for (const EquilibriumEntry* e : report.entries()) {
    os << e->name << ":";
    if (!e->valid) {
      os << " unavailable (" << e->note << ")\n";
      continue;
    }
    os << " h=" << format_real(e->action.h) << " m=" << format_real(e->action.m);
    if (!std::isnan(e->L_H)) os << " L_H=" << format_real(e->L_H);
    if (!std::isnan(e->L_M)) os << " L_M=" << format_real(e->L_M);
    if (!std::isnan(e->stability.diagnostic)) {
      os << " stability=" << stability_name(e->stability.flag)
         << " diagnostic=" << format_real(e->stability.diagnostic);
    }
    os << "\n";
  }
  for (size_t i = 0; i < report.ccve_roots.size(); ++i) {
    const CcveRoot& root = report.ccve_roots[i];
    os << "ccve_root[" << i << "]: L_M=" << format_real(root.L_M)
       << " L_H=" << format_real(root.L_H) << " dF=" << format_real(root.dF)
       << " stability=" << stability_name(root.stability.flag);
    if (root.action_valid) {
      os << " h=" << format_real(root.action.h) << " m=" << format_real(root.action.m);
    } else {
      os << " actions unavailable (" << root.note << ")";
    }
    os << "\n";
  }
  return os.str();
}

std::string report_to_csv(const EquilibriumReport& report) {
  std::ostringstream os;
  os << "name,h,m,L_H,L_M,stability,diagnostic\n";
  for (const EquilibriumEntry* e : report.entries()) {
    os << e->name << ",";
    if (!e->valid) {
      os << "nan,nan,nan,nan,unavailable,nan\n";
      continue;
    }
    os << format_real(e->action.h) << "," << format_real(e->action.m) << ","
       << format_real(e->L_H) << "," << format_real(e->L_M) << ","
       << (std::isnan(e->stability.diagnostic) ? "n/a" : stability_name(e->stability.flag))
       << "," << format_real(e->stability.diagnostic) << "\n";
  }
  return os.str();
}

}  // namespace coadapt
