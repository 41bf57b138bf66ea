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

#include "design.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "equilibria.h"
#include "error.h"
#include "game_io.h"

namespace coadapt {

namespace {

constexpr double kCoincident = 1e-12;

// num/den, or nullopt when both vanish (the coefficient is free).
std::optional<double> ratio_or_free(double num, double den, const char* what) {
  if (std::fabs(den) < kCoincident) {
    if (std::fabs(num) < kCoincident) return std::nullopt;
    fail(ErrorCode::kDesignInfeasible, std::string(what) + ": denominator vanishes");
  }
  return num / den;
}

double distance(JointAction a, JointAction b) {
  return std::max(std::fabs(a.h - b.h), std::fabs(a.m - b.m));
}

}  // namespace

DesignResult design_game(const DesignSpec& spec) {
  const ScalarQuadraticGame canon = canonical_game();
  const JointAction& hs = spec.human_optimum;
  const JointAction& ms = spec.machine_optimum;
  const JointAction& ne = spec.nash;
  const JointAction& se = spec.stackelberg;

  DesignResult out;
  ScalarQuadraticGame& g = out.game;
  g.A_H = 1.0;
  g.A_M = 1.0;
  g.D_M = spec.D_M;

  auto B_H = ratio_or_free(-(hs.h - ne.h), hs.m - ne.m, "B_H (m_H* = m_NE)");
  if (!B_H) out.free_coefficients.push_back("B_H");
  g.B_H = B_H.value_or(canon.B_H);

  auto B_M = ratio_or_free(-(ms.m - ne.m), ms.h - ne.h, "B_M (h_M* = h_NE)");
  if (!B_M) out.free_coefficients.push_back("B_M");
  g.B_M = B_M.value_or(canon.B_M);

  // The Stackelberg point must sit on the machine's best-response line,
  // which already passes through the machine optimum and the Nash point.
  double off_line = g.A_M * (se.m - ms.m) + g.B_M * (se.h - ms.h);
  if (std::fabs(off_line) > 1e-9) {
    fail(ErrorCode::kDesignInfeasible,
         "stackelberg target is off the machine best-response line by " +
             format_real(off_line));
  }

  // D_H from the leader's first-order condition at the Stackelberg target
  // with follower slope L = -B_M / A_M.
  double L = -g.B_M / g.A_M;
  double num = -((g.A_H + L * g.B_H) * (se.h - hs.h) + g.B_H * (se.m - hs.m));
  auto D_H = ratio_or_free(num, L * (se.m - hs.m), "D_H (m_SE = m_H* or zero follower slope)");
  if (!D_H) out.free_coefficients.push_back("D_H");
  g.D_H = D_H.value_or(canon.D_H);

  g.b_H = -g.A_H * hs.h - g.B_H * hs.m;
  g.d_H = -g.B_H * hs.h - g.D_H * hs.m;
  g.a_H = 0.5 * g.A_H * hs.h * hs.h + g.B_H * hs.h * hs.m + 0.5 * g.D_H * hs.m * hs.m;
  g.b_M = -g.A_M * ms.m - g.B_M * ms.h;
  g.d_M = -g.B_M * ms.m - g.D_M * ms.h;
  g.a_M = 0.5 * g.A_M * ms.m * ms.m + g.B_M * ms.h * ms.m + 0.5 * g.D_M * ms.h * ms.h;

  if (!(g.A_H * g.D_H - g.B_H * g.B_H > 0.0)) {
    fail(ErrorCode::kDesignInfeasible, "human Hessian not positive definite (D_H - B_H^2 <= 0)");
  }
  if (!(g.A_M * g.D_M - g.B_M * g.B_M > 0.0)) {
    fail(ErrorCode::kDesignInfeasible, "machine Hessian not positive definite (D_M - B_M^2 <= 0)");
  }
  if (!(g.A_H - g.B_H * g.B_M / g.A_M > 0.0)) {
    fail(ErrorCode::kDesignInfeasible, "stackelberg second-order condition A_H - B_H B_M / A_M > 0 fails");
  }
  if (!(g.A_H + 2.0 * L * g.B_H + L * L * g.D_H > 0.0)) {
    fail(ErrorCode::kDesignInfeasible, "leader's steered cost is not strictly convex");
  }
  double c2, c1, c0;
  ccve_polynomial(g, &c2, &c1, &c0);
  out.ccve_discriminant = c1 * c1 - 4.0 * c2 * c0;
  out.ccve_product = c2 * c0;
  if (!out.degenerate()) {
    if (out.ccve_discriminant < 0.0) {
      fail(ErrorCode::kDesignInfeasible,
           "D_M condition violated: CCVE discriminant " + format_real(out.ccve_discriminant) + " < 0");
    }
    if (out.ccve_product == 0.0) {
      fail(ErrorCode::kDesignInfeasible, "D_M condition violated: CCVE coefficient product is 0");
    }
  }
  return out;
}

DesignVerification verify_design(const ScalarQuadraticGame& game,
                                 const DesignSpec& spec) {
  DesignVerification v;
  auto check = [&](const std::string& name, auto&& solve, JointAction target,
                   bool designed = true) {
    TargetError e;
    e.target = name;
    e.designed = designed;
    try {
      e.error = distance(solve(), target);
    } catch (const Error& ex) {
      e.error = INFINITY;
      e.note = ex.what();
    }
    v.errors.push_back(e);
  };
  check("human_optimum", [&] { return solve_optima(game).human; }, spec.human_optimum);
  check("machine_optimum", [&] { return solve_optima(game).machine; }, spec.machine_optimum);
  check("nash", [&] { return solve_nash(game).action; }, spec.nash);
  check("stackelberg", [&] { return solve_stackelberg(game).action; }, spec.stackelberg);
  check("rse", [&] { return solve_rse(game, spec.machine_optimum).action; }, spec.machine_optimum,
        false);
  v.max_error = 0.0;
  for (const auto& e : v.errors) {
    if (e.designed) v.max_error = std::max(v.max_error, e.error);
  }
  v.passed = v.max_error < 1e-9;
  return v;
}

namespace {

JointAction pair_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field)) fail(ErrorCode::kParse, "design spec: missing " + field);
  const auto& v = j[field];
  if (!v.is_array() || v.size() != 2) {
    fail(ErrorCode::kParse, "design spec: " + field + " must be [h, m]");
  }
  return {json_real(v[0], field + "[0]"), json_real(v[1], field + "[1]")};
}

}  // namespace

DesignSpec design_spec_from_json(const nlohmann::json& j) {
  DesignSpec s;
  s.human_optimum = pair_from_json(j, "human_optimum");
  s.machine_optimum = pair_from_json(j, "machine_optimum");
  s.nash = pair_from_json(j, "nash");
  s.stackelberg = pair_from_json(j, "stackelberg");
  if (j.contains("D_M")) s.D_M = json_real(j["D_M"], "D_M");
  return s;
}

nlohmann::json design_spec_to_json(const DesignSpec& s) {
  auto pair = [](JointAction a) { return nlohmann::json::array({a.h, a.m}); };
  return {{"human_optimum", pair(s.human_optimum)},
          {"machine_optimum", pair(s.machine_optimum)},
          {"nash", pair(s.nash)},
          {"stackelberg", pair(s.stackelberg)},
          {"D_M", s.D_M}};
}

std::string verification_to_text(const DesignVerification& v) {
  std::ostringstream os;
  for (const auto& e : v.errors) {
    os << e.target << ": error=" << format_real(e.error);
    if (!e.note.empty()) os << " (" << e.note << ")";
    if (!e.designed) os << " [not a design target]";
    os << "\n";
  }
  os << "max_error=" << format_real(v.max_error) << " " << (v.passed ? "PASS" : "FAIL") << "\n";
  return os.str();
}

DesignSpec random_feasible_spec(Rng& rng) {
  // Targets stay inside the on-screen box.
  constexpr double kBox = 0.8;
  auto point = [&] { return JointAction{rng.uniform(-kBox, kBox), rng.uniform(-kBox, kBox)}; };
  auto dist = [](JointAction a, JointAction b) { return std::hypot(a.h - b.h, a.m - b.m); };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    DesignSpec s;
    s.human_optimum = point();
    s.machine_optimum = point();
    s.nash = point();
    double t = rng.uniform(0.2, 2.0) * (rng.below(2) ? 1.0 : -1.0);
    s.stackelberg = {s.nash.h + t * (s.nash.h - s.machine_optimum.h),
                     s.nash.m + t * (s.nash.m - s.machine_optimum.m)};
    s.D_M = rng.uniform(0.5, 3.0);
    const JointAction pts[] = {s.human_optimum, s.machine_optimum, s.nash, s.stackelberg};
    bool separated = std::fabs(s.stackelberg.h) <= kBox && std::fabs(s.stackelberg.m) <= kBox;
    for (int i = 0; i < 4 && separated; ++i) {
      for (int j = i + 1; j < 4; ++j) separated = separated && dist(pts[i], pts[j]) >= 0.1;
    }
    // The Nash target must not share a coordinate with the machine optimum,
    // or the best-response slope is not determined.
    separated = separated && std::fabs(s.nash.h - s.machine_optimum.h) >= 0.1;
    if (!separated) continue;
    try {
      design_game(s);
      return s;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDesignInfeasible) throw;
    }
  }
  fail(ErrorCode::kInternal, "no feasible design spec found");
}

}  // namespace coadapt
