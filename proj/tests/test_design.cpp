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

#include <cmath>

#include "design.h"
#include "doctest.h"
#include "equilibria.h"
#include "error.h"

using namespace coadapt;

namespace {

DesignSpec table_spec() {
  DesignSpec s;
  s.human_optimum = {0.1, 0.7};
  s.machine_optimum = {0.0, 0.0};
  s.nash = {-0.2, -0.2};
  s.stackelberg = {0.2, 0.2};
  s.D_M = 2.0;
  return s;
}

}  // namespace

TEST_SUITE("game-design") {

TEST_CASE("canonical targets give back the canonical coefficients") {
  DesignResult r = design_game(table_spec());
  CHECK(!r.degenerate());
  const ScalarQuadraticGame& g = r.game;
  // Rational values of the canonical costs.
  CHECK(std::fabs(g.A_H - 1.0) < 1e-12);
  CHECK(std::fabs(g.B_H - (-1.0 / 3.0)) < 1e-12);
  CHECK(std::fabs(g.D_H - 7.0 / 15.0) < 1e-12);
  CHECK(std::fabs(g.b_H - 2.0 / 15.0) < 1e-12);
  CHECK(std::fabs(g.d_H - (-22.0 / 75.0)) < 1e-12);
  CHECK(std::fabs(g.a_H - 12.0 / 125.0) < 1e-12);
  CHECK(std::fabs(g.A_M - 1.0) < 1e-12);
  CHECK(std::fabs(g.B_M - (-1.0)) < 1e-12);
  CHECK(std::fabs(g.D_M - 2.0) < 1e-12);
  CHECK(std::fabs(g.b_M) < 1e-12);
  CHECK(std::fabs(g.d_M) < 1e-12);
  CHECK(std::fabs(g.a_M) < 1e-12);
  // B_H from the optimum and Nash targets.
  CHECK(g.B_H == doctest::Approx(-(0.1 + 0.2) / (0.7 + 0.2)).epsilon(1e-14));
}

TEST_CASE("canonical round trip verifies") {
  DesignSpec s = table_spec();
  DesignVerification v = verify_design(design_game(s).game, s);
  CHECK(v.passed);
  CHECK(v.max_error < 1e-12);
  std::string text = verification_to_text(v);
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("rse: error=") != std::string::npos);
}

TEST_CASE("detuned coefficient shows up as a Nash error") {
  DesignSpec s = table_spec();
  ScalarQuadraticGame g = design_game(s).game;
  g.B_H += 0.01;
  DesignVerification v = verify_design(g, s);
  CHECK(!v.passed);
  for (const auto& e : v.errors) {
    if (e.target == "nash") CHECK(e.error > 1e-4);
  }
}

TEST_CASE("fully coincident targets are flagged degenerate") {
  DesignSpec s;
  s.human_optimum = s.machine_optimum = s.nash = s.stackelberg = {0.0, 0.0};
  s.D_M = 2.0;
  DesignResult r = design_game(s);
  CHECK(r.degenerate());
  CHECK(r.game.b_H == 0.0);
  CHECK(r.game.d_H == 0.0);
  CHECK(r.game.a_H == 0.0);
  CHECK(r.game.b_M == 0.0);
  CHECK(r.game.d_M == 0.0);
}

TEST_CASE("machine targets at the origin center the machine cost") {
  DesignSpec s = table_spec();
  s.D_M = 1.7;
  s.stackelberg = {0.25, 0.25};
  s.human_optimum = {0.15, 0.6};
  DesignResult r = design_game(s);
  CHECK(r.game.b_M == 0.0);
  CHECK(r.game.d_M == 0.0);
}

TEST_CASE("infeasible constellations name the violated condition") {
  DesignSpec s = table_spec();
  s.stackelberg = {0.2, 0.3};  // off the machine response line
  try {
    design_game(s);
    FAIL("expected design-infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDesignInfeasible);
    CHECK(std::string(e.what()).find("stackelberg") != std::string::npos);
  }
  DesignSpec t = table_spec();
  t.nash = {-0.2, 0.7};  // m_H* = m_NE with h differing
  try {
    design_game(t);
    FAIL("expected design-infeasible");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("B_H") != std::string::npos);
  }
}

TEST_CASE("shifted machine optimum design places the reverse Stackelberg point") {
  ScalarQuadraticGame g = shifted_machine_game(0.1, -0.1);
  DesignSpec s;
  Optima o = solve_optima(g);
  s.human_optimum = o.human;
  s.machine_optimum = o.machine;
  s.nash = solve_nash(g).action;
  s.stackelberg = solve_stackelberg(g).action;
  s.D_M = g.D_M;
  DesignResult r = design_game(s);
  DesignVerification v = verify_design(r.game, s);
  CHECK(v.passed);
  RseResult rse = solve_rse(r.game, s.machine_optimum);
  CHECK(std::fabs(rse.action.h - 0.1) < 1e-9);
  CHECK(std::fabs(rse.action.m + 0.1) < 1e-9);
}

TEST_CASE("random feasible specs round trip") {
  Rng rng(20260101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    DesignSpec s = random_feasible_spec(rng);
    for (JointAction a : {s.human_optimum, s.machine_optimum, s.nash, s.stackelberg}) {
      CHECK(std::fabs(a.h) <= 0.8);
      CHECK(std::fabs(a.m) <= 0.8);
    }
    DesignVerification v = verify_design(design_game(s).game, s);
    CHECK(v.passed);
    worst = std::max(worst, v.max_error);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("spec json round trip") {
  DesignSpec s = table_spec();
  DesignSpec t = design_spec_from_json(design_spec_to_json(s));
  CHECK(t.nash.h == s.nash.h);
  CHECK(t.stackelberg.m == s.stackelberg.m);
  CHECK(t.D_M == 2.0);
  nlohmann::json j = design_spec_to_json(s);
  j.erase("D_M");
  CHECK(design_spec_from_json(j).D_M == 2.0);
  j.erase("nash");
  CHECK_THROWS_AS(design_spec_from_json(j), Error);
}

}  // TEST_SUITE
