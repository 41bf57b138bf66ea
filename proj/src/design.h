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

#ifndef COADAPT_DESIGN_H_
#define COADAPT_DESIGN_H_

#include <string>
#include <vector>

#include "game.h"
#include "json.hpp"
#include "rng.h"

namespace coadapt {

struct DesignSpec {
  JointAction human_optimum;
  JointAction machine_optimum;
  JointAction nash;
  JointAction stackelberg;
  double D_M = 2.0;
};

struct DesignResult {
  ScalarQuadraticGame game;
  // Coefficients left free by coincident targets; they keep canonical
  // values and the design is flagged degenerate.
  std::vector<std::string> free_coefficients;
  bool degenerate() const { return !free_coefficients.empty(); }
  // Discriminant and product of the consistent-slope polynomial.
  double ccve_discriminant = 0.0;
  double ccve_product = 0.0;
};

// Coefficients (A_H = A_M = 1) placing the optima, Nash and Stackelberg
// equilibria at the targets. Throws kDesignInfeasible naming the violated
// condition.
DesignResult design_game(const DesignSpec& spec);

struct TargetError {
  std::string target;
  double error = 0.0;
  std::string note;
  // False for equilibria reported alongside the targets but not placed by
  // the design (the reverse Stackelberg point); they do not affect passing.
  bool designed = true;
};

struct DesignVerification {
  std::vector<TargetError> errors;
  double max_error = 0.0;
  bool passed = false;
};

// Re-solves the game and reports the distance of each equilibrium from its
// target. Passes when every error is below 1e-9.
DesignVerification verify_design(const ScalarQuadraticGame& game,
                                 const DesignSpec& spec);

// Draws targets separated by at least 0.1 in [-1, 1]^2 with the Stackelberg
// target on the line through the machine optimum and the Nash target, and
// D_M in [0.5, 3]. Redraws until design_game accepts the spec.
DesignSpec random_feasible_spec(Rng& rng);

DesignSpec design_spec_from_json(const nlohmann::json& j);
nlohmann::json design_spec_to_json(const DesignSpec& spec);
std::string verification_to_text(const DesignVerification& v);

}  // namespace coadapt

#endif  // COADAPT_DESIGN_H_
