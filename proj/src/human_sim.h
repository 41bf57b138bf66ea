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

#ifndef COADAPT_HUMAN_SIM_H_
#define COADAPT_HUMAN_SIM_H_

#include <variant>

#include "game.h"

namespace coadapt {

// Finite-difference gradient descent: the human holds an action for K
// machine steps, then repeats the block with the action probed, and steps
// against the difference of the two observed costs.
struct FDGradient {
  double beta = 0.003;
  double probe = 1e-5;
  double h = 0.0;
  int K = 1;
};

// Gradient descent on the human cost along the machine's policy slope.
struct ConjAware {
  double beta = 3e-3;
  double h = 0.0;
};

// Plays the exact best response to the machine's effective policy.
struct BestResponder {};

using HumanModel = std::variant<FDGradient, ConjAware, BestResponder>;

// ceil(alpha / beta), at least 1; 2 for an infinite rate and 1 when no rate
// applies (NaN).
int fd_block_length(double alpha, double beta);

// h - K beta (c(h + probe) - c(h)) / probe, projected onto the human bounds.
double fd_human_step(const Game& game, FDGradient& s, double probe_cost,
                     double nominal_cost);

double conjaware_human_step(const Game& game, ConjAware& s, double L_M,
                            JointAction a);

// Minimizer of c_H(h, policy(h)), with the machine action clamped to its
// bounds. Closed form for quadratic human costs, golden section otherwise.
double best_response_oracle(const Game& game, const AffinePolicy& policy);

}  // namespace coadapt

#endif  // COADAPT_HUMAN_SIM_H_
