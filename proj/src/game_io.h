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

#ifndef COADAPT_GAME_IO_H_
#define COADAPT_GAME_IO_H_

#include <string>

#include "game.h"
#include "json.hpp"

namespace coadapt {

// Accepts decimal literals and rationals written p/q ("-1/3").
double parse_real(const std::string& text);
// JSON numbers, or strings holding a decimal or rational literal.
double json_real(const nlohmann::json& value, const std::string& field);

// Plain-text key-value form, one coefficient per line:
//
//   # comment
//   human_cost = quadratic        (or cobb-douglas)
//   machine_cost = quadratic
//   A_H = 1
//   B_H = -1/3
//   ...
//   h_min = 0.2                   (optional action bounds)
//
// Quadratic keys are A, B, D, b, d, a with suffix _H or _M. Cobb-Douglas
// keys are a, b, d with the same suffixes. Missing quadratic coefficients
// take A = 1 and 0 otherwise.
Game parse_game_text(const std::string& text);
std::string game_to_text(const Game& game);

// Structured form used inside experiment configs. Accepts
//   {"preset": "canonical" | "cobb-douglas" | "cobb-douglas-policy"},
//   {"preset": "canonical", "machine_optimum": [h, m]},
//   {"file": "path"} (relative to base_dir), or inline
//   {"human": {"kind": "quadratic", "A": 1, ...}, "machine": {...},
//    "human_bounds": [lo, hi], "machine_bounds": [lo, hi]}.
Game game_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json game_to_json(const Game& game);
Game game_preset(const std::string& name);

// Reads a game from a .json file or a key-value text file.
Game load_game_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace coadapt

#endif  // COADAPT_GAME_IO_H_
