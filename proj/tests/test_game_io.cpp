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

#include <filesystem>

#include "doctest.h"
#include "error.h"
#include "game_io.h"

using namespace coadapt;

namespace {

bool same_game(const Game& a, const Game& b) {
  return game_to_json(a) == game_to_json(b);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_SUITE("game-io") {

TEST_CASE("key-value text accepts fractions and comments") {
  Game g = parse_game_text(
      "# canonical game\n"
      "A_H = 1\nB_H = -1/3\nD_H = 7/15\nb_H = 2/15\nd_H = -22/75\na_H = 12/125\n"
      "A_M = 1\nB_M = -1   # coupling\nD_M = 2\n");
  CHECK(same_game(g, game_preset("canonical")));
}

TEST_CASE("text and json round trips are lossless") {
  for (const char* name : {"canonical", "cobb-douglas", "cobb-douglas-policy"}) {
    Game g = game_preset(name);
    CHECK(same_game(parse_game_text(game_to_text(g)), g));
    CHECK(same_game(game_from_json(game_to_json(g)), g));
    CHECK(same_game(game_from_json(nlohmann::json::parse(game_to_json(g).dump())), g));
  }
}

TEST_CASE("preset references and shifted machine optima") {
  CHECK(same_game(game_from_json("canonical"), game_preset("canonical")));
  nlohmann::json j = {{"preset", "canonical"}, {"machine_optimum", {0.1, -0.1}}};
  Game g = game_from_json(j);
  CHECK(std::get<QuadraticCost>(g.machine).b != 0.0);
  CHECK(code_of([] { game_preset("nope"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] {
          game_from_json({{"preset", "cobb-douglas"}, {"machine_optimum", {0, 0}}});
        }) == ErrorCode::kParse);
}

TEST_CASE("malformed game text is rejected with the line") {
  CHECK(code_of([] { parse_game_text("A_H 1\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { parse_game_text("A_H = 1\nA_H = 2\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { parse_game_text("A_H = x\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { parse_game_text("A_H = 1/0\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { parse_game_text("h_min = 0\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { parse_game_text("human_cost = cobb-douglas\na_H = 0.1\n"); }) ==
        ErrorCode::kParse);
  try {
    parse_game_text("A_H = 1\n\nB_H = oops\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("game files load by extension") {
  auto dir = std::filesystem::temp_directory_path() / "coadapt_game_io_test";
  std::filesystem::create_directories(dir);
  write_file((dir / "g.txt").string(), game_to_text(game_preset("cobb-douglas")));
  write_file((dir / "g.json").string(), game_to_json(game_preset("canonical")).dump());
  write_file((dir / "ref.json").string(), R"({"file": "g.txt"})");
  CHECK(same_game(load_game_file((dir / "g.txt").string()), game_preset("cobb-douglas")));
  CHECK(same_game(load_game_file((dir / "g.json").string()), game_preset("canonical")));
  CHECK(same_game(load_game_file((dir / "ref.json").string()), game_preset("cobb-douglas")));
  CHECK(code_of([&] { load_game_file((dir / "missing.txt").string()); }) == ErrorCode::kIo);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
