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

#include "game_io.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "error.h"

namespace coadapt {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_decimal(const std::string& s, const std::string& whole) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    fail(ErrorCode::kParse, "not a number: '" + whole + "'");
  }
  return v;
}

const char* kQuadKeys[] = {"A", "B", "D", "b", "d", "a"};

}  // namespace

double parse_real(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) fail(ErrorCode::kParse, "empty number");
  size_t slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s, s);
  double num = parse_decimal(trim(s.substr(0, slash)), s);
  double den = parse_decimal(trim(s.substr(slash + 1)), s);
  if (den == 0.0) fail(ErrorCode::kParse, "zero denominator in '" + s + "'");
  return num / den;
}

double json_real(const nlohmann::json& value, const std::string& field) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    try {
      return parse_real(value.get<std::string>());
    } catch (const Error& e) {
      fail(ErrorCode::kParse, field + ": " + e.what());
    }
  }
  fail(ErrorCode::kParse, field + ": expected a number");
}

Game parse_game_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::map<std::string, int> line_of;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kParse, "line " + std::to_string(n) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (kv.count(key)) {
      fail(ErrorCode::kParse, "line " + std::to_string(n) + ": duplicate key '" + key + "'");
    }
    kv[key] = trim(line.substr(eq + 1));
    line_of[key] = n;
  }

  auto take_real = [&](const std::string& key, double fallback, bool required) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) fail(ErrorCode::kParse, "missing key '" + key + "'");
      return fallback;
    }
    double v;
    try {
      v = parse_real(it->second);
    } catch (const Error& e) {
      fail(ErrorCode::kParse,
           "line " + std::to_string(line_of[key]) + " (" + key + "): " + e.what());
    }
    kv.erase(it);
    return v;
  };
  auto take_kind = [&](const std::string& key) {
    auto it = kv.find(key);
    std::string kind = it == kv.end() ? "quadratic" : it->second;
    if (it != kv.end()) kv.erase(it);
    if (kind != "quadratic" && kind != "cobb-douglas") {
      fail(ErrorCode::kParse, key + ": unknown cost kind '" + kind + "'");
    }
    return kind;
  };
  auto take_cost = [&](const std::string& kind, const std::string& suffix) -> Cost {
    if (kind == "quadratic") {
      QuadraticCost q;
      double* fields[] = {&q.A, &q.B, &q.D, &q.b, &q.d, &q.a};
      for (int i = 0; i < 6; ++i) {
        *fields[i] = take_real(std::string(kQuadKeys[i]) + suffix, *fields[i], false);
      }
      return q;
    }
    CobbDouglasCost c;
    c.a = take_real("a" + suffix, 0.0, true);
    c.b = take_real("b" + suffix, 0.0, true);
    c.d = take_real("d" + suffix, 0.0, true);
    return c;
  };
  auto take_bounds = [&](const std::string& lo_key, const std::string& hi_key)
      -> std::optional<Interval> {
    bool has_lo = kv.count(lo_key) > 0, has_hi = kv.count(hi_key) > 0;
    if (!has_lo && !has_hi) return std::nullopt;
    if (has_lo != has_hi) fail(ErrorCode::kParse, lo_key + " and " + hi_key + " must appear together");
    Interval iv{take_real(lo_key, 0, true), take_real(hi_key, 0, true)};
    if (!(iv.lo < iv.hi)) fail(ErrorCode::kParse, lo_key + " must be below " + hi_key);
    return iv;
  };

  Game g;
  std::string hk = take_kind("human_cost");
  std::string mk = take_kind("machine_cost");
  g.human = take_cost(hk, "_H");
  g.machine = take_cost(mk, "_M");
  g.human_bounds = take_bounds("h_min", "h_max");
  g.machine_bounds = take_bounds("m_min", "m_max");
  if (!kv.empty()) {
    const auto& key = kv.begin()->first;
    fail(ErrorCode::kParse,
         "line " + std::to_string(line_of[key]) + ": unknown key '" + key + "'");
  }
  return g;
}

std::string game_to_text(const Game& game) {
  std::ostringstream os;
  auto write_cost = [&](const Cost& c, const std::string& suffix) {
    if (const auto* q = std::get_if<QuadraticCost>(&c)) {
      const double vals[] = {q->A, q->B, q->D, q->b, q->d, q->a};
      for (int i = 0; i < 6; ++i) {
        os << kQuadKeys[i] << suffix << " = " << format_real(vals[i]) << "\n";
      }
    } else {
      const auto& cd = std::get<CobbDouglasCost>(c);
      os << "a" << suffix << " = " << format_real(cd.a) << "\n";
      os << "b" << suffix << " = " << format_real(cd.b) << "\n";
      os << "d" << suffix << " = " << format_real(cd.d) << "\n";
    }
  };
  auto kind = [](const Cost& c) {
    return std::holds_alternative<QuadraticCost>(c) ? "quadratic" : "cobb-douglas";
  };
  os << "human_cost = " << kind(game.human) << "\n";
  os << "machine_cost = " << kind(game.machine) << "\n";
  write_cost(game.human, "_H");
  write_cost(game.machine, "_M");
  if (game.human_bounds) {
    os << "h_min = " << format_real(game.human_bounds->lo) << "\n";
    os << "h_max = " << format_real(game.human_bounds->hi) << "\n";
  }
  if (game.machine_bounds) {
    os << "m_min = " << format_real(game.machine_bounds->lo) << "\n";
    os << "m_max = " << format_real(game.machine_bounds->hi) << "\n";
  }
  return os.str();
}

Game game_preset(const std::string& name) {
  if (name == "canonical") return Game::from(canonical_game());
  if (name == "cobb-douglas") return cobb_douglas_game();
  if (name == "cobb-douglas-policy") return cobb_douglas_policy_game();
  fail(ErrorCode::kInvalidArgument, "unknown game preset '" + name + "'");
}

namespace {

Cost cost_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) fail(ErrorCode::kParse, field + ": expected an object");
  std::string kind = j.value("kind", "quadratic");
  if (kind == "quadratic") {
    QuadraticCost q;
    double* fields[] = {&q.A, &q.B, &q.D, &q.b, &q.d, &q.a};
    for (int i = 0; i < 6; ++i) {
      if (j.contains(kQuadKeys[i])) {
        *fields[i] = json_real(j[kQuadKeys[i]], field + "." + kQuadKeys[i]);
      }
    }
    return q;
  }
  if (kind == "cobb-douglas") {
    CobbDouglasCost c;
    for (const char* k : {"a", "b", "d"}) {
      if (!j.contains(k)) fail(ErrorCode::kParse, field + "." + k + ": missing");
    }
    c.a = json_real(j["a"], field + ".a");
    c.b = json_real(j["b"], field + ".b");
    c.d = json_real(j["d"], field + ".d");
    return c;
  }
  fail(ErrorCode::kParse, field + ".kind: unknown cost kind '" + kind + "'");
}

nlohmann::json cost_to_json(const Cost& c) {
  nlohmann::json j;
  if (const auto* q = std::get_if<QuadraticCost>(&c)) {
    j = {{"kind", "quadratic"}, {"A", q->A}, {"B", q->B}, {"D", q->D},
         {"b", q->b}, {"d", q->d}, {"a", q->a}};
  } else {
    const auto& cd = std::get<CobbDouglasCost>(c);
    j = {{"kind", "cobb-douglas"}, {"a", cd.a}, {"b", cd.b}, {"d", cd.d}};
  }
  return j;
}

std::optional<Interval> interval_from_json(const nlohmann::json& j,
                                           const std::string& field) {
  if (!j.contains(field)) return std::nullopt;
  const auto& v = j[field];
  if (!v.is_array() || v.size() != 2) {
    fail(ErrorCode::kParse, field + ": expected [lo, hi]");
  }
  Interval iv{json_real(v[0], field + "[0]"), json_real(v[1], field + "[1]")};
  if (!(iv.lo < iv.hi)) fail(ErrorCode::kParse, field + ": lo must be below hi");
  return iv;
}

}  // namespace

Game game_from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (j.is_string()) return game_preset(j.get<std::string>());
  if (!j.is_object()) fail(ErrorCode::kParse, "game: expected an object or preset name");
  if (j.contains("file")) {
    std::filesystem::path p = j["file"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return load_game_file(p.string());
  }
  if (j.contains("preset")) {
    std::string name = j["preset"].get<std::string>();
    if (j.contains("machine_optimum")) {
      if (name != "canonical") {
        fail(ErrorCode::kParse, "game.machine_optimum applies only to the canonical preset");
      }
      const auto& v = j["machine_optimum"];
      if (!v.is_array() || v.size() != 2) {
        fail(ErrorCode::kParse, "game.machine_optimum: expected [h, m]");
      }
      return Game::from(shifted_machine_game(json_real(v[0], "machine_optimum[0]"),
                                             json_real(v[1], "machine_optimum[1]")));
    }
    return game_preset(name);
  }
  if (!j.contains("human") || !j.contains("machine")) {
    fail(ErrorCode::kParse, "game: needs preset, file, or human and machine costs");
  }
  Game g;
  g.human = cost_from_json(j["human"], "game.human");
  g.machine = cost_from_json(j["machine"], "game.machine");
  g.human_bounds = interval_from_json(j, "human_bounds");
  g.machine_bounds = interval_from_json(j, "machine_bounds");
  return g;
}

nlohmann::json game_to_json(const Game& game) {
  nlohmann::json j;
  j["human"] = cost_to_json(game.human);
  j["machine"] = cost_to_json(game.machine);
  if (game.human_bounds) j["human_bounds"] = {game.human_bounds->lo, game.human_bounds->hi};
  if (game.machine_bounds) {
    j["machine_bounds"] = {game.machine_bounds->lo, game.machine_bounds->hi};
  }
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << contents;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

Game load_game_file(const std::string& path) {
  std::string text = read_file(path);
  if (std::filesystem::path(path).extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, path + ": " + e.what());
    }
    return game_from_json(j, std::filesystem::path(path).parent_path().string());
  }
  try {
    return parse_game_text(text);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

}  // namespace coadapt
