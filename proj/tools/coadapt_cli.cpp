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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "coadapt/coadapt.h"
#include "json.hpp"

namespace {

// Data directory for simulation output and session logs when no flag is given.
constexpr const char* kDataDirEnv = "COADAPT_DATA_DIR";

struct CliError {
  int code;
  std::string message;
};

void check(coadapt_status s, const std::string& context) {
  if (s != COADAPT_OK) {
    throw CliError{static_cast<int>(s),
                   context + ": " + coadapt_status_name(s) + ": " + coadapt_last_error()};
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  coadapt_string_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{COADAPT_ERR_IO, "cannot read " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError{COADAPT_ERR_IO, "cannot write " + path};
  out << text;
}

std::string data_dir_default(const std::string& fallback) {
  const char* v = std::getenv(kDataDirEnv);
  return v && *v ? v : fallback;
}

std::string parent_dir(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? "" : path.substr(0, pos);
}

coadapt_game* load_game(const std::string& path, const std::string& preset) {
  coadapt_game* g = nullptr;
  if (!path.empty()) {
    check(coadapt_game_load(path.c_str(), &g), path);
  } else {
    check(coadapt_game_preset(preset.c_str(), &g), "preset " + preset);
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coadaptation games: equilibria, design, simulated experiments, live sessions"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  bool seed_set = false;
  auto add_seed = [&](CLI::App* sub, const char* help) {
    sub->add_option_function<uint64_t>(
        "--seed", [&](const uint64_t& v) { seed = v; seed_set = true; }, help);
  };

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the equilibria of a game");
  std::string solve_game, solve_preset = "canonical", solve_format = "text", solve_out;
  std::vector<double> rse_target;
  solve->add_option("--game", solve_game, "Game file (.json or key-value text)");
  solve->add_option("--preset", solve_preset, "Preset when no file is given")
      ->check(CLI::IsMember({"canonical", "cobb-douglas", "cobb-douglas-policy"}));
  solve->add_option("--rse-target", rse_target, "Reverse Stackelberg target h m")->expected(2);
  solve->add_option("--format", solve_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  solve->add_option("--out", solve_out, "Output file (default stdout)");
  add_seed(solve, "Accepted for uniformity; solving is deterministic");

  // design
  auto* design = app.add_subcommand("design", "Design a quadratic game from equilibrium targets");
  std::string design_spec, design_out, design_format = "text";
  int design_random = 0;
  auto* spec_opt = design->add_option("--spec", design_spec, "Design spec JSON file");
  auto* random_opt =
      design->add_option("--random", design_random, "Draw and round-trip N random feasible specs");
  spec_opt->excludes(random_opt);
  design->add_option("--format", design_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  design->add_option("--out", design_out, "Write the designed game here (default stdout)");
  add_seed(design, "Seed for --random");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run an experiment against simulated humans");
  std::string sim_config, sim_out;
  int sim_subjects = 1;
  bool sim_stdout = false;
  simulate->add_option("--config", sim_config, "Experiment config JSON file")->required();
  simulate->add_option("--subjects", sim_subjects, "Number of simulated subjects")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_out,
                       std::string("Output directory (default $") + kDataDirEnv + " or .)");
  simulate->add_flag("--stdout", sim_stdout, "Print records to stdout instead of writing files");
  add_seed(simulate, "Replaces the config seed");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Test records against equilibrium values");
  std::string an_records, an_game, an_out;
  analyze->add_option("--records", an_records, "Records NDJSON file")->required();
  analyze->add_option("--game", an_game, "Game file (default: the game in the records)");
  analyze->add_option("--out", an_out, "Output CSV (default stdout)");
  add_seed(analyze, "Accepted for uniformity; analysis is deterministic");

  // replay
  auto* replay = app.add_subcommand("replay", "Replay a session log into records");
  std::string rp_log, rp_out;
  replay->add_option("--log", rp_log, "Session log file")->required();
  replay->add_option("--out", rp_out, "Output NDJSON (default stdout)");
  add_seed(replay, "Accepted for uniformity; replay is deterministic");

  // serve
  auto* serve = app.add_subcommand("serve", "Host live sessions over HTTP and WebSocket");
  int port = 8080;
  std::string address = "127.0.0.1", data_dir;
  bool manual_clock = false;
  serve->add_option("--port", port, "TCP port (0 for ephemeral)")->check(CLI::Range(0, 65535));
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--data-dir", data_dir,
                    std::string("Session log directory (default $") + kDataDirEnv + " or ./sessions)");
  serve->add_flag("--manual-clock", manual_clock, "Clients drive the clock with tick messages");
  add_seed(serve, "Seed for session ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      coadapt_game* g = load_game(solve_game, solve_preset);
      coadapt_report* r = nullptr;
      coadapt_status s = coadapt_solve(g, rse_target.empty() ? nullptr : rse_target.data(), &r);
      coadapt_game_free(g);
      check(s, "solve");
      char* text = nullptr;
      s = solve_format == "csv" ? coadapt_report_to_csv(r, &text) : coadapt_report_to_text(r, &text);
      coadapt_report_free(r);
      check(s, "solve");
      write_or_print(solve_out, take(text));
    } else if (*design) {
      if (design_random > 0) {
        char* specs = nullptr;
        check(coadapt_random_design_specs(seed, design_random, &specs), "design");
        int failed = 0;
        for (const auto& spec : nlohmann::json::parse(take(specs))) {
          coadapt_game* g = nullptr;
          char* verification = nullptr;
          check(coadapt_design(spec.dump().c_str(), &g, &verification), "design");
          coadapt_game_free(g);
          std::string v = take(verification);
          if (v.find(" PASS") == std::string::npos) ++failed;
          std::cout << spec.dump() << "\n" << v;
        }
        std::cout << (design_random - failed) << "/" << design_random << " round trips passed\n";
        return failed == 0 ? 0 : 1;
      }
      if (design_spec.empty()) throw CliError{COADAPT_ERR_INVALID_ARGUMENT, "design needs --spec or --random"};
      std::string spec = read_text(design_spec);
      coadapt_game* g = nullptr;
      char* verification = nullptr;
      check(coadapt_design(spec.c_str(), &g, &verification), design_spec);
      char* text = nullptr;
      coadapt_status s = design_format == "json" ? coadapt_game_to_json(g, &text)
                                                 : coadapt_game_to_text(g, &text);
      coadapt_game_free(g);
      check(s, "design");
      std::string game_text = take(text);
      if (design_format == "json") game_text += "\n";
      write_or_print(design_out, game_text);
      std::cerr << take(verification);
    } else if (*simulate) {
      std::string cfg = read_text(sim_config);
      char* records = nullptr;
      check(coadapt_simulate(cfg.c_str(), parent_dir(sim_config).c_str(), sim_subjects,
                             seed_set ? &seed : nullptr, &records),
            sim_config);
      std::string nd = take(records);
      if (sim_stdout) {
        std::cout << nd;
      } else {
        std::string dir = sim_out.empty() ? data_dir_default(".") : sim_out;
        char* paths = nullptr;
        check(coadapt_export_records(nd.c_str(), dir.c_str(), &paths), dir);
        std::cout << take(paths);
      }
    } else if (*analyze) {
      std::string nd = read_text(an_records);
      coadapt_game* g = an_game.empty() ? nullptr : load_game(an_game, "");
      char* csv = nullptr;
      coadapt_status s = coadapt_analyze(nd.c_str(), g, &csv);
      coadapt_game_free(g);
      check(s, an_records);
      write_or_print(an_out, take(csv));
    } else if (*replay) {
      std::string log = read_text(rp_log);
      char* out = nullptr;
      check(coadapt_replay(log.c_str(), &out), rp_log);
      write_or_print(rp_out, take(out));
    } else if (*serve) {
      std::string dir = data_dir.empty() ? data_dir_default("./sessions") : data_dir;
      nlohmann::json opts = {{"address", address},
                             {"port", port},
                             {"data_dir", dir},
                             {"manual_clock", manual_clock},
                             {"seed", seed}};
      std::cerr << "serving on " << address << ":" << port << ", logs in " << dir << "\n";
      check(coadapt_server_run(opts.dump().c_str()), "serve");
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code == 0 ? 1 : e.code;
  }
  return 0;
}
