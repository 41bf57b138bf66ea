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

#include "coadapt/coadapt.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <string>

#include "design.h"
#include "equilibria.h"
#include "error.h"
#include "game_io.h"
#include "harness.h"
#include "server.h"
#include "session.h"

struct coadapt_game {
  coadapt::Game game;
};

struct coadapt_report {
  coadapt::EquilibriumReport report;
};

struct coadapt_session {
  std::unique_ptr<coadapt::Session> session;
};

struct coadapt_server {
  std::unique_ptr<coadapt::Server> server;
};

namespace {

using coadapt::ErrorCode;
using nlohmann::json;

thread_local std::string g_last_error;

template <typename F>
coadapt_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return COADAPT_OK;
  } catch (const coadapt::Error& e) {
    g_last_error = e.what();
    return static_cast<coadapt_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return COADAPT_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return COADAPT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return COADAPT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return COADAPT_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) coadapt::fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_json(const char* text, const char* what) {
  need(text, what);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    coadapt::fail(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

char* events_out(const std::vector<json>& events) {
  json arr = json::array();
  for (const json& e : events) arr.push_back(e);
  return dup(arr.dump());
}

coadapt::ServerOptions server_options(const char* options_json) {
  coadapt::ServerOptions o;
  if (!options_json) return o;
  json j = parse_json(options_json, "server options");
  if (!j.is_object()) coadapt::fail(ErrorCode::kInvalidArgument, "server options: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "address") {
      o.address = it->get<std::string>();
    } else if (k == "port") {
      int p = it->get<int>();
      if (p < 0 || p > 65535) coadapt::fail(ErrorCode::kInvalidArgument, "server options.port: out of range");
      o.port = static_cast<unsigned short>(p);
    } else if (k == "data_dir") {
      o.data_dir = it->get<std::string>();
    } else if (k == "manual_clock") {
      o.manual_clock = it->get<bool>();
    } else if (k == "seed") {
      o.seed = it->get<uint64_t>();
    } else {
      coadapt::fail(ErrorCode::kInvalidArgument, "server options." + k + ": unknown key");
    }
  }
  return o;
}

}  // namespace

extern "C" {

const char* coadapt_version(void) { return "0.1.0"; }

const char* coadapt_last_error(void) { return g_last_error.c_str(); }

const char* coadapt_status_name(coadapt_status status) {
  if (status < COADAPT_OK || status > COADAPT_ERR_INTERNAL) return "unknown";
  return coadapt::error_code_name(static_cast<ErrorCode>(status));
}

void coadapt_string_free(char* s) { std::free(s); }

coadapt_status coadapt_game_preset(const char* name, coadapt_game** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = new coadapt_game{coadapt::game_preset(name)};
  });
}

coadapt_status coadapt_game_from_text(const char* text, coadapt_game** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new coadapt_game{coadapt::parse_game_text(text)};
  });
}

coadapt_status coadapt_game_from_json(const char* text, coadapt_game** out) {
  return guarded([&] {
    need(out, "out");
    *out = new coadapt_game{coadapt::game_from_json(parse_json(text, "game"))};
  });
}

coadapt_status coadapt_game_load(const char* path, coadapt_game** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new coadapt_game{coadapt::load_game_file(path)};
  });
}

coadapt_status coadapt_game_quadratic(const double c[12], coadapt_game** out) {
  return guarded([&] {
    need(c, "coeffs");
    need(out, "out");
    coadapt::ScalarQuadraticGame g{c[0], c[1], c[2], c[3], c[4], c[5],
                                   c[6], c[7], c[8], c[9], c[10], c[11]};
    *out = new coadapt_game{coadapt::Game::from(g)};
  });
}

coadapt_status coadapt_game_to_json(const coadapt_game* game, char** out) {
  return guarded([&] {
    need(game, "game");
    need(out, "out");
    *out = dup(coadapt::game_to_json(game->game).dump());
  });
}

coadapt_status coadapt_game_to_text(const coadapt_game* game, char** out) {
  return guarded([&] {
    need(game, "game");
    need(out, "out");
    *out = dup(coadapt::game_to_text(game->game));
  });
}

coadapt_status coadapt_game_cost(const coadapt_game* game, coadapt_player who, double h, double m,
                                 double* out) {
  return guarded([&] {
    need(game, "game");
    need(out, "out");
    if (who != COADAPT_HUMAN && who != COADAPT_MACHINE) {
      coadapt::fail(ErrorCode::kInvalidArgument, "unknown player");
    }
    *out = coadapt::eval_cost(game->game,
                              who == COADAPT_HUMAN ? coadapt::Player::kHuman
                                                   : coadapt::Player::kMachine,
                              {h, m});
  });
}

void coadapt_game_free(coadapt_game* game) { delete game; }

coadapt_status coadapt_solve(const coadapt_game* game, const double* rse_target,
                             coadapt_report** out) {
  return guarded([&] {
    need(game, "game");
    need(out, "out");
    std::optional<coadapt::JointAction> target;
    if (rse_target) target = coadapt::JointAction{rse_target[0], rse_target[1]};
    *out = new coadapt_report{coadapt::solve_report(game->game, target)};
  });
}

coadapt_status coadapt_report_get(const coadapt_report* report, coadapt_equilibrium_kind kind,
                                  coadapt_equilibrium* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    if (kind < COADAPT_HUMAN_OPTIMUM || kind > COADAPT_RSE) {
      coadapt::fail(ErrorCode::kInvalidArgument, "unknown equilibrium kind");
    }
    const coadapt::EquilibriumEntry& e = *report->report.entries()[kind];
    out->valid = e.valid ? 1 : 0;
    out->h = e.action.h;
    out->m = e.action.m;
    out->L_H = e.L_H;
    out->L_M = e.L_M;
    out->stability = static_cast<coadapt_stability>(e.stability.flag);
    out->diagnostic = e.stability.diagnostic;
    if (!e.valid) coadapt::fail(ErrorCode::kNoEquilibrium, e.name + ": " + e.note);
  });
}

coadapt_status coadapt_report_to_text(const coadapt_report* report, char** out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(coadapt::report_to_text(report->report));
  });
}

coadapt_status coadapt_report_to_csv(const coadapt_report* report, char** out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(coadapt::report_to_csv(report->report));
  });
}

void coadapt_report_free(coadapt_report* report) { delete report; }

coadapt_status coadapt_design(const char* spec_json, coadapt_game** game_out,
                              char** verification_out) {
  return guarded([&] {
    need(game_out, "game_out");
    coadapt::DesignSpec spec = coadapt::design_spec_from_json(parse_json(spec_json, "design spec"));
    coadapt::DesignResult r = coadapt::design_game(spec);
    std::string text;
    if (verification_out) {
      text = coadapt::verification_to_text(coadapt::verify_design(r.game, spec));
      if (r.degenerate()) {
        text += "degenerate: free coefficients kept at canonical values:";
        for (const auto& f : r.free_coefficients) text += " " + f;
        text += "\n";
      }
    }
    *game_out = new coadapt_game{coadapt::Game::from(r.game)};
    if (verification_out) *verification_out = dup(text);
  });
}

coadapt_status coadapt_random_design_specs(uint64_t seed, int n, char** out) {
  return guarded([&] {
    need(out, "out");
    if (n < 0) coadapt::fail(ErrorCode::kInvalidArgument, "n must be non-negative");
    coadapt::Rng rng(seed);
    json arr = json::array();
    for (int i = 0; i < n; ++i) arr.push_back(coadapt::design_spec_to_json(coadapt::random_feasible_spec(rng)));
    *out = dup(arr.dump());
  });
}

coadapt_status coadapt_simulate(const char* config_json, const char* base_dir, int subjects,
                                const uint64_t* seed, char** out) {
  return guarded([&] {
    need(out, "out");
    json j = parse_json(config_json, "config");
    if (seed && j.is_object()) j["seed"] = *seed;
    coadapt::ExperimentConfig cfg = coadapt::config_from_json(j, base_dir ? base_dir : "");
    *out = dup(coadapt::records_to_ndjson(coadapt::run_population(cfg, subjects)));
  });
}

coadapt_status coadapt_export_records(const char* records_ndjson, const char* out_dir,
                                      char** paths_out) {
  return guarded([&] {
    need(records_ndjson, "records");
    need(out_dir, "out_dir");
    auto paths = coadapt::export_records(coadapt::import_records(records_ndjson), out_dir);
    if (paths_out) {
      std::string s;
      for (const auto& p : paths) s += p + "\n";
      *paths_out = dup(s);
    }
  });
}

coadapt_status coadapt_summary_csv(const char* records_ndjson, char** out) {
  return guarded([&] {
    need(records_ndjson, "records");
    need(out, "out");
    *out = dup(coadapt::summary_csv(coadapt::import_records(records_ndjson)));
  });
}

coadapt_status coadapt_analyze(const char* records_ndjson, const coadapt_game* game, char** out) {
  return guarded([&] {
    need(records_ndjson, "records");
    need(out, "out");
    auto results = coadapt::import_records(records_ndjson);
    std::map<int, std::vector<coadapt::ExperimentResult>> by_exp;
    for (auto& r : results) by_exp[r.config.experiment].push_back(std::move(r));
    std::vector<coadapt::AnalysisRow> rows;
    for (auto& [exp, rs] : by_exp) {
      const coadapt::ExperimentConfig& cfg = rs.front().config;
      const coadapt::Game& g = game ? game->game : cfg.game;
      if (game) {
        for (auto& r : rs) r.config.game = game->game;
      }
      auto report = coadapt::solve_report(g, cfg.strategy.anchor);
      auto part = coadapt::analyze(rs, report);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    *out = dup(coadapt::analysis_to_csv(rows));
  });
}

coadapt_status coadapt_session_create(const char* id, const char* config_json,
                                      coadapt_session** out) {
  return guarded([&] {
    need(id, "id");
    need(out, "out");
    json j = parse_json(config_json, "config");
    if (j.is_object()) {
      if (!j.contains("human")) j["human"] = json::object();
      if (j["human"].is_object() && !j["human"].contains("model")) j["human"]["model"] = "live";
    }
    auto cfg = coadapt::config_from_json(j);
    *out = new coadapt_session{std::make_unique<coadapt::Session>(id, cfg)};
  });
}

coadapt_status coadapt_session_message(coadapt_session* session, const char* message_json,
                                       char** out) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    *out = events_out(session->session->handle_client(parse_json(message_json, "message")));
  });
}

coadapt_status coadapt_session_advance(coadapt_session* session, int ticks, char** out) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    *out = events_out(session->session->advance(ticks));
  });
}

coadapt_status coadapt_session_status(const coadapt_session* session, char** out) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    *out = dup(session->session->status_json().dump());
  });
}

coadapt_status coadapt_session_log(const coadapt_session* session, char** out) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    *out = dup(session->session->log_text());
  });
}

void coadapt_session_free(coadapt_session* session) { delete session; }

coadapt_status coadapt_replay(const char* log_text, char** out) {
  return guarded([&] {
    need(log_text, "log");
    need(out, "out");
    coadapt::ReplayResult r = coadapt::replay_log(log_text);
    coadapt::ExperimentResult res;
    res.config = r.config;
    res.records = r.records;
    res.trace = r.trace;
    *out = dup(coadapt::records_to_ndjson({res}));
  });
}

coadapt_status coadapt_server_start(const char* options_json, coadapt_server** out,
                                    unsigned short* port) {
  return guarded([&] {
    need(out, "out");
    auto s = std::make_unique<coadapt::Server>(server_options(options_json));
    unsigned short p = s->start();
    if (port) *port = p;
    *out = new coadapt_server{std::move(s)};
  });
}

void coadapt_server_stop(coadapt_server* server) {
  if (!server) return;
  server->server->stop();
  delete server;
}

coadapt_status coadapt_server_run(const char* options_json) {
  return guarded([&] {
    coadapt::Server s(server_options(options_json));
    s.run_until_signal();
  });
}

}  // extern "C"
