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

#include "session.h"

#include <cmath>
#include <deque>
#include <sstream>

#include "error.h"

namespace coadapt {

using nlohmann::json;

const char* session_status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kIntro: return "intro";
    case SessionStatus::kTrial: return "trial";
    case SessionStatus::kRest: return "rest";
    case SessionStatus::kSurvey: return "survey";
    case SessionStatus::kDone: return "done";
  }
  return "intro";
}

namespace {

json notice(const std::string& message) { return {{"type", "notice"}, {"message", message}}; }

json error_event(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

}  // namespace

Session::Session(std::string id, const ExperimentConfig& cfg)
    : id_(std::move(id)), engine_(cfg) {
  if (cfg.human.kind != HumanKind::kLive) {
    fail(ErrorCode::kInvalidArgument, "config.human.model: sessions need model \"live\"");
  }
  append({{"create", {{"id", id_}, {"config", config_to_json(engine_.config())}}}});
}

void Session::attach_log_file(const std::string& path) {
  sink_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
  if (!*sink_) fail(ErrorCode::kIo, "cannot open session log " + path);
  for (const json& e : log_) *sink_ << e.dump() << '\n';
  sink_->flush();
}

void Session::append(json entry) {
  if (sink_) {
    *sink_ << entry.dump() << '\n';
    sink_->flush();
  }
  log_.push_back(std::move(entry));
}

std::vector<json> Session::emit(std::vector<json> events) {
  for (const json& e : events) append({{"out", e}});
  return events;
}

std::string Session::log_text() const {
  std::string out;
  for (const json& e : log_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

double Session::action_for(double x, int s) const {
  double u = s * x;
  const auto& b = engine_.game().human_bounds;
  if (!b) return u;
  return b->lo + 0.5 * (u + 1.0) * (b->hi - b->lo);
}

double Session::cursor_for(double h, int s) const {
  const auto& b = engine_.game().human_bounds;
  double u = b ? 2.0 * (h - b->lo) / (b->hi - b->lo) - 1.0 : h;
  u = std::fmax(-1.0, std::fmin(1.0, u));
  return s * u;
}

std::vector<json> Session::handle_client(const json& msg) {
  append({{"in", msg}});
  std::string type = msg.is_object() && msg.contains("type") && msg["type"].is_string()
                         ? msg["type"].get<std::string>()
                         : "";
  if (type == "start") return start();
  if (type == "survey") return submit_survey(msg);
  if (type == "input") {
    if (!msg.contains("x") || !msg["x"].is_number()) {
      return emit({error_event("invalid-argument", "input needs a numeric x")});
    }
    double ts = msg.contains("t") && msg["t"].is_number() ? msg["t"].get<double>() : 0.0;
    return on_input(msg["x"].get<double>(), ts);
  }
  return emit({error_event("invalid-argument", "unknown message type '" + type + "'")});
}

std::vector<json> Session::start() {
  if (status_ != SessionStatus::kIntro) return emit({notice("session already started")});
  std::vector<json> out;
  begin_trial(out);
  return emit(std::move(out));
}

std::vector<json> Session::on_input(double x, double) {
  // The client timestamp is logged with the message but not used.
  if (status_ != SessionStatus::kTrial) return emit({notice("input ignored outside a trial")});
  if (!std::isfinite(x)) return emit({notice("non-finite input ignored")});
  cursor_ = std::fmax(-1.0, std::fmin(1.0, x));
  return {};
}

std::vector<json> Session::submit_survey(const json& msg) {
  if (status_ != SessionStatus::kSurvey) return emit({notice("survey ignored outside the survey")});
  if (!msg.contains("items") || !msg["items"].is_array() || msg["items"].size() != kSurveyItems) {
    return emit({error_event("invalid-argument", "survey needs six items")});
  }
  std::vector<int> items;
  for (const json& v : msg["items"]) {
    if (!v.is_number_integer() || v.get<int>() < -10 || v.get<int>() > 10) {
      return emit({error_event("invalid-argument", "survey items must be integers in [-10, 10]")});
    }
    items.push_back(v.get<int>());
  }
  std::string feedback;
  if (msg.contains("feedback")) {
    if (!msg["feedback"].is_string()) {
      return emit({error_event("invalid-argument", "survey feedback must be text")});
    }
    feedback = msg["feedback"].get<std::string>();
  }
  survey_items_ = items;
  survey_feedback_ = feedback;
  status_ = SessionStatus::kDone;
  return emit({{{"type", "experimentEnd"}}});
}

std::vector<json> Session::advance(int ticks) {
  if (ticks < 0) fail(ErrorCode::kInvalidArgument, "tick count must be non-negative");
  append({{"tick", ticks}});
  std::vector<json> out;
  for (int i = 0; i < ticks; ++i) tick(out);
  return emit(std::move(out));
}

void Session::tick(std::vector<json>& out) {
  ++ticks_;
  if (status_ == SessionStatus::kRest) {
    if (--rest_left_ <= 0) begin_trial(out);
    return;
  }
  if (status_ != SessionStatus::kTrial) return;
  const TrialSpec& spec = engine_.current();
  if (!sampling_) {
    double target = cursor_for(spec.init.h, spec.s);
    dwell_ = std::fabs(cursor_ - target) <= kAttentionTolerance ? dwell_ + 1 : 0;
    if (dwell_ >= kAttentionDwellTicks) {
      sampling_ = true;
      out.push_back(notice("attention check passed"));
    }
    return;
  }
  double h = action_for(cursor_, spec.s);
  int sample = engine_.samples_taken();
  try {
    engine_.step(h);
  } catch (const Error& e) {
    end_with_error(out, error_code_name(e.code()), e.what());
    return;
  }
  // The frame carries only the human's displayed cost; machine actions stay
  // on the server.
  double c_H = engine_.current_record().c_H.back();
  out.push_back({{"type", "frame"}, {"display", display_value(c_H)}, {"sample", sample}});
  if (engine_.trial_complete()) finish_trial(out);
}

void Session::begin_trial(std::vector<json>& out) {
  engine_.begin_trial();
  const TrialSpec& spec = engine_.current();
  status_ = SessionStatus::kTrial;
  sampling_ = !engine_.config().attention_check;
  dwell_ = 0;
  if (sampling_) cursor_ = cursor_for(spec.init.h, spec.s);
  out.push_back({{"type", "trialStart"},
                 {"index", spec.index},
                 {"total", engine_.schedule().size()},
                 {"target", cursor_for(spec.init.h, spec.s)}});
}

void Session::finish_trial(std::vector<json>& out) {
  int index = engine_.current().index;
  try {
    engine_.end_trial();
  } catch (const Error& e) {
    out.push_back({{"type", "trialEnd"}, {"index", index}});
    end_with_error(out, error_code_name(e.code()), e.what());
    return;
  }
  out.push_back({{"type", "trialEnd"}, {"index", index}});
  ++completed_;
  sampling_ = false;
  const ExperimentConfig& cfg = engine_.config();
  if (engine_.finished()) {
    status_ = SessionStatus::kSurvey;
    out.push_back({{"type", "surveyPrompt"}, {"items", kSurveyItems}, {"min", -10}, {"max", 10}});
    return;
  }
  if (cfg.rest_every > 0 && completed_ % cfg.rest_every == 0) {
    rest_left_ = static_cast<int>(std::llround(cfg.rest_seconds * cfg.sample_rate_hz));
    if (rest_left_ > 0) {
      status_ = SessionStatus::kRest;
      out.push_back({{"type", "restStart"}, {"seconds", cfg.rest_seconds}});
      return;
    }
  }
  begin_trial(out);
}

void Session::end_with_error(std::vector<json>& out, const std::string& code,
                             const std::string& message) {
  status_ = SessionStatus::kDone;
  sampling_ = false;
  out.push_back(error_event(code, message));
  out.push_back({{"type", "experimentEnd"}});
}

json Session::status_json() const {
  json j;
  j["id"] = id_;
  j["status"] = session_status_name(status_);
  j["experiment"] = engine_.config().experiment;
  j["trial"] = engine_.finished() ? json(nullptr) : json(engine_.current().index);
  j["trials_total"] = engine_.schedule().size();
  j["trials_completed"] = completed_;
  j["sample"] = engine_.in_trial() ? engine_.samples_taken() : 0;
  j["ticks"] = ticks_;
  if (status_ == SessionStatus::kRest) j["rest_ticks_left"] = rest_left_;
  return j;
}

ReplayResult replay_log(const std::string& text) {
  std::vector<json> entries;
  std::vector<int> line_of;
  bool truncated = false;
  {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    for (size_t i = 0; i < lines.size(); ++i) {
      lineno = static_cast<int>(i) + 1;
      if (lines[i].empty()) continue;
      try {
        entries.push_back(json::parse(lines[i]));
        line_of.push_back(lineno);
      } catch (const json::exception& e) {
        if (i + 1 == lines.size()) {
          truncated = true;
          break;
        }
        fail(ErrorCode::kReplay, "log line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  if (entries.empty() || !entries[0].contains("create")) {
    fail(ErrorCode::kReplay, "log line 1: expected a create entry");
  }
  const json& create = entries[0]["create"];
  ExperimentConfig cfg = config_from_json(create.at("config"));
  Session s(create.at("id").get<std::string>(), cfg);

  std::deque<json> pending;
  for (size_t i = 1; i < entries.size(); ++i) {
    const json& e = entries[i];
    std::string where = "log line " + std::to_string(line_of[i]);
    if (e.contains("in")) {
      if (!pending.empty()) fail(ErrorCode::kReplay, where + ": input before logged outputs");
      for (json& o : s.handle_client(e["in"])) pending.push_back(std::move(o));
    } else if (e.contains("tick")) {
      if (!pending.empty()) fail(ErrorCode::kReplay, where + ": tick before logged outputs");
      for (json& o : s.advance(e["tick"].get<int>())) pending.push_back(std::move(o));
    } else if (e.contains("out")) {
      if (pending.empty()) fail(ErrorCode::kReplay, where + ": unexpected output " + e["out"].dump());
      if (pending.front() != e["out"]) {
        fail(ErrorCode::kReplay, where + ": logged " + e["out"].dump() + " but replay produced " +
                                     pending.front().dump());
      }
      pending.pop_front();
    } else {
      fail(ErrorCode::kReplay, where + ": unknown entry");
    }
  }
  if (!pending.empty()) truncated = true;

  ReplayResult r;
  r.config = s.engine().config();
  r.status = s.status();
  r.truncated = truncated || s.status() != SessionStatus::kDone;
  ExperimentEngine& engine = s.engine_;
  if (engine.in_trial()) engine.abandon_trial();
  r.records = engine.records();
  r.trace = engine.trace();
  return r;
}

}  // namespace coadapt
