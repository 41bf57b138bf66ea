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

#ifndef COADAPT_SESSION_H_
#define COADAPT_SESSION_H_

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harness.h"
#include "json.hpp"

namespace coadapt {

enum class SessionStatus { kIntro, kTrial, kRest, kSurvey, kDone };

const char* session_status_name(SessionStatus s);

// Attention gate at trial start: the cursor must stay within kAttentionTolerance
// of the target for kAttentionDwellTicks consecutive ticks.
constexpr double kAttentionTolerance = 0.05;
constexpr int kAttentionDwellTicks = 30;
constexpr int kSurveyItems = 6;

struct ReplayResult;

// A live session driven by client messages and a server tick clock. One tick
// is one sample at the configured rate. Every message in and out, and every
// clock advance, is appended to the session log.

class Session {
 public:
  // Throws the config's field-level error when the config is invalid.
  Session(std::string id, const ExperimentConfig& cfg);

  const std::string& id() const { return id_; }
  SessionStatus status() const { return status_; }
  const ExperimentEngine& engine() const { return engine_; }

  // Appends log lines to the file as they are produced.
  void attach_log_file(const std::string& path);

  // Dispatches a client message by its type tag: start, input, survey.
  std::vector<nlohmann::json> handle_client(const nlohmann::json& msg);
  std::vector<nlohmann::json> on_input(double x, double client_ts);
  std::vector<nlohmann::json> advance(int ticks);

  // Maps a normalized cursor position to the human action for the trial's
  // mirror sign, and back.
  double action_for(double x, int s) const;
  double cursor_for(double h, int s) const;

  nlohmann::json status_json() const;
  const std::vector<nlohmann::json>& log() const { return log_; }
  std::string log_text() const;

  const std::optional<std::vector<int>>& survey_items() const { return survey_items_; }
  const std::string& survey_feedback() const { return survey_feedback_; }

 private:
  std::vector<nlohmann::json> start();
  std::vector<nlohmann::json> submit_survey(const nlohmann::json& msg);
  void tick(std::vector<nlohmann::json>& out);
  void begin_trial(std::vector<nlohmann::json>& out);
  void finish_trial(std::vector<nlohmann::json>& out);
  void end_with_error(std::vector<nlohmann::json>& out, const std::string& code,
                      const std::string& message);
  void append(nlohmann::json entry);
  std::vector<nlohmann::json> emit(std::vector<nlohmann::json> events);

  std::string id_;
  ExperimentEngine engine_;
  SessionStatus status_ = SessionStatus::kIntro;
  double cursor_ = 0.0;
  bool sampling_ = false;
  int dwell_ = 0;
  int rest_left_ = 0;
  int completed_ = 0;
  long long ticks_ = 0;
  std::optional<std::vector<int>> survey_items_;
  std::string survey_feedback_;
  std::vector<nlohmann::json> log_;
  std::unique_ptr<std::ofstream> sink_;

  friend ReplayResult replay_log(const std::string& text);
};

struct ReplayResult {
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  StrategyTrace trace;
  SessionStatus status = SessionStatus::kIntro;
  bool truncated = false;
};

// Re-runs a session log through a fresh engine. Throws kReplay at the first
// output event that differs from the logged one. A log that stops early
// yields the partial records, with any open trial flagged incomplete.
ReplayResult replay_log(const std::string& text);

}  // namespace coadapt

#endif  // COADAPT_SESSION_H_
