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

#ifndef COADAPT_HARNESS_H_
#define COADAPT_HARNESS_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adaptation.h"
#include "equilibria.h"
#include "game.h"
#include "json.hpp"
#include "rng.h"
#include "stats.h"

namespace coadapt {

// Human actions a live cursor can reach when the game leaves h unbounded.
inline constexpr Interval kCursorRange{-1.0, 1.0};

enum class HumanKind { kFDGradient, kConjAware, kBestResponder, kLive };

const char* human_kind_name(HumanKind k);

struct StrategyConfig {
  // Experiment 1 rates; infinity selects the limit policy.
  std::vector<double> alphas{0.0, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0};
  std::optional<AffinePolicy> infinite_rate_policy;
  double delta = 0.1;
  double Delta = 0.1;
  double gamma = 2.0;
  std::optional<double> initial_slope;
  std::optional<JointAction> anchor;
  bool perturbed_first = false;
};

struct HumanConfig {
  HumanKind kind = HumanKind::kConjAware;
  double beta = 3e-3;
  double probe = 1e-5;
  double noise = 0.0;
};

struct ExperimentConfig {
  int experiment = 1;
  nlohmann::json game_spec = "canonical";
  Game game;
  StrategyConfig strategy;
  HumanConfig human;
  int trials_per_condition = 1;
  double trial_duration_s = 40.0;
  double sample_rate_hz = 60.0;
  std::optional<int> samples_per_trial;
  int iterations = 10;
  Interval init_h{-0.4, 0.4};
  Interval init_m{-0.4, 0.4};
  int rest_every = 3;
  double rest_seconds = 30.0;
  bool mirror = true;
  double tail_fraction = 1.0;
  bool attention_check = true;
  uint64_t seed = 0;

  // Samples per trial after the initial one: T = duration * rate.
  int samples() const;
};

// Builds a config from its structured form, filling experiment-dependent
// defaults. Field errors name the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::string& base_dir = "");
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig default_config(int experiment);

struct TrialCondition {
  double alpha = kNaN;  // experiment 1
  int k = -1;           // experiments 2 and 3
  Phase phase = Phase::kNominal;
  bool rerun = false;
};

std::string condition_label(const TrialCondition& c);

struct TrialSpec {
  int index = 0;
  TrialCondition condition;
  int s = 1;
  JointAction init;
};

struct TrialRecord {
  int index = 0;
  int experiment = 1;
  TrialCondition condition;
  int s = 1;
  JointAction init;
  double policy_slope = kNaN;
  double policy_intercept = kNaN;
  std::vector<double> h, m, c_H, c_M;
  double med_h = kNaN, med_m = kNaN, med_cH = kNaN, med_cM = kNaN;
  bool incomplete = false;

  JointAction medians() const { return {med_h, med_m}; }
  JointAction endpoint() const { return {h.back(), m.back()}; }
};

struct IterationTrace {
  int k = 0;
  double L_M = kNaN;
  double ell_M = kNaN;
  double L_hat_H = kNaN;  // experiment 2
  double grad = kNaN;     // experiment 3
  JointAction nominal;
  JointAction perturbed;
  double nominal_cost = kNaN;
  double perturbed_cost = kNaN;
};

struct StrategyTrace {
  std::vector<IterationTrace> iterations;
  double final_slope = kNaN;
  double final_intercept = kNaN;
};

struct PairMedians {
  JointAction nominal;
  JointAction perturbed;
  double nominal_cost = kNaN;
  double perturbed_cost = kNaN;
};

// Throws kPairing unless the records are one nominal and one perturbed
// trial of the same iteration.
PairMedians pair_medians(const std::vector<TrialRecord>& pair);

// Computes medians of the record's series over the trailing fraction.
void compute_medians(TrialRecord& r, double tail_fraction);

// Trial sequencing and machine adaptation shared by simulated runs and live
// sessions. The caller supplies one human action per sample.
class ExperimentEngine {
 public:
  explicit ExperimentEngine(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const Game& game() const { return cfg_.game; }
  int samples_per_trial() const { return T_ + 1; }
  const std::vector<TrialSpec>& schedule() const { return schedule_; }
  size_t position() const { return pos_; }
  bool finished() const { return pos_ >= schedule_.size(); }
  const TrialSpec& current() const;
  bool in_trial() const { return in_trial_; }

  void begin_trial();
  // Records the sample for human action h and returns the machine action
  // played alongside it.
  double step(double h);
  int samples_taken() const { return static_cast<int>(current_.h.size()); }
  bool trial_complete() const { return samples_taken() >= samples_per_trial(); }
  // Samples recorded so far in the open trial.
  const TrialRecord& current_record() const { return current_; }

  // Policy the human faces in the current trial; for gradient play the line
  // the machine settles on.
  AffinePolicy effective_policy() const;
  const GradientPlay& gradient_play() const;
  const MachineStrategy& strategy() const { return strategy_; }

  // Closes a complete trial and runs the between-trial update.
  TrialRecord end_trial();
  // Closes the current trial early; the record is flagged incomplete and
  // no update runs.
  TrialRecord abandon_trial();

  const std::vector<TrialRecord>& records() const { return records_; }
  const StrategyTrace& trace() const { return trace_; }

 private:
  void update_after(const TrialRecord& r);

  ExperimentConfig cfg_;
  int T_ = 0;
  Rng rng_;
  std::vector<TrialSpec> schedule_;
  size_t pos_ = 0;
  bool in_trial_ = false;
  MachineStrategy strategy_;
  double nash_m_ = 0.0;
  AffinePolicy limit_policy_;
  AffinePolicy response_line_;
  AffinePolicy trial_policy_;
  TrialRecord current_;
  std::vector<TrialRecord> records_;
  std::vector<TrialRecord> pair_;
  std::set<int> reruns_;
  StrategyTrace trace_;
};

struct ExperimentResult {
  int subject = 0;
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  StrategyTrace trace;
};

// Runs every trial against the configured simulated human.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
// Runs `subjects` independent simulated subjects with derived seeds.
std::vector<ExperimentResult> run_population(const ExperimentConfig& cfg,
                                             int subjects);

nlohmann::json trial_to_json(const TrialRecord& r, int subject);
TrialRecord trial_from_json(const nlohmann::json& j);
nlohmann::json trace_to_json(const StrategyTrace& t);
StrategyTrace trace_from_json(const nlohmann::json& j);

std::string records_to_ndjson(const std::vector<ExperimentResult>& results);
std::string summary_csv(const std::vector<ExperimentResult>& results);
std::vector<ExperimentResult> import_records(const std::string& ndjson);

// Writes experiment<id>_records.ndjson and experiment<id>_summary.csv per
// experiment id into dir. Returns the paths written.
std::vector<std::string> export_records(
    const std::vector<ExperimentResult>& results, const std::string& dir);

struct AnalysisRow {
  int experiment = 0;
  std::string stage;
  std::string quantity;
  std::string equilibrium;
  double hypothesized = kNaN;
  bool testable = false;
  std::string note;
  StatResult stat;
};

// Per-subject medians of trial medians for the first and last condition of
// each experiment, tested against the relevant equilibrium values.
std::vector<AnalysisRow> analyze(const std::vector<ExperimentResult>& subjects,
                                 const EquilibriumReport& report);
std::string analysis_to_csv(const std::vector<AnalysisRow>& rows);

}  // namespace coadapt

#endif  // COADAPT_HARNESS_H_
