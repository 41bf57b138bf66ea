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

#include "harness.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "error.h"
#include "game_io.h"
#include "human_sim.h"

namespace coadapt {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_cobb_douglas_preset(const json& spec) {
  if (spec.is_string()) return spec.get<std::string>() == "cobb-douglas";
  if (spec.is_object() && spec.contains("preset") && spec["preset"].is_string()) {
    return spec["preset"].get<std::string>() == "cobb-douglas";
  }
  return false;
}

bool has_cobb_douglas(const Game& g) {
  return std::holds_alternative<CobbDouglasCost>(g.human) ||
         std::holds_alternative<CobbDouglasCost>(g.machine);
}

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  fail(ErrorCode::kInvalidArgument, "config." + field + ": " + msg);
}

double get_real(const json& obj, const std::string& key, const std::string& path) {
  try {
    return json_real(obj.at(key), path);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config.") + e.what());
  }
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) field_error(path, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) field_error(path, "expected true or false");
  return v.get<bool>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& prefix) {
  if (!obj.is_object()) field_error(prefix.empty() ? "root" : prefix, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) field_error(prefix.empty() ? it.key() : prefix + "." + it.key(), "unknown key");
  }
}

double alpha_from_json(const json& v, const std::string& path) {
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
    return kInf;
  }
  try {
    return json_real(v, path);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config.") + e.what());
  }
}

json alpha_to_json(double a) {
  if (std::isinf(a)) return "inf";
  return a;
}

json real_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double real_from(const json& v) {
  if (v.is_null()) return kNaN;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  return v.get<double>();
}

JointAction pair_from_json(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) field_error(path, "expected [h, m]");
  return {alpha_from_json(v[0], path), alpha_from_json(v[1], path)};
}

Interval interval_from_json(const json& v, const std::string& path) {
  JointAction p = pair_from_json(v, path);
  if (!(p.h < p.m)) field_error(path, "expected lo < hi");
  return {p.h, p.m};
}

AffinePolicy policy_from_json(const json& v, const std::string& path) {
  check_keys(v, {"slope", "intercept", "anchor"}, path);
  if (!v.contains("slope")) field_error(path + ".slope", "required");
  double slope = get_real(v, "slope", path + ".slope");
  if (v.contains("anchor")) {
    return AffinePolicy::anchored(slope, pair_from_json(v["anchor"], path + ".anchor"));
  }
  double intercept = v.contains("intercept") ? get_real(v, "intercept", path + ".intercept") : 0.0;
  return AffinePolicy::line(slope, intercept);
}

json policy_to_json(const AffinePolicy& p) {
  json j;
  j["slope"] = p.slope;
  if (p.anchor) {
    j["anchor"] = {p.anchor->h, p.anchor->m};
  } else {
    j["intercept"] = p.intercept;
  }
  return j;
}

JointAction machine_optimum(const Game& game) {
  if (game.is_quadratic()) return solve_optima(game.quadratic()).machine;
  return numeric::solve_optima(game).machine;
}

double nash_machine_action(const Game& game) {
  if (game.is_quadratic()) return solve_nash(game.quadratic()).action.m;
  return numeric::solve_nash(game).action.m;
}

HumanKind human_kind_from(const std::string& s, const std::string& path) {
  if (s == "fd") return HumanKind::kFDGradient;
  if (s == "conjaware") return HumanKind::kConjAware;
  if (s == "best") return HumanKind::kBestResponder;
  if (s == "live") return HumanKind::kLive;
  field_error(path, "unknown human model '" + s + "' (expected fd, conjaware, best, live)");
}

const char* variant_for(int experiment) {
  switch (experiment) {
    case 1: return "gradient-play";
    case 2: return "conjectural-variation";
    default: return "policy-gradient";
  }
}

// Fills defaults that depend on the experiment and the game.
void finalize(ExperimentConfig& c) {
  if (!c.strategy.infinite_rate_policy) {
    if (is_cobb_douglas_preset(c.game_spec)) {
      // Fixed limit policy for the Cobb-Douglas game. It matches a machine
      // exponent of 0.175 rather than 0.2 but is kept as given.
      c.strategy.infinite_rate_policy = AffinePolicy::line(-77.0 / 270.0, 20.0 / 27.0);
    } else {
      c.strategy.infinite_rate_policy = machine_response_line(c.game);
    }
  }
  if (c.experiment == 3) {
    if (!c.strategy.anchor) c.strategy.anchor = machine_optimum(c.game);
    if (!c.strategy.initial_slope) {
      c.strategy.initial_slope = machine_response_line(c.game).slope;
    }
  }
}

void validate(const ExperimentConfig& c) {
  if (c.experiment < 1 || c.experiment > 3) field_error("experiment", "must be 1, 2 or 3");
  if (!(c.trial_duration_s > 0.0)) field_error("trial_duration_s", "must be positive");
  if (!(c.sample_rate_hz > 0.0)) field_error("sample_rate_hz", "must be positive");
  if (c.samples_per_trial && *c.samples_per_trial < 1) {
    field_error("samples_per_trial", "must be at least 1");
  }
  if (c.trials_per_condition < 1) field_error("trials_per_condition", "must be at least 1");
  if (c.experiment != 1 && c.trials_per_condition != 1) {
    field_error("trials_per_condition", "must be 1 for paired experiments");
  }
  if (c.iterations < 1) field_error("iterations", "must be at least 1");
  if (c.rest_every < 0) field_error("rest_every", "must be non-negative");
  if (!(c.rest_seconds >= 0.0)) field_error("rest_seconds", "must be non-negative");
  if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0)) {
    field_error("tail_fraction", "must be in (0, 1]");
  }
  if (c.experiment == 1) {
    if (c.strategy.alphas.empty()) field_error("strategy.alphas", "must not be empty");
    for (double a : c.strategy.alphas) {
      if (!(a >= 0.0)) field_error("strategy.alphas", "rates must be non-negative");
    }
  }
  if (!(std::isfinite(c.strategy.delta) && c.strategy.delta != 0.0)) {
    field_error("strategy.delta", "must be finite and nonzero");
  }
  if (!(std::isfinite(c.strategy.Delta) && c.strategy.Delta != 0.0)) {
    field_error("strategy.Delta", "must be finite and nonzero");
  }
  if (!std::isfinite(c.strategy.gamma)) field_error("strategy.gamma", "must be finite");
  if (!(c.human.beta > 0.0)) field_error("human.beta", "must be positive");
  if (!(c.human.probe > 0.0)) field_error("human.probe", "must be positive");
  if (!(c.human.noise >= 0.0)) field_error("human.noise", "must be non-negative");
  if (has_cobb_douglas(c.game) && !c.game.human_bounds) {
    field_error("game", "Cobb-Douglas games need human bounds");
  }
}

}  // namespace

const char* human_kind_name(HumanKind k) {
  switch (k) {
    case HumanKind::kFDGradient: return "fd";
    case HumanKind::kConjAware: return "conjaware";
    case HumanKind::kBestResponder: return "best";
    case HumanKind::kLive: return "live";
  }
  return "conjaware";
}

int ExperimentConfig::samples() const {
  if (samples_per_trial) return *samples_per_trial;
  return static_cast<int>(std::llround(trial_duration_s * sample_rate_hz));
}

ExperimentConfig default_config(int experiment) {
  json j;
  j["experiment"] = experiment;
  return config_from_json(j);
}

ExperimentConfig config_from_json(const json& j, const std::string& base_dir) {
  check_keys(j, {"experiment", "game", "strategy", "human", "trials_per_condition",
                 "trial_duration_s", "sample_rate_hz", "samples_per_trial", "iterations",
                 "init_region", "rest_every", "rest_seconds", "mirror", "tail_fraction",
                 "attention_check", "seed"},
             "");
  ExperimentConfig c;
  if (!j.contains("experiment")) field_error("experiment", "required");
  c.experiment = get_int(j, "experiment", "experiment");
  if (c.experiment < 1 || c.experiment > 3) field_error("experiment", "must be 1, 2 or 3");
  c.trial_duration_s = c.experiment == 1 ? 40.0 : 20.0;
  c.trials_per_condition = c.experiment == 1 ? 2 : 1;
  c.mirror = c.experiment == 1;

  if (j.contains("game")) c.game_spec = j["game"];
  try {
    c.game = game_from_json(c.game_spec, base_dir);
  } catch (const Error& e) {
    field_error("game", e.what());
  }
  if (has_cobb_douglas(c.game)) {
    c.init_h = {0.3, 0.7};
    c.init_m = {0.3, 0.7};
  }

  if (j.contains("strategy")) {
    const json& s = j["strategy"];
    check_keys(s, {"variant", "alphas", "infinite_rate_policy", "delta", "Delta", "gamma",
                   "initial_slope", "anchor", "perturbed_first"},
               "strategy");
    if (s.contains("variant")) {
      if (!s["variant"].is_string() || s["variant"].get<std::string>() != variant_for(c.experiment)) {
        field_error("strategy.variant", std::string("experiment ") +
                                            std::to_string(c.experiment) + " uses " +
                                            variant_for(c.experiment));
      }
    }
    if (s.contains("alphas")) {
      if (!s["alphas"].is_array()) field_error("strategy.alphas", "expected an array");
      c.strategy.alphas.clear();
      for (const auto& a : s["alphas"]) c.strategy.alphas.push_back(alpha_from_json(a, "strategy.alphas"));
    }
    if (s.contains("infinite_rate_policy")) {
      c.strategy.infinite_rate_policy =
          policy_from_json(s["infinite_rate_policy"], "strategy.infinite_rate_policy");
    }
    if (s.contains("delta")) c.strategy.delta = get_real(s, "delta", "strategy.delta");
    if (s.contains("Delta")) c.strategy.Delta = get_real(s, "Delta", "strategy.Delta");
    if (s.contains("gamma")) c.strategy.gamma = get_real(s, "gamma", "strategy.gamma");
    if (s.contains("initial_slope")) {
      c.strategy.initial_slope = get_real(s, "initial_slope", "strategy.initial_slope");
    }
    if (s.contains("anchor")) c.strategy.anchor = pair_from_json(s["anchor"], "strategy.anchor");
    if (s.contains("perturbed_first")) {
      c.strategy.perturbed_first = get_bool(s, "perturbed_first", "strategy.perturbed_first");
    }
  }

  if (j.contains("human")) {
    const json& h = j["human"];
    check_keys(h, {"model", "beta", "probe", "noise"}, "human");
    if (h.contains("model")) {
      if (!h["model"].is_string()) field_error("human.model", "expected a string");
      c.human.kind = human_kind_from(h["model"].get<std::string>(), "human.model");
    }
    if (h.contains("beta")) c.human.beta = get_real(h, "beta", "human.beta");
    if (h.contains("probe")) c.human.probe = get_real(h, "probe", "human.probe");
    if (h.contains("noise")) c.human.noise = get_real(h, "noise", "human.noise");
  }

  if (j.contains("trials_per_condition")) {
    c.trials_per_condition = get_int(j, "trials_per_condition", "trials_per_condition");
  }
  if (j.contains("trial_duration_s")) {
    c.trial_duration_s = get_real(j, "trial_duration_s", "trial_duration_s");
  }
  if (j.contains("sample_rate_hz")) c.sample_rate_hz = get_real(j, "sample_rate_hz", "sample_rate_hz");
  if (j.contains("samples_per_trial")) {
    c.samples_per_trial = get_int(j, "samples_per_trial", "samples_per_trial");
  }
  if (j.contains("iterations")) c.iterations = get_int(j, "iterations", "iterations");
  if (j.contains("init_region")) {
    const json& r = j["init_region"];
    check_keys(r, {"h", "m"}, "init_region");
    if (r.contains("h")) c.init_h = interval_from_json(r["h"], "init_region.h");
    if (r.contains("m")) c.init_m = interval_from_json(r["m"], "init_region.m");
  }
  if (j.contains("rest_every")) c.rest_every = get_int(j, "rest_every", "rest_every");
  if (j.contains("rest_seconds")) c.rest_seconds = get_real(j, "rest_seconds", "rest_seconds");
  if (j.contains("mirror")) c.mirror = get_bool(j, "mirror", "mirror");
  if (j.contains("tail_fraction")) c.tail_fraction = get_real(j, "tail_fraction", "tail_fraction");
  if (j.contains("attention_check")) {
    c.attention_check = get_bool(j, "attention_check", "attention_check");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      field_error("seed", "expected a non-negative integer");
    }
    if (!j["seed"].is_number_unsigned() && j["seed"].get<long long>() < 0) {
      field_error("seed", "expected a non-negative integer");
    }
    c.seed = j["seed"].get<uint64_t>();
  }
  validate(c);
  try {
    finalize(c);
  } catch (const Error& e) {
    field_error("strategy", e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  // Presets stay symbolic; anything else is written inline so the config
  // does not depend on files next to it.
  bool preset = c.game_spec.is_string() ||
                (c.game_spec.is_object() && c.game_spec.contains("preset"));
  j["game"] = preset ? c.game_spec : game_to_json(c.game);
  json s;
  s["variant"] = variant_for(c.experiment);
  json alphas = json::array();
  for (double a : c.strategy.alphas) alphas.push_back(alpha_to_json(a));
  s["alphas"] = alphas;
  if (c.strategy.infinite_rate_policy) {
    s["infinite_rate_policy"] = policy_to_json(*c.strategy.infinite_rate_policy);
  }
  s["delta"] = c.strategy.delta;
  s["Delta"] = c.strategy.Delta;
  s["gamma"] = c.strategy.gamma;
  if (c.strategy.initial_slope) s["initial_slope"] = *c.strategy.initial_slope;
  if (c.strategy.anchor) s["anchor"] = {c.strategy.anchor->h, c.strategy.anchor->m};
  s["perturbed_first"] = c.strategy.perturbed_first;
  j["strategy"] = s;
  j["human"] = {{"model", human_kind_name(c.human.kind)},
                {"beta", c.human.beta},
                {"probe", c.human.probe},
                {"noise", c.human.noise}};
  j["trials_per_condition"] = c.trials_per_condition;
  j["trial_duration_s"] = c.trial_duration_s;
  j["sample_rate_hz"] = c.sample_rate_hz;
  if (c.samples_per_trial) j["samples_per_trial"] = *c.samples_per_trial;
  j["iterations"] = c.iterations;
  j["init_region"] = {{"h", {c.init_h.lo, c.init_h.hi}}, {"m", {c.init_m.lo, c.init_m.hi}}};
  j["rest_every"] = c.rest_every;
  j["rest_seconds"] = c.rest_seconds;
  j["mirror"] = c.mirror;
  j["tail_fraction"] = c.tail_fraction;
  j["attention_check"] = c.attention_check;
  j["seed"] = c.seed;
  return j;
}

std::string condition_label(const TrialCondition& c) {
  if (c.k < 0) {
    return "alpha=" + (std::isinf(c.alpha) ? std::string("inf") : format_real(c.alpha));
  }
  std::string s = "k=" + std::to_string(c.k) + ":" + phase_name(c.phase);
  if (c.rerun) s += ":rerun";
  return s;
}

void compute_medians(TrialRecord& r, double tail_fraction) {
  if (r.h.empty()) return;
  r.med_h = tail_median(r.h, tail_fraction);
  r.med_m = tail_median(r.m, tail_fraction);
  r.med_cH = tail_median(r.c_H, tail_fraction);
  r.med_cM = tail_median(r.c_M, tail_fraction);
}

PairMedians pair_medians(const std::vector<TrialRecord>& pair) {
  if (pair.size() != 2) {
    fail(ErrorCode::kPairing, "pairing needs exactly two trials, got " + std::to_string(pair.size()));
  }
  const TrialRecord& a = pair[0];
  const TrialRecord& b = pair[1];
  if (a.condition.k < 0 || a.condition.k != b.condition.k) {
    fail(ErrorCode::kPairing, "paired trials belong to different iterations");
  }
  if (a.condition.phase == b.condition.phase) {
    fail(ErrorCode::kPairing, std::string("both paired trials are ") + phase_name(a.condition.phase));
  }
  const TrialRecord& nom = a.condition.phase == Phase::kNominal ? a : b;
  const TrialRecord& pert = a.condition.phase == Phase::kNominal ? b : a;
  PairMedians out;
  out.nominal = nom.medians();
  out.perturbed = pert.medians();
  out.nominal_cost = nom.med_cM;
  out.perturbed_cost = pert.med_cM;
  return out;
}

// ---------------------------------------------------------------------------
// Engine

ExperimentEngine::ExperimentEngine(const ExperimentConfig& cfg)
    : cfg_(cfg), T_(cfg.samples()), rng_(derive_seed(cfg.seed, 1)) {
  validate(cfg_);
  finalize(cfg_);
  const Game& game = cfg_.game;
  limit_policy_ = *cfg_.strategy.infinite_rate_policy;
  response_line_ = machine_response_line(game);

  auto draw_init = [&] {
    double h = rng_.uniform(cfg_.init_h.lo, cfg_.init_h.hi);
    double m = rng_.uniform(cfg_.init_m.lo, cfg_.init_m.hi);
    return JointAction{h, m};
  };

  if (cfg_.experiment == 1) {
    nash_m_ = nash_machine_action(game);
    std::vector<TrialSpec> specs;
    for (double a : cfg_.strategy.alphas) {
      for (int r = 0; r < cfg_.trials_per_condition; ++r) {
        TrialSpec t;
        t.condition.alpha = a;
        t.s = cfg_.mirror && r % 2 == 1 ? -1 : 1;
        specs.push_back(t);
      }
    }
    for (size_t i = specs.size(); i > 1; --i) {
      size_t j = rng_.below(i);
      std::swap(specs[i - 1], specs[j]);
    }
    for (size_t i = 0; i < specs.size(); ++i) {
      specs[i].index = static_cast<int>(i);
      specs[i].init = draw_init();
    }
    schedule_ = std::move(specs);
    strategy_ = GradientPlay::make(0.0, 0.0, nash_m_, limit_policy_);
  } else {
    Phase first = cfg_.strategy.perturbed_first ? Phase::kPerturbed : Phase::kNominal;
    Phase second = cfg_.strategy.perturbed_first ? Phase::kNominal : Phase::kPerturbed;
    for (int k = 0; k < cfg_.iterations; ++k) {
      for (Phase p : {first, second}) {
        TrialSpec t;
        t.index = static_cast<int>(schedule_.size());
        t.condition.k = k;
        t.condition.phase = p;
        t.s = cfg_.mirror && rng_.below(2) == 1 ? -1 : 1;
        t.init = draw_init();
        schedule_.push_back(t);
      }
    }
    if (cfg_.experiment == 2) {
      strategy_ = ConjVar::initial(game, cfg_.strategy.delta, cfg_.strategy.initial_slope);
      trace_.final_slope = std::get<ConjVar>(strategy_).policy.slope;
      trace_.final_intercept = std::get<ConjVar>(strategy_).policy.intercept;
    } else {
      strategy_ = PolicyGrad::make(cfg_.strategy.Delta, cfg_.strategy.gamma,
                                   *cfg_.strategy.anchor, *cfg_.strategy.initial_slope);
      AffinePolicy p = std::get<PolicyGrad>(strategy_).trial_policy(Phase::kNominal).unanchored();
      trace_.final_slope = p.slope;
      trace_.final_intercept = p.intercept;
    }
  }
}

const TrialSpec& ExperimentEngine::current() const {
  if (finished()) fail(ErrorCode::kState, "experiment has no trials left");
  return schedule_[pos_];
}

void ExperimentEngine::begin_trial() {
  if (in_trial_) fail(ErrorCode::kState, "trial already in progress");
  const TrialSpec& spec = current();
  current_ = TrialRecord{};
  current_.index = spec.index;
  current_.experiment = cfg_.experiment;
  current_.condition = spec.condition;
  current_.s = spec.s;
  current_.init = spec.init;
  if (cfg_.experiment == 1) {
    strategy_ = GradientPlay::make(spec.condition.alpha, spec.init.m, nash_m_, limit_policy_);
    const auto& gp = std::get<GradientPlay>(strategy_);
    if (gp.alpha == 0.0) {
      current_.policy_slope = 0.0;
      current_.policy_intercept = nash_m_;
    } else if (std::isinf(gp.alpha)) {
      AffinePolicy p = limit_policy_.unanchored();
      current_.policy_slope = p.slope;
      current_.policy_intercept = p.intercept;
    }
  } else {
    if (auto* cv = std::get_if<ConjVar>(&strategy_)) {
      cv->phase = spec.condition.phase;
      trial_policy_ = cv->trial_policy(spec.condition.phase);
    } else {
      auto& pg = std::get<PolicyGrad>(strategy_);
      pg.phase = spec.condition.phase;
      trial_policy_ = pg.trial_policy(spec.condition.phase);
    }
    AffinePolicy p = trial_policy_.unanchored();
    current_.policy_slope = p.slope;
    current_.policy_intercept = p.intercept;
  }
  in_trial_ = true;
}

double ExperimentEngine::step(double h) {
  if (!in_trial_) fail(ErrorCode::kState, "no trial in progress");
  if (trial_complete()) fail(ErrorCode::kState, "trial already has all samples");
  const Game& game = cfg_.game;
  if (!std::isfinite(h)) fail(ErrorCode::kDomain, "human action is not finite");
  if (game.human_bounds) h = game.human_bounds->clamp(h);
  double m;
  if (auto* gp = std::get_if<GradientPlay>(&strategy_)) {
    m = gp->m;
    gradient_play_step(game, *gp, h);
  } else {
    m = trial_policy_(h);
    if (game.machine_bounds) m = game.machine_bounds->clamp(m);
  }
  if (!std::isfinite(m)) fail(ErrorCode::kDomain, "machine action is not finite");
  current_.h.push_back(h);
  current_.m.push_back(m);
  current_.c_H.push_back(eval_cost(game, Player::kHuman, {h, m}));
  current_.c_M.push_back(eval_cost(game, Player::kMachine, {h, m}));
  return m;
}

AffinePolicy ExperimentEngine::effective_policy() const {
  if (const auto* gp = std::get_if<GradientPlay>(&strategy_)) {
    if (gp->alpha == 0.0) return AffinePolicy::constant(gp->hold);
    if (std::isinf(gp->alpha)) return limit_policy_;
    return response_line_;
  }
  return trial_policy_;
}

const GradientPlay& ExperimentEngine::gradient_play() const {
  const auto* gp = std::get_if<GradientPlay>(&strategy_);
  if (!gp) fail(ErrorCode::kState, "machine is not running gradient play");
  return *gp;
}

TrialRecord ExperimentEngine::abandon_trial() {
  if (!in_trial_) fail(ErrorCode::kState, "no trial in progress");
  TrialRecord r = std::move(current_);
  r.incomplete = true;
  compute_medians(r, cfg_.tail_fraction);
  records_.push_back(r);
  in_trial_ = false;
  pos_ = schedule_.size();
  return r;
}

TrialRecord ExperimentEngine::end_trial() {
  if (!in_trial_) fail(ErrorCode::kState, "no trial in progress");
  if (!trial_complete()) {
    fail(ErrorCode::kState, "trial has " + std::to_string(samples_taken()) + " of " +
                                std::to_string(samples_per_trial()) + " samples");
  }
  TrialRecord r = std::move(current_);
  compute_medians(r, cfg_.tail_fraction);
  records_.push_back(r);
  in_trial_ = false;
  ++pos_;
  try {
    update_after(r);
  } catch (const Error& e) {
    pos_ = schedule_.size();
    fail(e.code(), "trial " + std::to_string(r.index) + " (" + condition_label(r.condition) +
                       "): " + e.what());
  }
  return r;
}

void ExperimentEngine::update_after(const TrialRecord& r) {
  if (cfg_.experiment == 1) return;
  pair_.push_back(r);
  if (pair_.size() < 2) return;
  PairMedians pm = pair_medians(pair_);
  std::vector<TrialRecord> done = std::move(pair_);
  pair_.clear();

  IterationTrace it;
  it.k = r.condition.k;
  it.nominal = pm.nominal;
  it.perturbed = pm.perturbed;
  it.nominal_cost = pm.nominal_cost;
  it.perturbed_cost = pm.perturbed_cost;
  const TrialRecord& nom = done[0].condition.phase == Phase::kNominal ? done[0] : done[1];
  it.L_M = nom.policy_slope;
  it.ell_M = nom.policy_intercept;

  if (auto* cv = std::get_if<ConjVar>(&strategy_)) {
    double L_hat;
    try {
      L_hat = conjvar_estimate(*cv, pm.nominal, pm.perturbed);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConjectureUndefined && !reruns_.count(it.k)) {
        reruns_.insert(it.k);
        std::vector<TrialSpec> again;
        for (const TrialRecord& d : done) {
          TrialSpec t;
          t.condition = d.condition;
          t.condition.rerun = true;
          t.s = d.s;
          t.init = {rng_.uniform(cfg_.init_h.lo, cfg_.init_h.hi),
                    rng_.uniform(cfg_.init_m.lo, cfg_.init_m.hi)};
          again.push_back(t);
        }
        schedule_.insert(schedule_.begin() + static_cast<long>(pos_), again.begin(), again.end());
        for (size_t i = pos_; i < schedule_.size(); ++i) schedule_[i].index = static_cast<int>(i);
        return;
      }
      throw;
    }
    it.L_hat_H = L_hat;
    AffinePolicy next = conjvar_update(cfg_.game, *cv, L_hat);
    trace_.final_slope = next.slope;
    trace_.final_intercept = next.intercept;
  } else {
    auto& pg = std::get<PolicyGrad>(strategy_);
    it.grad = policygrad_estimate(pg, pm.nominal_cost, pm.perturbed_cost);
    policygrad_update(pg, it.grad);
    AffinePolicy next = pg.trial_policy(Phase::kNominal).unanchored();
    trace_.final_slope = next.slope;
    trace_.final_intercept = next.intercept;
  }
  trace_.iterations.push_back(it);
}

// ---------------------------------------------------------------------------
// Simulated runs

namespace {

void simulate_trial(ExperimentEngine& e, const HumanConfig& hc, Rng& noise) {
  // Simulated humans reach only what the cursor reaches.
  Game game = e.game();
  if (!game.human_bounds) game.human_bounds = kCursorRange;
  const TrialSpec spec = e.current();
  const int n = e.samples_per_trial();
  auto emit = [&](double h) {
    if (hc.noise > 0.0) h += hc.noise * (2.0 * noise.uniform() - 1.0);
    return game.human_bounds ? game.human_bounds->clamp(h) : h;
  };
  double h0 = game.human_bounds ? game.human_bounds->clamp(spec.init.h) : spec.init.h;

  switch (hc.kind) {
    case HumanKind::kBestResponder: {
      double h = best_response_oracle(game, e.effective_policy());
      for (int t = 0; t < n; ++t) e.step(emit(h));
      break;
    }
    case HumanKind::kConjAware: {
      ConjAware s{hc.beta, h0};
      double L = e.effective_policy().slope;
      for (int t = 0; t < n; ++t) {
        double h = emit(s.h);
        double m = e.step(h);
        conjaware_human_step(game, s, L, {s.h, m});
      }
      break;
    }
    case HumanKind::kFDGradient: {
      FDGradient s{hc.beta, hc.probe, h0, fd_block_length(spec.condition.alpha, hc.beta)};
      int t = 0;
      while (t < n) {
        int block = std::min(s.K, n - t);
        double hp = s.h + s.probe;
        double c_probe;
        if (const auto* gp0 = std::get_if<GradientPlay>(&e.strategy())) {
          // Probe pass against a copy of the machine state.
          GradientPlay gp = *gp0;
          double m_probe = gp.m;
          for (int j = 0; j < block; ++j) {
            m_probe = gp.m;
            gradient_play_step(game, gp, hp);
          }
          c_probe = eval_cost(game, Player::kHuman, {hp, m_probe});
        } else {
          double m_probe = e.effective_policy()(hp);
          if (game.machine_bounds) m_probe = game.machine_bounds->clamp(m_probe);
          c_probe = eval_cost(game, Player::kHuman, {hp, m_probe});
        }
        double m_last = 0.0;
        for (int j = 0; j < block; ++j) m_last = e.step(emit(s.h));
        double c_nom = eval_cost(game, Player::kHuman, {s.h, m_last});
        t += block;
        fd_human_step(game, s, c_probe, c_nom);
      }
      break;
    }
    case HumanKind::kLive:
      fail(ErrorCode::kInvalidArgument, "config.human.model: live humans cannot be simulated");
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentEngine e(cfg);
  Rng noise(derive_seed(cfg.seed, 2));
  while (!e.finished()) {
    e.begin_trial();
    simulate_trial(e, cfg.human, noise);
    e.end_trial();
  }
  ExperimentResult out;
  out.config = e.config();
  out.records = e.records();
  out.trace = e.trace();
  return out;
}

std::vector<ExperimentResult> run_population(const ExperimentConfig& cfg, int subjects) {
  if (subjects < 1) fail(ErrorCode::kInvalidArgument, "subject count must be at least 1");
  std::vector<ExperimentResult> out;
  for (int i = 0; i < subjects; ++i) {
    ExperimentConfig c = cfg;
    c.seed = subjects == 1 ? cfg.seed : derive_seed(cfg.seed, 100 + static_cast<uint64_t>(i));
    ExperimentResult r = run_experiment(c);
    r.subject = i;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

json trial_to_json(const TrialRecord& r, int subject) {
  json j;
  j["type"] = "trial";
  j["subject"] = subject;
  j["experiment"] = r.experiment;
  j["trial"] = r.index;
  j["condition"] = condition_label(r.condition);
  j["alpha"] = r.condition.k < 0 ? alpha_to_json(r.condition.alpha) : json(nullptr);
  j["k"] = r.condition.k < 0 ? json(nullptr) : json(r.condition.k);
  j["phase"] = r.condition.k < 0 ? json(nullptr) : json(phase_name(r.condition.phase));
  j["rerun"] = r.condition.rerun;
  j["s"] = r.s;
  j["init"] = {r.init.h, r.init.m};
  j["policy"] = {{"slope", real_or_null(r.policy_slope)},
                 {"intercept", real_or_null(r.policy_intercept)}};
  j["median"] = {{"h", real_or_null(r.med_h)},
                 {"m", real_or_null(r.med_m)},
                 {"c_H", real_or_null(r.med_cH)},
                 {"c_M", real_or_null(r.med_cM)}};
  j["incomplete"] = r.incomplete;
  j["series"] = {{"h", r.h}, {"m", r.m}, {"c_H", r.c_H}, {"c_M", r.c_M}};
  return j;
}

TrialRecord trial_from_json(const json& j) {
  try {
    TrialRecord r;
    r.experiment = j.at("experiment").get<int>();
    r.index = j.at("trial").get<int>();
    if (!j.at("k").is_null()) {
      r.condition.k = j["k"].get<int>();
      r.condition.phase =
          j.at("phase").get<std::string>() == "perturbed" ? Phase::kPerturbed : Phase::kNominal;
    } else {
      r.condition.alpha = real_from(j.at("alpha"));
    }
    r.condition.rerun = j.at("rerun").get<bool>();
    r.s = j.at("s").get<int>();
    r.init = {j.at("init")[0].get<double>(), j.at("init")[1].get<double>()};
    r.policy_slope = real_from(j.at("policy").at("slope"));
    r.policy_intercept = real_from(j.at("policy").at("intercept"));
    const json& med = j.at("median");
    r.med_h = real_from(med.at("h"));
    r.med_m = real_from(med.at("m"));
    r.med_cH = real_from(med.at("c_H"));
    r.med_cM = real_from(med.at("c_M"));
    r.incomplete = j.at("incomplete").get<bool>();
    const json& s = j.at("series");
    r.h = s.at("h").get<std::vector<double>>();
    r.m = s.at("m").get<std::vector<double>>();
    r.c_H = s.at("c_H").get<std::vector<double>>();
    r.c_M = s.at("c_M").get<std::vector<double>>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed trial record: ") + e.what());
  }
}

json trace_to_json(const StrategyTrace& t) {
  json its = json::array();
  for (const IterationTrace& it : t.iterations) {
    its.push_back({{"k", it.k},
                   {"L_M", real_or_null(it.L_M)},
                   {"ell_M", real_or_null(it.ell_M)},
                   {"L_hat_H", real_or_null(it.L_hat_H)},
                   {"grad", real_or_null(it.grad)},
                   {"nominal", {it.nominal.h, it.nominal.m}},
                   {"perturbed", {it.perturbed.h, it.perturbed.m}},
                   {"nominal_cost", real_or_null(it.nominal_cost)},
                   {"perturbed_cost", real_or_null(it.perturbed_cost)}});
  }
  return {{"iterations", its},
          {"final_slope", real_or_null(t.final_slope)},
          {"final_intercept", real_or_null(t.final_intercept)}};
}

StrategyTrace trace_from_json(const json& j) {
  try {
    StrategyTrace t;
    for (const json& it : j.at("iterations")) {
      IterationTrace x;
      x.k = it.at("k").get<int>();
      x.L_M = real_from(it.at("L_M"));
      x.ell_M = real_from(it.at("ell_M"));
      x.L_hat_H = real_from(it.at("L_hat_H"));
      x.grad = real_from(it.at("grad"));
      x.nominal = {real_from(it.at("nominal")[0]), real_from(it.at("nominal")[1])};
      x.perturbed = {real_from(it.at("perturbed")[0]), real_from(it.at("perturbed")[1])};
      x.nominal_cost = real_from(it.at("nominal_cost"));
      x.perturbed_cost = real_from(it.at("perturbed_cost"));
      t.iterations.push_back(x);
    }
    t.final_slope = real_from(j.at("final_slope"));
    t.final_intercept = real_from(j.at("final_intercept"));
    return t;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed strategy trace: ") + e.what());
  }
}

std::string records_to_ndjson(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  for (const ExperimentResult& r : results) {
    json run = {{"type", "run"},
                {"subject", r.subject},
                {"experiment", r.config.experiment},
                {"config", config_to_json(r.config)}};
    out << run.dump() << '\n';
    for (const TrialRecord& t : r.records) out << trial_to_json(t, r.subject).dump() << '\n';
    json tr = trace_to_json(r.trace);
    tr["type"] = "trace";
    tr["subject"] = r.subject;
    out << tr.dump() << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "subject,trial,condition,s,h,m,c_H,c_M\n";
  for (const ExperimentResult& r : results) {
    for (const TrialRecord& t : r.records) {
      out << r.subject << ',' << t.index << ',' << condition_label(t.condition) << ',' << t.s
          << ',' << format_real(t.med_h) << ',' << format_real(t.med_m) << ','
          << format_real(t.med_cH) << ',' << format_real(t.med_cM) << '\n';
    }
  }
  return out.str();
}

std::vector<ExperimentResult> import_records(const std::string& ndjson) {
  std::vector<ExperimentResult> out;
  std::istringstream in(ndjson);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::kParse, "records line " + std::to_string(lineno) + ": " + e.what());
    }
    std::string type = j.value("type", "");
    if (type == "run") {
      ExperimentResult r;
      r.subject = j.at("subject").get<int>();
      r.config = config_from_json(j.at("config"));
      out.push_back(std::move(r));
    } else if (type == "trial" || type == "trace") {
      if (out.empty() || out.back().subject != j.at("subject").get<int>()) {
        fail(ErrorCode::kParse, "records line " + std::to_string(lineno) +
                                    ": record before its run header");
      }
      if (type == "trial") {
        out.back().records.push_back(trial_from_json(j));
      } else {
        out.back().trace = trace_from_json(j);
      }
    } else {
      fail(ErrorCode::kParse, "records line " + std::to_string(lineno) + ": unknown type '" +
                                  type + "'");
    }
  }
  return out;
}

std::vector<std::string> export_records(const std::vector<ExperimentResult>& results,
                                        const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, dir + ": " + ec.message());
  std::map<int, std::vector<ExperimentResult>> by_exp;
  for (const ExperimentResult& r : results) by_exp[r.config.experiment].push_back(r);
  std::vector<std::string> paths;
  for (const auto& [id, rs] : by_exp) {
    std::string base = (std::filesystem::path(dir) / ("experiment" + std::to_string(id))).string();
    write_file(base + "_records.ndjson", records_to_ndjson(rs));
    write_file(base + "_summary.csv", summary_csv(rs));
    paths.push_back(base + "_records.ndjson");
    paths.push_back(base + "_summary.csv");
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Analysis

namespace {

struct CellValues {
  std::vector<double> values;
};

double median_or_nan(const std::vector<double>& v) {
  std::vector<double> finite;
  for (double x : v) {
    if (std::isfinite(x)) finite.push_back(x);
  }
  return finite.empty() ? kNaN : median(finite);
}

void add_rows(std::vector<AnalysisRow>& rows, int experiment, const std::string& stage,
              const std::string& quantity, const std::vector<double>& per_subject,
              const std::vector<std::pair<std::string, double>>& hyps, Sidedness side) {
  std::vector<double> finite;
  for (double x : per_subject) {
    if (std::isfinite(x)) finite.push_back(x);
  }
  for (const auto& [name, value] : hyps) {
    AnalysisRow row;
    row.experiment = experiment;
    row.stage = stage;
    row.quantity = quantity;
    row.equilibrium = name;
    row.hypothesized = value;
    if (!std::isfinite(value)) {
      row.note = "equilibrium value unavailable";
    } else if (finite.size() < 2) {
      row.note = "fewer than two subjects";
    } else {
      row.stat = t_test_one_sample(finite, value, side);
      row.testable = true;
    }
    rows.push_back(row);
  }
}

double cost_at(const Game& game, Player p, const EquilibriumEntry& e) {
  if (!e.valid) return kNaN;
  try {
    return eval_cost(game, p, e.action);
  } catch (const Error&) {
    return kNaN;
  }
}

}  // namespace

std::vector<AnalysisRow> analyze(const std::vector<ExperimentResult>& subjects,
                                 const EquilibriumReport& report) {
  std::vector<AnalysisRow> rows;
  if (subjects.empty()) return rows;
  std::map<int, std::vector<const ExperimentResult*>> by_exp;
  for (const ExperimentResult& r : subjects) by_exp[r.config.experiment].push_back(&r);

  auto val = [](const EquilibriumEntry& e, double x) { return e.valid ? x : kNaN; };
  const EquilibriumEntry& ne = report.nash;
  const EquilibriumEntry& se = report.stackelberg;
  const EquilibriumEntry& cc = report.ccve;
  const EquilibriumEntry& rse = report.rse;

  for (const auto& [exp, rs] : by_exp) {
    const Game& game = rs.front()->config.game;
    if (exp == 1) {
      const auto& alphas = rs.front()->config.strategy.alphas;
      double lo = *std::min_element(alphas.begin(), alphas.end());
      double hi = *std::max_element(alphas.begin(), alphas.end());
      for (const auto& [stage, a] : {std::pair<std::string, double>{"initial", lo}, {"final", hi}}) {
        std::vector<double> hs, ms;
        for (const ExperimentResult* r : rs) {
          std::vector<double> th, tm;
          for (const TrialRecord& t : r->records) {
            if (!t.incomplete && t.condition.k < 0 && t.condition.alpha == a) {
              th.push_back(t.med_h);
              tm.push_back(t.med_m);
            }
          }
          hs.push_back(median_or_nan(th));
          ms.push_back(median_or_nan(tm));
        }
        add_rows(rows, 1, stage, "human action", hs,
                 {{"NE", val(ne, ne.action.h)}, {"SE", val(se, se.action.h)}}, Sidedness::kTwoSided);
        add_rows(rows, 1, stage, "machine action", ms,
                 {{"NE", val(ne, ne.action.m)}, {"SE", val(se, se.action.m)}}, Sidedness::kTwoSided);
      }
      continue;
    }

    int kmax = rs.front()->config.iterations - 1;
    const EquilibriumEntry& limit = exp == 2 ? cc : rse;
    const std::string limit_name = exp == 2 ? "CCVE" : "RSE";
    for (const auto& [stage, k] : {std::pair<std::string, int>{"initial", 0}, {"final", kmax}}) {
      std::vector<double> hs, ms, lh, lm, cm;
      for (const ExperimentResult* r : rs) {
        const TrialRecord* nom = nullptr;
        const TrialRecord* pert = nullptr;
        for (const TrialRecord& t : r->records) {
          if (t.incomplete || t.condition.k != k) continue;
          (t.condition.phase == Phase::kNominal ? nom : pert) = &t;
        }
        hs.push_back(nom ? nom->med_h : kNaN);
        ms.push_back(nom ? nom->med_m : kNaN);
        lm.push_back(nom ? nom->policy_slope : kNaN);
        cm.push_back(nom ? nom->med_cM : kNaN);
        double L_H = kNaN;
        if (exp == 2 && nom && pert) {
          double dm = pert->med_m - nom->med_m;
          if (std::fabs(dm) > kConjectureDenominatorTol) L_H = (pert->med_h - nom->med_h) / dm;
        } else if (exp == 3 && nom && game.is_quadratic()) {
          try {
            L_H = human_slope_map(game.quadratic(), nom->policy_slope);
          } catch (const Error&) {
          }
        }
        lh.push_back(L_H);
      }
      add_rows(rows, exp, stage, "human action", hs,
               {{"SE", val(se, se.action.h)}, {limit_name, val(limit, limit.action.h)}},
               Sidedness::kTwoSided);
      add_rows(rows, exp, stage, "machine action", ms,
               {{"SE", val(se, se.action.m)}, {limit_name, val(limit, limit.action.m)}},
               Sidedness::kTwoSided);
      add_rows(rows, exp, stage, "human policy", lh,
               {{"SE", val(se, se.L_H)}, {limit_name, val(limit, limit.L_H)}}, Sidedness::kTwoSided);
      add_rows(rows, exp, stage, "machine policy", lm,
               {{"SE", val(se, se.L_M)}, {limit_name, val(limit, limit.L_M)}}, Sidedness::kTwoSided);
      if (exp == 3) {
        add_rows(rows, exp, stage, "machine cost", cm,
                 {{"SE", cost_at(game, Player::kMachine, se)},
                  {limit_name, cost_at(game, Player::kMachine, limit)}},
                 Sidedness::kGreater);
      }
    }
  }
  return rows;
}

std::string analysis_to_csv(const std::vector<AnalysisRow>& rows) {
  std::ostringstream out;
  out << "experiment,stage,quantity,equilibrium,hypothesized,n,mean,sd,t,df,p,d,sidedness,"
         "testable,note\n";
  for (const AnalysisRow& r : rows) {
    out << r.experiment << ',' << r.stage << ',' << r.quantity << ',' << r.equilibrium << ','
        << format_real(r.hypothesized) << ',';
    if (r.testable) {
      out << r.stat.n << ',' << format_real(r.stat.mean) << ',' << format_real(r.stat.sd) << ','
          << format_real(r.stat.t) << ',' << format_real(r.stat.df) << ','
          << format_real(r.stat.p) << ',' << format_real(r.stat.d) << ','
          << sidedness_name(r.stat.sidedness) << ",true,";
    } else {
      out << ",,,,,,,,false,";
    }
    out << r.note << '\n';
  }
  return out.str();
}

}  // namespace coadapt
