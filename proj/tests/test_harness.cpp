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

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "equilibria.h"
#include "error.h"
#include "game_io.h"
#include "harness.h"
#include "support.h"

using namespace coadapt;
using nlohmann::json;

namespace {

std::string error_text(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig quick(int exp, const char* human, int T = 400) {
  return config_from_json({{"experiment", exp},
                           {"human", {{"model", human}}},
                           {"samples_per_trial", T},
                           {"seed", 3}});
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults depend on the experiment") {
  ExperimentConfig c1 = default_config(1);
  CHECK(c1.trial_duration_s == 40.0);
  CHECK(c1.trials_per_condition == 2);
  CHECK(c1.mirror);
  CHECK(c1.samples() == 2400);
  CHECK(c1.strategy.alphas.size() == 7);
  ExperimentConfig c2 = default_config(2);
  CHECK(c2.trial_duration_s == 20.0);
  CHECK(c2.samples() == 1200);
  CHECK(!c2.mirror);
  CHECK(c2.iterations == 10);
  CHECK(c2.strategy.delta == 0.1);
  ExperimentConfig c3 = default_config(3);
  CHECK(c3.strategy.Delta == 0.1);
  CHECK(c3.strategy.gamma == 2.0);
  ExperimentConfig cd = config_from_json({{"experiment", 1}, {"game", "cobb-douglas"}});
  CHECK(cd.init_h.lo == 0.3);
  CHECK(cd.init_m.hi == 0.7);
}

TEST_CASE("config errors name the field") {
  CHECK(error_text({{"experiment", 4}}).find("config.experiment") != std::string::npos);
  CHECK(error_text({{"experiment", 1}, {"bogus", 1}}).find("config.bogus") != std::string::npos);
  CHECK(error_text({{"experiment", 1}, {"human", {{"beta", -1}}}}).find("config.human.beta") !=
        std::string::npos);
  CHECK(error_text({{"experiment", 1}, {"strategy", {{"alphas", {0.1, "fast"}}}}})
            .find("config.strategy.alphas") != std::string::npos);
  CHECK(error_text({{"experiment", 2}, {"trials_per_condition", 2}})
            .find("config.trials_per_condition") != std::string::npos);
  CHECK(error_text({{"experiment", 1}, {"seed", -4}}).find("config.seed") != std::string::npos);
  CHECK(error_text(json::object()).find("config.experiment") != std::string::npos);
}

TEST_CASE("config json round trip") {
  json j = {{"experiment", 1},
            {"strategy", {{"alphas", {0, 0.1, "inf"}}}},
            {"human", {{"model", "fd"}, {"noise", 0.01}}},
            {"seed", 18446744073709551615ULL}};
  ExperimentConfig c = config_from_json(j);
  CHECK(std::isinf(c.strategy.alphas.back()));
  ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.seed == 18446744073709551615ULL);
  ExperimentConfig shifted = config_from_json(
      {{"experiment", 3}, {"game", {{"preset", "canonical"}, {"machine_optimum", {0.1, -0.1}}}}});
  REQUIRE(shifted.strategy.anchor.has_value());
  CHECK(shifted.strategy.anchor->m == doctest::Approx(-0.1).epsilon(1e-12));
  ExperimentEngine e(shifted);
  CHECK(e.config().strategy.anchor->h == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("experiment 1 schedule") {
  ExperimentConfig c = default_config(1);
  c.seed = 99;
  ExperimentEngine e(c);
  const auto& s = e.schedule();
  REQUIRE(s.size() == 14);
  std::map<double, std::multiset<int>> signs;
  for (const TrialSpec& t : s) {
    signs[t.condition.alpha].insert(t.s);
    CHECK(t.init.h >= -0.4);
    CHECK(t.init.h <= 0.4);
    CHECK(t.init.m >= -0.4);
    CHECK(t.init.m <= 0.4);
  }
  CHECK(signs.size() == 7);
  for (const auto& [a, ss] : signs) CHECK(ss == std::multiset<int>{-1, 1});
  // The order is a seeded permutation: same seed same order, other seeds
  // usually differ.
  ExperimentEngine again(c);
  bool same = true;
  for (size_t i = 0; i < s.size(); ++i) {
    same = same && again.schedule()[i].condition.alpha == s[i].condition.alpha &&
           again.schedule()[i].s == s[i].s && again.schedule()[i].init.h == s[i].init.h;
  }
  CHECK(same);
  int differing = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    c.seed = seed;
    ExperimentEngine o(c);
    for (size_t i = 0; i < s.size(); ++i) {
      if (o.schedule()[i].condition.alpha != s[i].condition.alpha) {
        ++differing;
        break;
      }
    }
  }
  CHECK(differing >= 8);
}

TEST_CASE("paired schedules") {
  ExperimentEngine e(default_config(2));
  REQUIRE(e.schedule().size() == 20);
  for (size_t i = 0; i < 20; ++i) {
    CHECK(e.schedule()[i].condition.k == static_cast<int>(i / 2));
    CHECK(e.schedule()[i].condition.phase == (i % 2 ? Phase::kPerturbed : Phase::kNominal));
    CHECK(e.schedule()[i].s == 1);
  }
  ExperimentConfig pf = default_config(3);
  pf.strategy.perturbed_first = true;
  ExperimentEngine f(pf);
  CHECK(f.schedule()[0].condition.phase == Phase::kPerturbed);
}

TEST_CASE("trial series have T + 1 samples and mirrored humans") {
  ExperimentConfig c = quick(1, "best", 120);
  ExperimentResult r = run_experiment(c);
  REQUIRE(r.records.size() == 14);
  for (const TrialRecord& t : r.records) {
    CHECK(t.h.size() == 121);
    CHECK(t.m.size() == 121);
    CHECK(t.c_H.size() == 121);
    CHECK(t.c_M.size() == 121);
    CHECK(t.c_H[5] == doctest::Approx(oracle::c_H(t.h[5], t.m[5])).epsilon(1e-14));
  }
  // Full-length experiment 1 at 40 s and 60 Hz.
  CHECK(ExperimentEngine(default_config(1)).samples_per_trial() == 2401);
}

TEST_CASE("experiment 1 with a best responder at the slowest rate sits at the NE") {
  ExperimentResult r = run_experiment(quick(1, "best", 600));
  for (const TrialRecord& t : r.records) {
    if (t.condition.alpha == 0.0) {
      CHECK(std::fabs(t.med_h + 0.2) < 1e-9);
      CHECK(std::fabs(t.med_m + 0.2) < 1e-9);
    }
  }
}

TEST_CASE("pair medians") {
  TrialRecord a, b;
  a.condition.k = b.condition.k = 2;
  a.condition.phase = Phase::kNominal;
  b.condition.phase = Phase::kPerturbed;
  a.h = {0.1, 0.1, 0.1, 5.0, 0.1};
  a.m = {0.2, 0.2, 0.2, 0.2, 0.2};
  a.c_H = a.c_M = {1, 1, 1, 1, 1};
  b.h = b.m = {0.3, 0.3, 0.3};
  b.c_H = b.c_M = {2, 2, 2};
  compute_medians(a, 1.0);
  compute_medians(b, 1.0);
  PairMedians p = pair_medians({b, a});
  CHECK(p.nominal.h == 0.1);
  CHECK(p.nominal.m == 0.2);
  CHECK(p.perturbed.h == 0.3);
  CHECK(p.nominal_cost == 1);
  CHECK(p.perturbed_cost == 2);
  CHECK_THROWS_AS(pair_medians({a, a}), Error);
  TrialRecord c = b;
  c.condition.k = 3;
  CHECK_THROWS_AS(pair_medians({a, c}), Error);
  CHECK_THROWS_AS(pair_medians({a}), Error);
}

TEST_CASE("experiment 2 best-responder pair yields the closed-form conjecture") {
  ExperimentResult r = run_experiment(quick(2, "best"));
  REQUIRE(!r.trace.iterations.empty());
  CHECK(r.trace.iterations[0].L_M == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.trace.iterations[0].L_hat_H == doctest::Approx(-0.2).epsilon(1e-9));
  CvIterationTrace k = k_level_iteration(canonical_game(), 1.0, 10);
  for (size_t i = 0; i < r.trace.iterations.size(); ++i) {
    CHECK(r.trace.iterations[i].L_M == doctest::Approx(k.steps[i].L_M).epsilon(1e-9));
  }
}

TEST_CASE("experiment 3 with a conjecture-aware human lowers the machine cost") {
  ExperimentConfig c = quick(3, "conjaware", 10000);
  ExperimentResult r = run_experiment(c);
  const TrialRecord& last = r.records[r.records.size() - 2];
  CHECK(last.condition.phase == Phase::kNominal);
  CHECK(last.med_cM < 1e-3);
  CHECK(r.records[0].med_cM > last.med_cM);
}

TEST_CASE("runs are deterministic and exports are byte stable") {
  for (const char* human : {"fd", "conjaware", "best"}) {
    for (int exp : {1, 2, 3}) {
      ExperimentConfig c = quick(exp, human, 200);
      c.human.noise = 0.01;
      std::string a = records_to_ndjson(run_population(c, 2));
      std::string b = records_to_ndjson(run_population(c, 2));
      CHECK(a == b);
      c.seed += 1;
      CHECK(records_to_ndjson(run_population(c, 2)) != a);
    }
  }
}

TEST_CASE("export and import round trip") {
  auto results = run_population(quick(1, "fd", 150), 2);
  auto dir = std::filesystem::temp_directory_path() / "coadapt_harness_export";
  std::filesystem::remove_all(dir);
  auto paths = export_records(results, dir.string());
  REQUIRE(paths.size() == 2);
  std::string csv = read_file((dir / "experiment1_summary.csv").string());
  CHECK(csv.rfind("subject,trial,condition,s,h,m,c_H,c_M\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 2 * 14);
  auto back = import_records(read_file((dir / "experiment1_records.ndjson").string()));
  REQUIRE(back.size() == 2);
  for (size_t i = 0; i < back.size(); ++i) {
    REQUIRE(back[i].records.size() == results[i].records.size());
    for (size_t j = 0; j < back[i].records.size(); ++j) {
      CHECK(back[i].records[j].med_h == results[i].records[j].med_h);
      CHECK(back[i].records[j].med_cM == results[i].records[j].med_cM);
      CHECK(back[i].records[j].h == results[i].records[j].h);
    }
  }
  CHECK(records_to_ndjson(back) == records_to_ndjson(results));
  std::filesystem::remove_all(dir);

  CHECK(summary_csv({}) == "subject,trial,condition,s,h,m,c_H,c_M\n");
  CHECK_THROWS_AS(import_records("{not json}\n"), Error);
}

TEST_CASE("analysis of a noiseless population at the true equilibria") {
  EquilibriumReport report = solve_report(Game::from(canonical_game()));
  auto pop = run_population(quick(1, "best", 300), 3);
  auto rows = analyze(pop, report);
  bool saw = false;
  for (const AnalysisRow& r : rows) {
    if (r.stage == "initial" && r.equilibrium == "NE") {
      saw = true;
      CHECK(r.testable);
      CHECK(r.stat.t == 0.0);
      CHECK(r.stat.p == 1.0);
    }
  }
  CHECK(saw);
  std::string csv = analysis_to_csv(rows);
  CHECK(csv.rfind("experiment,stage,quantity,equilibrium,hypothesized,n,mean,sd,t,df,p,d,sidedness,testable,note\n", 0) == 0);
}

TEST_CASE("analysis flags zero spread off the hypothesis as infinite t") {
  EquilibriumReport report = solve_report(Game::from(canonical_game()));
  auto pop = run_population(quick(1, "best", 300), 3);
  for (const AnalysisRow& r : analyze(pop, report)) {
    if (r.stage == "initial" && r.equilibrium == "SE" && r.quantity == "human action") {
      CHECK(std::isinf(r.stat.t));
      CHECK(r.stat.t < 0);
    }
  }
}

TEST_CASE("analysis with one subject is not testable") {
  EquilibriumReport report = solve_report(Game::from(canonical_game()));
  auto rows = analyze(run_population(quick(2, "best", 200), 1), report);
  REQUIRE(!rows.empty());
  for (const AnalysisRow& r : rows) CHECK(!r.testable);
}

TEST_CASE("strategy errors carry trial context") {
  // With beta = 1e-9 the human barely moves, so the perturbation shows up
  // only in m; use a flat human so the conjecture denominator still works
  // but force a singular update with a hand-built machine cost.
  json j = {{"experiment", 2},
            {"human", {{"model", "best"}}},
            {"samples_per_trial", 50},
            {"strategy", {{"delta", 1e-9}}}};
  ExperimentConfig c = config_from_json(j);
  try {
    run_experiment(c);
    FAIL("expected the tiny perturbation to leave the conjecture undefined");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConjectureUndefined);
    CHECK(std::string(e.what()).find("trial ") != std::string::npos);
  }
}

}  // TEST_SUITE
