// Copyright 2026 The soundtrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "soundtrig/harness.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "soundtrig/controllers.hpp"
#include "soundtrig/errors.hpp"
#include "soundtrig/observe.hpp"

namespace soundtrig {

using nlohmann::json;

std::string_view to_string(ControllerSet c) { return c == ControllerSet::Oracle ? "oracle" : "trained"; }

ControllerSet controller_set_from_string(std::string_view s) {
  if (s == "oracle") return ControllerSet::Oracle;
  if (s == "trained") return ControllerSet::Trained;
  throw FormatError("unknown controller set: " + std::string(s));
}

namespace {

json outcome_to_json(const SkillOutcome& o) {
  return json{{"skill", to_string(o.skill)},
              {"success", o.success},
              {"steps", o.steps},
              {"failure", o.failure ? json(to_string(*o.failure)) : json(nullptr)}};
}

SkillOutcome outcome_from_json(const json& j) {
  SkillOutcome o;
  o.skill = skill_from_string(j.at("skill").get<std::string>());
  o.success = j.at("success").get<bool>();
  o.steps = j.at("steps").get<int>();
  if (!j.at("failure").is_null()) o.failure = failure_from_string(j.at("failure").get<std::string>());
  return o;
}

std::vector<SkillChain> stage_chains(const Plan& p) {
  if (const auto* c = std::get_if<SkillChain>(&p)) return {*c};
  const auto& b = std::get<BiSonicChain>(p);
  return {b.first_sound, b.second_sound};
}

}  // namespace

json EpisodeRecord::to_json() const {
  json stages_j = json::array();
  for (const auto& s : stages) {
    json row = json::array();
    for (const auto& o : s) row.push_back(outcome_to_json(o));
    stages_j.push_back(row);
  }
  return json{{"episode_id", episode_id},
              {"task", soundtrig::to_string(task)},
              {"skipped", skipped},
              {"skip_reason", skip_reason},
              {"plan", plan ? plan_to_json(*plan) : json(nullptr)},
              {"plan_error", plan_error ? json(*plan_error) : json(nullptr)},
              {"planner_fallback", planner_fallback},
              {"planning_correct", planning_correct},
              {"stages", stages_j},
              {"overall", overall}};
}

EpisodeRecord EpisodeRecord::from_json(const json& j) {
  EpisodeRecord r;
  r.episode_id = j.at("episode_id").get<std::string>();
  r.task = task_from_string(j.at("task").get<std::string>());
  r.skipped = j.at("skipped").get<bool>();
  r.skip_reason = j.at("skip_reason").get<std::string>();
  if (!j.at("plan").is_null()) r.plan = validate_chain(j.at("plan"));
  if (!j.at("plan_error").is_null()) r.plan_error = j.at("plan_error").get<std::string>();
  r.planner_fallback = j.at("planner_fallback").get<bool>();
  r.planning_correct = j.at("planning_correct").get<std::vector<bool>>();
  for (const auto& s : j.at("stages")) {
    std::vector<SkillOutcome> row;
    for (const auto& o : s) row.push_back(outcome_from_json(o));
    r.stages.push_back(std::move(row));
  }
  r.overall = j.at("overall").get<bool>();
  return r;
}

EpisodeRecord run_episode(const Episode& ep, const EpisodeContext& ctx, TraceLog* trace) {
  if (!ctx.scene || !ctx.bank) throw FormatError("episode context needs a scene and a sound bank");
  EpisodeRecord rec;
  rec.episode_id = ep.episode_id;
  rec.task = ep.task;
  rec.planning_correct.assign(rec.stage_count(), false);

  World world = make_episode_world(ep, *ctx.scene);
  if (trace) trace->episode_id = ep.episode_id;

  PlannerVerdict verdict;
  try {
    switch (ctx.planner.kind) {
      case Backend::Oracle:
        verdict = plan_oracle(ep);
        break;
      case Backend::RuleBased:
        if (!ctx.planner.classifier) throw Unfitted("rule-based planner needs a classifier");
        verdict = plan_rule_based(planner_observation(world, ep, *ctx.bank), *ctx.planner.classifier);
        break;
      case Backend::Remote:
        verdict = plan_remote(planner_observation(world, ep, *ctx.bank), ctx.planner.remote, ctx.planner.bucket,
                              ctx.planner.transcripts, ep.episode_id);
        break;
    }
  } catch (const Transport& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
    return rec;
  } catch (const PlanInvalid& e) {
    rec.plan_error = e.what();
  } catch (const PlanParse& e) {
    rec.plan_error = e.what();
  }
  if (rec.plan_error) {
    if (trace) trace->mark("plan_error", {{"error", *rec.plan_error}});
    return rec;
  }

  rec.plan = verdict.chain;
  rec.planner_fallback = verdict.fallback;
  const auto predicted = stage_chains(verdict.chain);
  for (int k = 0; k < rec.stage_count(); ++k) {
    rec.planning_correct[k] = k < static_cast<int>(predicted.size()) &&
                              predicted[k] == ep.ground_truth.at(ep.priority_order.at(k));
  }
  if (trace) trace->mark("plan", {{"plan", plan_to_json(verdict.chain)}, {"backend", to_string(verdict.backend)}});

  ScriptedNavController scripted_nav;
  ScriptedManipController scripted_manip;
  std::unique_ptr<TrainedNavController> trained_nav;
  Controllers controllers{&scripted_nav, &scripted_manip};
  if (ctx.controllers.kind == ControllerSet::Trained) {
    if (!ctx.controllers.policy) throw FormatError("trained controllers need a policy");
    trained_nav = std::make_unique<TrainedNavController>(*ctx.controllers.policy, *ctx.bank, ctx.controllers.nav);
    controllers.nav = trained_nav.get();
  }

  SkillContext base;
  base.trace = trace;
  const PlanResult pr = run_plan(world, ep, verdict.chain, controllers, base);
  for (const auto& s : pr.stages) rec.stages.push_back(s.outcomes);
  bool all_correct = true;
  for (bool c : rec.planning_correct) all_correct = all_correct && c;
  rec.overall = all_correct && pr.overall;
  return rec;
}

std::vector<EpisodeRecord> run_episodes(const std::vector<Episode>& episodes,
                                        const std::map<std::string, Scene>& scenes, const EpisodeContext& ctx,
                                        int jobs) {
  std::vector<EpisodeRecord> out(episodes.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= episodes.size()) return;
      try {
        EpisodeContext local = ctx;
        const auto it = scenes.find(episodes[i].scene_id);
        if (it == scenes.end()) throw FormatError("unknown scene " + episodes[i].scene_id);
        local.scene = &it->second;
        out[i] = run_episode(episodes[i], local);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = episodes.size();
        return;
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(episodes.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

json RunConfig::to_json() const {
  return json{{"task", soundtrig::to_string(task)},
              {"dataset", dataset.string()},
              {"split", split},
              {"planner", soundtrig::to_string(planner)},
              {"remote", remote.to_json()},
              {"transcripts", transcripts.string()},
              {"controllers", soundtrig::to_string(controllers)},
              {"policy", policy.string()},
              {"nav", nav.to_json()},
              {"seed", seed},
              {"jobs", jobs},
              {"limit", limit},
              {"out_dir", out_dir.string()}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  if (j.contains("task")) c.task = task_from_string(j["task"].get<std::string>());
  c.dataset = j.value("dataset", c.dataset.string());
  c.split = j.value("split", c.split);
  if (j.contains("planner")) c.planner = backend_from_string(j["planner"].get<std::string>());
  if (j.contains("remote")) c.remote = RemoteConfig::from_json(j["remote"]);
  c.transcripts = j.value("transcripts", c.transcripts.string());
  if (j.contains("controllers")) c.controllers = controller_set_from_string(j["controllers"].get<std::string>());
  c.policy = j.value("policy", c.policy.string());
  if (j.contains("nav")) c.nav = NavEnvConfig::from_json(j["nav"]);
  c.seed = j.value("seed", c.seed);
  c.jobs = j.value("jobs", c.jobs);
  c.limit = j.value("limit", c.limit);
  c.out_dir = j.value("out_dir", c.out_dir.string());
  return c;
}

void RunConfig::validate() const {
  if (dataset.empty() || !std::filesystem::exists(dataset)) {
    throw IoFailure("dataset not found: " + dataset.string());
  }
  if (split != "train" && split != "test") throw FormatError("split must be train or test");
  if (controllers == ControllerSet::Trained && (policy.empty() || !std::filesystem::exists(policy))) {
    throw IoFailure("trained controllers need an existing --policy checkpoint");
  }
  if (planner == Backend::Remote && remote.endpoint.empty()) {
    throw FormatError(std::string("remote planner needs an endpoint (config or ") + kEndpointEnvVar + ")");
  }
  if (jobs < 1) throw FormatError("jobs must be >= 1");
}

RunOutput run_evaluation(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.remote.apply_env();
  cfg.validate();
  const Dataset ds = read_dataset(cfg.dataset);
  if (ds.manifest.task != cfg.task) {
    throw FormatError("dataset task " + std::string(to_string(ds.manifest.task)) + " does not match " +
                      std::string(to_string(cfg.task)));
  }
  const SoundBank bank = synthesize_bank(ds.manifest.bank_seed);
  std::vector<Episode> episodes = cfg.split == "test" ? ds.test : ds.train;
  if (cfg.limit > 0 && static_cast<std::size_t>(cfg.limit) < episodes.size()) episodes.resize(cfg.limit);

  std::filesystem::create_directories(cfg.out_dir);
  EpisodeContext ctx;
  ctx.bank = &bank;
  ctx.planner.kind = cfg.planner;

  CategoryClassifier classifier;
  if (cfg.planner == Backend::RuleBased) {
    classifier.fit(bank);
    ctx.planner.classifier = &classifier;
  }
  std::unique_ptr<TokenBucket> bucket;
  std::unique_ptr<TranscriptLog> transcripts;
  if (cfg.planner == Backend::Remote) {
    ctx.planner.remote = cfg.remote;
    bucket = std::make_unique<TokenBucket>(cfg.remote.rate_per_s, cfg.remote.burst);
    transcripts = std::make_unique<TranscriptLog>(cfg.transcripts.empty() ? cfg.out_dir / "transcripts.jsonl"
                                                                          : cfg.transcripts);
    ctx.planner.bucket = bucket.get();
    ctx.planner.transcripts = transcripts.get();
  }
  PolicyNet policy;
  ctx.controllers.kind = cfg.controllers;
  ctx.controllers.nav = cfg.nav;
  if (cfg.controllers == ControllerSet::Trained) {
    policy = load_checkpoint(cfg.policy);
    ctx.controllers.policy = &policy;
  }

  RunOutput out;
  out.records = run_episodes(episodes, ds.scene_map(), ctx, cfg.jobs);
  out.report = aggregate(out.records, cfg.task, std::string(to_string(cfg.planner)),
                         std::string(to_string(cfg.controllers)));
  return out;
}

}  // namespace soundtrig
