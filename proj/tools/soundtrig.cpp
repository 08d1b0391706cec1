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


// Command-line front end: dataset synthesis, evaluation, reports and traces.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "soundtrig/errors.hpp"
#include "soundtrig/harness.hpp"
#include "soundtrig/observe.hpp"
#include "soundtrig/wav.hpp"

using namespace soundtrig;
namespace fs = std::filesystem;

namespace {

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot read config " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config is not JSON: " + std::string(e.what()));
  }
}

const Episode& find_episode(const Dataset& ds, const std::string& id) {
  for (const auto* list : {&ds.test, &ds.train}) {
    for (const auto& ep : *list) {
      if (ep.episode_id == id) return ep;
    }
  }
  throw FormatError("episode not found: " + id);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot write " + path.string());
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soundtrig: sound-triggered mobile manipulation benchmark"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path;
  int jobs = 1;
  app.add_option("--seed", seed, "Base seed")->capture_default_str();
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  // synth-bank
  auto* synth = app.add_subcommand("synth-bank", "Synthesize the sound bank");
  std::string bank_out = "bank";
  bool with_wavs = false;
  synth->add_option("--out", bank_out, "Output directory")->capture_default_str();
  synth->add_flag("--wavs", with_wavs, "Also write one WAV per clip");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate an episode dataset");
  std::string task_name = "stow", preset_name = "desk", gen_out = "data";
  std::optional<std::uint64_t> bank_seed;
  gen->add_option("--task", task_name, "stow | interact | bisonic")->capture_default_str();
  gen->add_option("--preset", preset_name, "desk | paper")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
  gen->add_option("--bank-seed", bank_seed, "Sound bank seed (defaults to --seed)");

  // validate
  auto* val = app.add_subcommand("validate", "Re-validate every episode of a dataset");
  std::string val_dir;
  val->add_option("dataset", val_dir, "Dataset directory or manifest")->required();

  // render-audio
  auto* render = app.add_subcommand("render-audio", "Render the binaural window heard at an episode start");
  std::string render_episode, render_dataset = "data", render_out = "episode.wav";
  long render_step = 0;
  render->add_option("episode", render_episode, "Episode id")->required();
  render->add_option("--dataset", render_dataset, "Dataset directory")->capture_default_str();
  render->add_option("--out", render_out, "Output WAV")->capture_default_str();
  render->add_option("--step", render_step, "Time step of the window")->capture_default_str();

  // train-nav
  auto* train = app.add_subcommand("train-nav", "Train the Navigate policy with PPO");
  std::string policy_out = "nav_policy.bin", curve_out;
  long total_steps = -1;
  int eval_episodes = 100;
  train->add_option("--out", policy_out, "Checkpoint path")->capture_default_str();
  train->add_option("--steps", total_steps, "Environment steps (default from config)");
  train->add_option("--curve", curve_out, "Learning-curve CSV");
  train->add_option("--eval-episodes", eval_episodes, "Greedy evaluation episodes")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Run the pipeline over a dataset split");
  std::string planner_name, controllers_name, eval_dataset, eval_out, split, policy_path, endpoint, model,
      transcripts;
  int limit = -1, retries = -1;
  double timeout = -1.0, rate = -1.0;
  ev->add_option("--planner", planner_name, "oracle | rule | remote");
  ev->add_option("--controllers", controllers_name, "oracle | trained");
  ev->add_option("--dataset", eval_dataset, "Dataset directory");
  ev->add_option("--out", eval_out, "Output directory");
  ev->add_option("--split", split, "train | test");
  ev->add_option("--limit", limit, "Evaluate only the first N episodes");
  ev->add_option("--policy", policy_path, "Trained Navigate checkpoint");
  ev->add_option("--endpoint", endpoint, "Remote planner URL (overrides ECHO_ENDPOINT)");
  ev->add_option("--model", model, "Remote model name");
  ev->add_option("--timeout", timeout, "Remote timeout in seconds");
  ev->add_option("--retries", retries, "Remote retries on parse failure");
  ev->add_option("--rate", rate, "Remote requests per second (0 = unlimited)");
  ev->add_option("--transcripts", transcripts, "Transcript JSON-lines path");

  // report
  auto* rep = app.add_subcommand("report", "Print a report from an eval output");
  std::string report_in;
  rep->add_option("input", report_in, "report.csv or records.jsonl")->required();

  // trace
  auto* tr = app.add_subcommand("trace", "Run one episode and write its trace");
  std::string trace_episode, trace_dataset = "data", trace_svg, trace_jsonl;
  tr->add_option("--episode", trace_episode, "Episode id")->required();
  tr->add_option("--dataset", trace_dataset, "Dataset directory")->capture_default_str();
  tr->add_option("--svg", trace_svg, "SVG output path");
  tr->add_option("--jsonl", trace_jsonl, "Per-step JSON-lines output path");

  CLI11_PARSE(app, argc, argv);

  try {
    const nlohmann::json config = load_config(config_path);

    if (*synth) {
      const SoundBank bank = synthesize_bank(seed);
      write_bank(bank, bank_out, with_wavs);
      std::cout << "wrote " << bank.clips.size() << " clips to " << bank_out << '\n';
      return 0;
    }

    if (*gen) {
      const Task task = task_from_string(task_name);
      const Preset preset = preset_from_string(preset_name);
      const SoundBank bank = synthesize_bank(bank_seed.value_or(seed));
      const Dataset ds = generate_dataset(task, preset, seed, bank, jobs);
      write_dataset(ds, gen_out);
      std::cout << to_string(task) << ": " << ds.train.size() << " train, " << ds.test.size() << " test, "
                << ds.scenes.size() << " scenes -> " << gen_out << '\n';
      return 0;
    }

    if (*val) {
      // read_dataset re-validates each episode and throws on the first failure.
      const Dataset ds = read_dataset(val_dir);
      const auto scenes = ds.scene_map();
      int ok = 0, bad = 0;
      for (const auto* list : {&ds.train, &ds.test}) {
        for (const auto& ep : *list) {
          const ValidationReport r = validate_episode(ep, scenes.at(ep.scene_id));
          if (r.pass) {
            ++ok;
            continue;
          }
          ++bad;
          for (const auto& [reason, detail] : r.failures) {
            std::cerr << ep.episode_id << ": " << to_string(reason) << " " << detail << '\n';
          }
        }
      }
      std::cout << ok << " valid, " << bad << " invalid\n";
      return bad == 0 ? 0 : 1;
    }

    if (*render) {
      const Dataset ds = read_dataset(render_dataset);
      const Episode& ep = find_episode(ds, render_episode);
      const SoundBank bank = synthesize_bank(ds.manifest.bank_seed);
      const World world = make_episode_world(ep, ds.scene_map().at(ep.scene_id));
      const BinauralFrame frame = render_world(world, bank, render_step);
      write_wav(render_out, frame);
      std::cout << "wrote " << render_out << (frame.clipped ? " (clipped)" : "") << '\n';
      return 0;
    }

    if (*train) {
      PpoConfig ppo = config.contains("ppo") ? PpoConfig::from_json(config["ppo"]) : PpoConfig::desk();
      if (total_steps >= 0) ppo.total_steps = total_steps;
      const NavEnvConfig nav = config.contains("nav") ? NavEnvConfig::from_json(config["nav"]) : NavEnvConfig{};
      const SoundBank bank = synthesize_bank(config.value("bank_seed", seed));
      const TrainResult res = train_navigate(bank, nav, ppo, seed);
      save_checkpoint(policy_out, res.net, {{"ppo", ppo.to_json()}, {"nav", nav.to_json()}, {"seed", seed}});
      if (!curve_out.empty()) write_curve_csv(res.curve, curve_out);
      const EvalResult er = evaluate_policy(res.net, audio_goal_factory(bank, nav), eval_episodes, seed);
      std::cout << "trained " << ppo.total_steps << " steps; eval success " << er.successes << "/" << er.episodes
                << " (mean " << er.mean_steps << " steps) -> " << policy_out << '\n';
      return 0;
    }

    if (*ev) {
      RunConfig cfg = RunConfig::from_json(config);
      if (!config.contains("seed")) cfg.seed = seed;
      if (!config.contains("jobs") || app.get_option("--jobs")->count()) cfg.jobs = jobs;
      if (!planner_name.empty()) cfg.planner = backend_from_string(planner_name);
      if (!controllers_name.empty()) cfg.controllers = controller_set_from_string(controllers_name);
      if (!eval_dataset.empty()) cfg.dataset = eval_dataset;
      if (!eval_out.empty()) cfg.out_dir = eval_out;
      if (!split.empty()) cfg.split = split;
      if (limit >= 0) cfg.limit = limit;
      if (!policy_path.empty()) cfg.policy = policy_path;
      if (!endpoint.empty()) cfg.remote.endpoint = endpoint;
      if (!model.empty()) cfg.remote.model = model;
      if (timeout > 0) cfg.remote.timeout_s = timeout;
      if (retries >= 0) cfg.remote.retries = retries;
      if (rate >= 0) cfg.remote.rate_per_s = rate;
      if (!transcripts.empty()) cfg.transcripts = transcripts;
      if (!config.contains("task") && !cfg.dataset.empty() && fs::exists(cfg.dataset)) {
        cfg.task = read_dataset(cfg.dataset).manifest.task;
      }
      if (cfg.controllers == ControllerSet::Trained && fs::exists(cfg.policy)) {
        nlohmann::json header;
        load_checkpoint(cfg.policy, &header);
        if (header.contains("nav") && !config.contains("nav")) cfg.nav = NavEnvConfig::from_json(header["nav"]);
      }
      const RunOutput out = run_evaluation(cfg);
      write_report(out.report, cfg.out_dir);
      write_records(out.records, cfg.out_dir / "records.jsonl");
      write_text(cfg.out_dir / "run_config.json", cfg.to_json().dump(2) + "\n");
      std::cout << format_report_table(out.report);
      return 0;
    }

    if (*rep) {
      EvalReport r;
      if (fs::path(report_in).extension() == ".jsonl") {
        const auto records = read_records(report_in);
        if (records.empty()) throw EmptyRun("no records in " + report_in);
        r = aggregate(records, records.front().task, "records", "-");
      } else {
        r = read_report_csv(report_in);
      }
      std::cout << format_report_table(r);
      return 0;
    }

    if (*tr) {
      RunConfig cfg = RunConfig::from_json(config);
      const Dataset ds = read_dataset(trace_dataset);
      const Episode& ep = find_episode(ds, trace_episode);
      const SoundBank bank = synthesize_bank(ds.manifest.bank_seed);
      const auto scenes = ds.scene_map();
      const Scene& base = scenes.at(ep.scene_id);
      EpisodeContext ctx;
      ctx.scene = &base;
      ctx.bank = &bank;
      ctx.planner.kind = cfg.planner == Backend::Remote ? Backend::Oracle : cfg.planner;
      CategoryClassifier classifier;
      if (ctx.planner.kind == Backend::RuleBased) {
        classifier.fit(bank);
        ctx.planner.classifier = &classifier;
      }
      TraceLog log;
      const EpisodeRecord rec = run_episode(ep, ctx, &log);
      const TraceArtifact art = make_trace(ep, log, rec);
      const std::string svg_path = trace_svg.empty() ? ep.episode_id + ".svg" : trace_svg;
      write_text(svg_path, render_trace_svg(art, episode_scene(base, ep)));
      if (!trace_jsonl.empty()) log.write(trace_jsonl);
      std::cout << ep.episode_id << ": " << art.step_count << " steps, "
                << (rec.overall ? "success" : "failure") << " -> " << svg_path << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
