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


#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "soundtrig/encoding.hpp"
#include "soundtrig/errors.hpp"
#include "soundtrig/prompts.hpp"
#include "soundtrig/remote_planner.hpp"
#include "soundtrig/wav.hpp"

using namespace soundtrig;
using nlohmann::json;

namespace {

// Local endpoint replaying canned model replies, one per path.
class StubEndpoint {
 public:
  StubEndpoint() {
    reply("/valid", R"({"plan": ["nav","open_door"]})");
    reply("/fenced", "```json\n{\"plan\": [\"nav\",\"close_sink\"]}\n```");
    reply("/invalid", R"({"plan": ["nav","grab"]})");
    reply("/bisonic", R"({"plan": {"first_sound": ["nav","open_door"], "second_sound": ["nav","pick","place"]}})");
    reply("/garbage", "Sure! Here is the plan: nav then open the door.");
    server_.Post("/slow", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(json{{"text", R"({"plan": ["nav"]})"}}.dump(), "application/json");
    });
    server_.Post("/error", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      res.status = 500;
    });
    server_.Post("/flaky", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = record(req);
      const std::string text = n == 1 ? "not json" : R"({"plan": ["nav","pick","place"]})";
      res.set_content(json{{"text", text}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int hits() const { return hits_; }
  json last_body() {
    std::lock_guard lock(mu_);
    return json::parse(last_);
  }
  void reset() { hits_ = 0; }

 private:
  void reply(const std::string& path, const std::string& text) {
    server_.Post(path, [this, text](const httplib::Request& req, httplib::Response& res) {
      record(req);
      res.set_content(json{{"text", text}}.dump(), "application/json");
    });
  }
  int record(const httplib::Request& req) {
    std::lock_guard lock(mu_);
    last_ = req.body;
    return ++hits_;
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::string last_;
  std::atomic<int> hits_{0};
};

StubEndpoint& stub() {
  static StubEndpoint s;
  return s;
}

PlannerObservation obs(std::optional<Category> hint = std::nullopt) {
  PlannerObservation o;
  o.audio.left.samples.assign(1600, 0.0);
  o.audio.right.samples.assign(1600, 0.0);
  for (std::size_t i = 0; i < 1600; ++i) o.audio.left.samples[i] = 0.3 * std::sin(0.05 * i);
  o.scan.ranges.assign(64, 2.5);
  o.known_first_source = hint;
  return o;
}

RemoteConfig config(const std::string& path) {
  RemoteConfig c;
  c.endpoint = stub().url(path);
  c.timeout_s = 0.5;
  return c;
}

}  // namespace

TEST(Remote, ValidReply) {
  const PlannerVerdict v = plan_remote(obs(), config("/valid"));
  EXPECT_EQ(std::get<SkillChain>(v.chain), (SkillChain{Skill::Nav, Skill::OpenDoor}));
  EXPECT_EQ(v.backend, Backend::Remote);
  EXPECT_EQ(v.raw_response, R"({"plan": ["nav","open_door"]})");
}

TEST(Remote, FencedReply) {
  EXPECT_EQ(std::get<SkillChain>(plan_remote(obs(), config("/fenced")).chain), (SkillChain{Skill::Nav, Skill::CloseSink}));
}

TEST(Remote, InvalidVocabularyIsNotRetried) {
  stub().reset();
  try {
    plan_remote(obs(), config("/invalid"));
    FAIL();
  } catch (const PlanInvalid& e) {
    EXPECT_EQ(e.token(), "grab");
  }
  EXPECT_EQ(stub().hits(), 1);
}

TEST(Remote, TimeoutIsTransport) {
  EXPECT_THROW(plan_remote(obs(), config("/slow")), Transport);
}

TEST(Remote, HttpErrorIsTransport) {
  EXPECT_THROW(plan_remote(obs(), config("/error")), Transport);
}

TEST(Remote, ConnectionRefusedIsTransport) {
  RemoteConfig c;
  c.endpoint = "http://127.0.0.1:1/plan";
  c.timeout_s = 0.5;
  EXPECT_THROW(plan_remote(obs(), c), Transport);
}

TEST(Remote, ParseFailureRetriesThenFails) {
  stub().reset();
  RemoteConfig c = config("/garbage");
  c.retries = 2;
  EXPECT_THROW(plan_remote(obs(), c), PlanParse);
  EXPECT_EQ(stub().hits(), 3);
}

TEST(Remote, RetryRecoversFromOneBadReply) {
  stub().reset();
  const PlannerVerdict v = plan_remote(obs(), config("/flaky"));
  EXPECT_EQ(std::get<SkillChain>(v.chain), (SkillChain{Skill::Nav, Skill::Pick, Skill::Place}));
  EXPECT_EQ(stub().hits(), 2);
}

TEST(Remote, BiSonicShapeEnforced) {
  EXPECT_TRUE(std::holds_alternative<BiSonicChain>(plan_remote(obs(Category::Doorbell), config("/bisonic")).chain));
  EXPECT_THROW(plan_remote(obs(Category::Doorbell), config("/valid")), PlanInvalid);
}

TEST(Remote, RequestCarriesOnlyTheObservation) {
  plan_remote(obs(Category::Sink), config("/bisonic"));
  const json body = stub().last_body();
  EXPECT_EQ(body.at("model"), "qwen2.5-omni-7b");
  const auto& msgs = body.at("messages");
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].at("role"), "system");
  EXPECT_EQ(msgs[0].at("content"), system_prompt_for(obs(Category::Sink)));
  const auto& parts = msgs[1].at("parts");
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].at("type"), "image");
  EXPECT_EQ(parts[1].at("type"), "audio");
  EXPECT_EQ(parts[2].at("text"), prompts::user_text());

  const auto png = base64_decode(parts[0].at("data").get<std::string>());
  ASSERT_GE(png.size(), 8u);
  EXPECT_EQ(std::vector<std::uint8_t>(png.begin(), png.begin() + 8),
            (std::vector<std::uint8_t>{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'}));

  const auto wav_bytes = base64_decode(parts[1].at("data").get<std::string>());
  const WavData wav = decode_wav(std::string(wav_bytes.begin(), wav_bytes.end()));
  EXPECT_EQ(wav.channels, 2);
  EXPECT_EQ(wav.sample_rate, kSampleRate);
  ASSERT_EQ(wav.channel_samples[0].size(), 1600u);
  EXPECT_NEAR(wav.channel_samples[0][100], 0.3 * std::sin(5.0), 1.0 / 32767);
}

TEST(Remote, TranscriptLogged) {
  const auto path = std::filesystem::temp_directory_path() / "soundtrig_transcript_test.jsonl";
  std::filesystem::remove(path);
  {
    TranscriptLog log(path);
    stub().reset();
    plan_remote(obs(), config("/flaky"), nullptr, &log, "ep-7");
  }
  std::ifstream in(path);
  std::string line;
  std::vector<json> lines;
  while (std::getline(in, line)) lines.push_back(json::parse(line));
  std::filesystem::remove(path);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].at("episode_id"), "ep-7");
  EXPECT_EQ(lines[0].at("attempt"), 0);
  EXPECT_EQ(lines[1].at("attempt"), 1);
  EXPECT_EQ(lines[1].at("status"), 200);
}

TEST(Endpoint, Parse) {
  const EndpointUrl e = parse_endpoint("http://localhost:8080/v1/plan");
  EXPECT_EQ(e.origin, "http://localhost:8080");
  EXPECT_EQ(e.path, "/v1/plan");
  EXPECT_EQ(parse_endpoint("http://host").path, "/");
  EXPECT_THROW(parse_endpoint("https://host/x"), Transport);
  EXPECT_THROW(parse_endpoint("http:///x"), Transport);
  EXPECT_THROW(parse_endpoint(""), Transport);
}

TEST(Config, JsonAndEnvironment) {
  RemoteConfig c;
  c.model = "m";
  c.retries = 4;
  const RemoteConfig back = RemoteConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(RemoteConfig::from_json(json{{"retries", -1}}), FormatError);

  setenv(kEndpointEnvVar, "http://example:9/p", 1);
  RemoteConfig e;
  e.apply_env();
  EXPECT_EQ(e.endpoint, "http://example:9/p");
  RemoteConfig keep;
  keep.endpoint = "http://mine/";
  keep.apply_env();
  EXPECT_EQ(keep.endpoint, "http://mine/");
  unsetenv(kEndpointEnvVar);
}

TEST(TokenBucket, LimitsRate) {
  TokenBucket b(20.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 5; ++i) b.acquire();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // One token up front, then four at 20/s.
  EXPECT_GE(s, 0.19);
  EXPECT_LT(s, 1.0);
}

TEST(TokenBucket, ZeroRateIsUnlimited) {
  TokenBucket b(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) b.acquire();
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 0.1);
}
