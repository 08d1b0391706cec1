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


#include "soundtrig/remote_planner.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "soundtrig/encoding.hpp"
#include "soundtrig/errors.hpp"
#include "soundtrig/prompts.hpp"
#include "soundtrig/wav.hpp"

namespace soundtrig {

using nlohmann::json;

json RemoteConfig::to_json() const {
  return json{{"endpoint", endpoint}, {"model", model},         {"timeout_s", timeout_s},
              {"retries", retries},   {"rate_per_s", rate_per_s}, {"burst", burst}};
}

RemoteConfig RemoteConfig::from_json(const json& j) {
  RemoteConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.retries = j.value("retries", c.retries);
  c.rate_per_s = j.value("rate_per_s", c.rate_per_s);
  c.burst = j.value("burst", c.burst);
  if (c.retries < 0 || c.timeout_s <= 0.0) throw FormatError("remote planner config out of range");
  return c;
}

void RemoteConfig::apply_env() {
  if (!endpoint.empty()) return;
  if (const char* e = std::getenv(kEndpointEnvVar)) endpoint = e;
}

TokenBucket::TokenBucket(double rate_per_s, double burst)
    : rate_(rate_per_s), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    tokens_ = std::min(burst_, tokens_ + rate_ * std::chrono::duration<double>(now - last_).count());
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    lock.lock();
  }
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw IoFailure("cannot open transcript log " + path.string());
}

void TranscriptLog::append(const json& entry) {
  std::lock_guard lock(mu_);
  out_ << entry.dump() << '\n';
  out_.flush();
}

EndpointUrl parse_endpoint(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw Transport("unsupported endpoint URL: '" + url + "'");
  const auto slash = url.find('/', scheme.size());
  EndpointUrl e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "/" : url.substr(slash);
  if (e.origin.size() == scheme.size()) throw Transport("endpoint has no host: '" + url + "'");
  return e;
}

json build_remote_request(const PlannerObservation& obs, const std::string& model) {
  const std::string wav = encode_wav_stereo(obs.audio);
  const std::vector<std::uint8_t> png = encode_png(rasterize_scan(obs.scan));
  json user_parts = json::array();
  user_parts.push_back({{"type", "image"}, {"mime", "image/png"}, {"data", base64_encode(png)}});
  user_parts.push_back({{"type", "audio"}, {"mime", "audio/wav"}, {"data", base64_encode(wav)}});
  user_parts.push_back({{"type", "text"}, {"text", prompts::user_text()}});
  return json{{"model", model},
              {"messages",
               json::array({json{{"role", "system"}, {"content", system_prompt_for(obs)}},
                            json{{"role", "user"}, {"parts", user_parts}}})}};
}

namespace {

std::string reply_text(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception&) {
    throw PlanParse("endpoint reply is not JSON");
  }
  if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
    throw PlanParse("endpoint reply has no text field");
  }
  return doc["text"].get<std::string>();
}

}  // namespace

PlannerVerdict plan_remote(const PlannerObservation& obs, const RemoteConfig& config, TokenBucket* bucket,
                           TranscriptLog* log, const std::string& episode_id) {
  const EndpointUrl url = parse_endpoint(config.endpoint);
  const std::string body = build_remote_request(obs, config.model).dump();

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  std::string last_error;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    if (bucket) bucket->acquire();
    json entry{{"episode_id", episode_id}, {"attempt", attempt}, {"endpoint", config.endpoint},
               {"model", config.model}, {"system", system_prompt_for(obs)}};
    auto res = client.Post(url.path, body, "application/json");
    if (!res) {
      const std::string why = httplib::to_string(res.error());
      if (log) {
        entry["error"] = why;
        log->append(entry);
      }
      throw Transport("request failed: " + why);
    }
    entry["status"] = res->status;
    entry["response"] = res->body;
    if (log) log->append(entry);
    if (res->status != 200) throw Transport("HTTP status " + std::to_string(res->status));

    try {
      const std::string text = reply_text(res->body);
      PlannerVerdict v;
      v.backend = Backend::Remote;
      v.raw_response = text;
      v.chain = parse_plan_response(text, obs.bisonic());
      return v;
    } catch (const PlanParse& e) {
      last_error = e.what();
    }
  }
  throw PlanParse(last_error + " (after " + std::to_string(config.retries + 1) + " attempts)");
}

}  // namespace soundtrig
