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


#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>

#include "json.hpp"
#include "soundtrig/planner.hpp"

namespace soundtrig {

inline constexpr const char* kEndpointEnvVar = "ECHO_ENDPOINT";

struct RemoteConfig {
  std::string endpoint;  // http://host[:port]/path
  std::string model = "qwen2.5-omni-7b";
  double timeout_s = 30.0;
  int retries = 2;          // extra attempts after a parse failure
  double rate_per_s = 0.0;  // shared request rate; 0 disables limiting
  double burst = 1.0;

  nlohmann::json to_json() const;
  static RemoteConfig from_json(const nlohmann::json& j);
  /// Fills endpoint from ECHO_ENDPOINT when it is set and endpoint is empty.
  void apply_env();
};

/// Shared across worker threads; acquire() blocks until a token is available.
class TokenBucket {
 public:
  TokenBucket(double rate_per_s, double burst);
  void acquire();

 private:
  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

/// Request/response audit log, one JSON object per line.
class TranscriptLog {
 public:
  explicit TranscriptLog(const std::filesystem::path& path);
  void append(const nlohmann::json& entry);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct EndpointUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};
/// Throws Transport for anything other than an http:// URL.
EndpointUrl parse_endpoint(const std::string& url);

/// The request body. Only a PlannerObservation can reach the wire.
nlohmann::json build_remote_request(const PlannerObservation& obs, const std::string& model);

/// Throws Transport, PlanParse (after retries) or PlanInvalid.
PlannerVerdict plan_remote(const PlannerObservation& obs, const RemoteConfig& config,
                           TokenBucket* bucket = nullptr, TranscriptLog* log = nullptr,
                           const std::string& episode_id = {});

}  // namespace soundtrig
