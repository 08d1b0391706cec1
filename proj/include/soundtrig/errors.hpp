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

#include <stdexcept>
#include <string>

namespace soundtrig {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SOUNDTRIG_DEFINE_ERROR(Name)          \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

SOUNDTRIG_DEFINE_ERROR(DegenerateScene);
SOUNDTRIG_DEFINE_ERROR(InvalidScene);
SOUNDTRIG_DEFINE_ERROR(OutOfBounds);
SOUNDTRIG_DEFINE_ERROR(RateMismatch);
SOUNDTRIG_DEFINE_ERROR(SilentRIR);
SOUNDTRIG_DEFINE_ERROR(TooShort);
SOUNDTRIG_DEFINE_ERROR(Unfitted);
SOUNDTRIG_DEFINE_ERROR(GenerationExhausted);
SOUNDTRIG_DEFINE_ERROR(UnknownCategory);
SOUNDTRIG_DEFINE_ERROR(InvalidChain);
SOUNDTRIG_DEFINE_ERROR(NonFiniteLoss);
SOUNDTRIG_DEFINE_ERROR(EmptyRun);
SOUNDTRIG_DEFINE_ERROR(IoFailure);
SOUNDTRIG_DEFINE_ERROR(FormatError);
SOUNDTRIG_DEFINE_ERROR(Transport);
SOUNDTRIG_DEFINE_ERROR(PlanParse);

#undef SOUNDTRIG_DEFINE_ERROR

/// A plan that parsed but violates the skill vocabulary or structure.
/// `token` names the offending element ("empty", the bad skill, or the bad key).
class PlanInvalid : public Error {
 public:
  explicit PlanInvalid(std::string token)
      : Error("invalid plan: " + token), token_(std::move(token)) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

}  // namespace soundtrig
