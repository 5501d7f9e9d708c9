/* Copyright 2026 The DAWN Gateway Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DAWN_ERROR_HPP_
#define DAWN_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dawn {

enum class ErrorCode {
  kShapeMismatch,
  kUnsupportedDtype,
  kTooFewClasses,
  kKTooLarge,
  kBadGeometry,
  kBadConfig,
  kNotApplicable,
  kUnknownInput,
  kStorageFailure,
  kUnknownClient,
  kChainCorrupt,
  kWatermarkNotRegistered,
  kEmptyBundle,
  kSuspectUnreachable,
  kDomainError,
  kNotAchievable,
  kUnauthorized,
  kModelNotRegistered,
  kGatewayUnreachable,
  kParseError,
};

// Stable lower_snake_case name, used in JSON error bodies and CLI output.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dawn

#endif  // DAWN_ERROR_HPP_
