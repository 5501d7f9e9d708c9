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

#include "dawn/error.hpp"

#include <string>

namespace dawn {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kUnsupportedDtype: return "unsupported_dtype";
    case ErrorCode::kTooFewClasses: return "too_few_classes";
    case ErrorCode::kKTooLarge: return "k_too_large";
    case ErrorCode::kBadGeometry: return "bad_geometry";
    case ErrorCode::kBadConfig: return "bad_config";
    case ErrorCode::kNotApplicable: return "not_applicable";
    case ErrorCode::kUnknownInput: return "unknown_input";
    case ErrorCode::kStorageFailure: return "storage_failure";
    case ErrorCode::kUnknownClient: return "unknown_client";
    case ErrorCode::kChainCorrupt: return "chain_corrupt";
    case ErrorCode::kWatermarkNotRegistered: return "watermark_not_registered";
    case ErrorCode::kEmptyBundle: return "empty_bundle";
    case ErrorCode::kSuspectUnreachable: return "suspect_unreachable";
    case ErrorCode::kDomainError: return "domain_error";
    case ErrorCode::kNotAchievable: return "not_achievable";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kModelNotRegistered: return "model_not_registered";
    case ErrorCode::kGatewayUnreachable: return "gateway_unreachable";
    case ErrorCode::kParseError: return "parse_error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace dawn
