// Copyright 2026 The vemorph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vemorph/error.hpp"

namespace vemorph {

std::string_view reason_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDegenerateBox: return "degenerate_box";
    case ErrorCode::kEmptyPool: return "empty_pool";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kNoRemainingUnits: return "no_remaining_units";
    case ErrorCode::kBackendUnavailable: return "backend_unavailable";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kBackendMalformed: return "backend_malformed";
    case ErrorCode::kBackendRejected: return "backend_rejected";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kImageDecode: return "image_decode";
    case ErrorCode::kPlacementFailure: return "placement_failure";
    case ErrorCode::kManifestUnreadable: return "manifest_unreadable";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kPendingVerdicts: return "pending_verdicts";
    case ErrorCode::kEmptyReview: return "empty_review";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

}  // namespace vemorph
