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

#ifndef VEMORPH_ERROR_HPP_
#define VEMORPH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vemorph {

// Every failure that can surface as a counted skip carries one of these
// codes; `reason_code` yields the stable snake_case token written to reports.
enum class ErrorCode {
  kDegenerateBox,
  kEmptyPool,
  kMalformedResponse,
  kNoRemainingUnits,
  kBackendUnavailable,
  kTimeout,
  kBackendMalformed,
  kBackendRejected,
  kDimensionMismatch,
  kImageDecode,
  kPlacementFailure,
  kManifestUnreadable,
  kValidation,
  kPendingVerdicts,
  kEmptyReview,
  kConfig,
  kIo,
};

std::string_view reason_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view reason() const noexcept { return reason_code(code_); }

 private:
  ErrorCode code_;
};

}  // namespace vemorph

#endif  // VEMORPH_ERROR_HPP_
