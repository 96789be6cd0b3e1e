// include/blspk/error.h

// Copyright 2026   The blspk Authors

// See the LICENSE file at the repository root
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef BLSPK_ERROR_H_
#define BLSPK_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace blspk {

enum class ErrorCode {
  kNotWav,
  kUnsupportedFormat,
  kIoError,
  kTooShort,
  kAllSilent,
  kEmptyInput,
  kDimensionMismatch,
  kLabelOutOfRange,
  kShapeMismatch,
  kCorpusTooSmall,
  kSegmentTooShort,
  kBadMagic,
  kVersionMismatch,
  kChecksumMismatch,
  kTruncatedFile,
  kZeroEmbedding,
  kNoEntries,
  kEmptyDb,
  kInvalidName,
  kBadEmbedding,
  kParseError,
  kSchemaVersionMismatch,
  kMalformedLine,
  kOneClassOnly,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every domain failure in the library is reported through this exception.
// what() is "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &detail);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace blspk

#endif  // BLSPK_ERROR_H_
