// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hogfusion {

enum class ErrorCode {
  FileNotFound,
  UnsupportedFormat,
  CorruptImage,
  ZeroDimension,
  ImageTooSmall,
  GridTooSmall,
  InvalidParams,
  IoError,
  ParseError,
  ShapeMismatch,
  InputTooSmall,
  NonFiniteInput,
  InvalidRate,
  UnknownParameter,
  InvalidConfig,
  MissingSample,
  CorruptFile,
  DuplicateId,
  MissingColumn,
  LabelOutOfRange,
  ClassTooSmall,
  LengthMismatch,
  EmptyMatrix,
  SingleClassInput,
  EmptyDataset,
  FeatureMismatch,
  VersionMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library is reported as an Error carrying a code, so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hogfusion
