// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/error.hpp"

namespace hogfusion {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptImage: return "CorruptImage";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InputTooSmall: return "InputTooSmall";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingSample: return "MissingSample";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::FeatureMismatch: return "FeatureMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

}  // namespace hogfusion
