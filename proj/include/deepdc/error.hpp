#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deepdc {

enum class ErrorCode {
  NonFiniteInput,
  ShapeMismatch,
  DegenerateSample,
  ConstantInput,
  InsufficientData,
  BadMagic,
  UnsupportedVersion,
  CorruptTensor,
  MissingTap,
  InvalidScale,
  ImageTooSmall,
  NonFiniteActivation,
  TapMismatch,
  FitFailed,
  UnknownKind,
  InvalidConfig,
  IoError,
  DecodeError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptTensor: return "CorruptTensor";
    case ErrorCode::MissingTap: return "MissingTap";
    case ErrorCode::InvalidScale: return "InvalidScale";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::TapMismatch: return "TapMismatch";
    case ErrorCode::FitFailed: return "FitFailed";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DecodeError: return "DecodeError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deepdc
