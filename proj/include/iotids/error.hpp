#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iotids {

enum class ErrorKind {
  // flow_data
  MalformedHeader,
  ColumnCountMismatch,
  BadNumeric,
  UnknownBinaryLabel,
  EmptyClass,
  // featurize
  BadIpSyntax,
  ColumnMismatch,
  SchemaMismatch,
  // split_cv
  BadFractions,
  TooFewRows,
  // models
  EmptyInput,
  WidthMismatch,
  EmptyValidation,
  BadK,
  SingleClass,
  ShapeMismatch,
  NonFiniteLoss,
  InputTooNarrow,
  BadOneHot,
  // evaluation
  LengthMismatch,
  EmptyMatrix,
  IoFailure,
  // harness
  ConfigInvalid,
  DataUnparseable,
  ModelDataMismatch,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::ColumnCountMismatch: return "ColumnCountMismatch";
    case ErrorKind::BadNumeric: return "BadNumeric";
    case ErrorKind::UnknownBinaryLabel: return "UnknownBinaryLabel";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::BadIpSyntax: return "BadIpSyntax";
    case ErrorKind::ColumnMismatch: return "ColumnMismatch";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::BadFractions: return "BadFractions";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::EmptyValidation: return "EmptyValidation";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::InputTooNarrow: return "InputTooNarrow";
    case ErrorKind::BadOneHot: return "BadOneHot";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::DataUnparseable: return "DataUnparseable";
    case ErrorKind::ModelDataMismatch: return "ModelDataMismatch";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line` is set for parse errors
/// (1-based line in the source stream).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            std::optional<std::size_t> line) {
    std::string out{to_string(kind)};
    if (line) out += " (line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::optional<std::size_t> line_;
  std::string message_;
};

}  // namespace iotids
