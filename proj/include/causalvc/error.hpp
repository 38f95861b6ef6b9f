#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalvc {

enum class Errc {
  MissingFile,
  NonNumericCell,
  DuplicateColumn,
  EmptyBody,
  MissingVariable,
  InvalidSize,
  KTooLarge,
  LengthMismatch,
  TagMismatch,
  InvalidDegree,
  DegenerateInput,
  ZeroCorrelation,
  UnknownNode,
  MarginalMismatch,
  NonPsdInput,
  InvalidN,
  InvalidParams,
  NTooLarge,
  SizeMismatch,
  InvalidModel,
  UnsupportedQueryForModel,
  ParseError,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::DuplicateColumn: return "DuplicateColumn";
    case Errc::EmptyBody: return "EmptyBody";
    case Errc::MissingVariable: return "MissingVariable";
    case Errc::InvalidSize: return "InvalidSize";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::TagMismatch: return "TagMismatch";
    case Errc::InvalidDegree: return "InvalidDegree";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::ZeroCorrelation: return "ZeroCorrelation";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::MarginalMismatch: return "MarginalMismatch";
    case Errc::NonPsdInput: return "NonPsdInput";
    case Errc::InvalidN: return "InvalidN";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::NTooLarge: return "NTooLarge";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::UnsupportedQueryForModel: return "UnsupportedQueryForModel";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's JSON error output) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace causalvc
