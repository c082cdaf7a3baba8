#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace matfac {

enum class ErrorCode {
  NonSquare,
  NotSymmetric,
  NonFinite,
  RankDeficient,
  DimMismatch,
  BadDims,
  DegenerateWeights,
  BadConfig,
  Empty,
  DegenerateDenominator,
  Io,
  Parse,
  MissingCell,
  DuplicateCell,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
  }
  return "Unknown";
}

/// Every failure raised by the library. what() starts with the code token.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by spd_inv_sqrt and friends; carries how many eigenvalues hit the floor.
class RankDeficientError : public Error {
 public:
  RankDeficientError(std::size_t floored, const std::string& detail)
      : Error(ErrorCode::RankDeficient, detail + " (" + std::to_string(floored) + " eigenvalue(s) at or below floor)"),
        floored_(floored) {}

  std::size_t floored() const noexcept { return floored_; }

 private:
  std::size_t floored_;
};

}  // namespace matfac
