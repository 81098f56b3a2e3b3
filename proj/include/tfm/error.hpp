#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tfm {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  InsufficientSupport,
  SingularDesign,
  DegenerateCovariate,
  AllAssetsExcluded,
  ZeroAnchorCovariate,
  CollinearTransforms,
  OutOfRange,
  RankDeficientDesign,
  NonPositiveRSS1,
  RankDeficientLoadings,
  InsufficientHistory,
  ParseError,
  EmptyIntersection,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InsufficientSupport: return "InsufficientSupport";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DegenerateCovariate: return "DegenerateCovariate";
    case ErrorCode::AllAssetsExcluded: return "AllAssetsExcluded";
    case ErrorCode::ZeroAnchorCovariate: return "ZeroAnchorCovariate";
    case ErrorCode::CollinearTransforms: return "CollinearTransforms";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::NonPositiveRSS1: return "NonPositiveRSS1";
    case ErrorCode::RankDeficientLoadings: return "RankDeficientLoadings";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Single exception type for the library. Asset and factor indices are
// zero-based and attached when the failure can be localised.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<int> asset = std::nullopt,
        std::optional<int> factor = std::nullopt)
      : std::runtime_error(compose(code, message, asset, factor)),
        code_(code), detail_(message), asset_(asset), factor_(factor) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<int> asset() const noexcept { return asset_; }
  std::optional<int> factor() const noexcept { return factor_; }

  // Re-raise with asset/factor context added (existing context wins).
  Error with_context(std::optional<int> asset, std::optional<int> factor) const {
    return Error(code_, detail_, asset_ ? asset_ : asset, factor_ ? factor_ : factor);
  }

 private:
  static std::string compose(ErrorCode code, const std::string& message,
                             std::optional<int> asset, std::optional<int> factor) {
    std::string out(to_string(code));
    if (asset) out += " [asset " + std::to_string(*asset) + "]";
    if (factor) out += " [factor " + std::to_string(*factor) + "]";
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  std::string detail_;
  std::optional<int> asset_;
  std::optional<int> factor_;
};

}  // namespace tfm
