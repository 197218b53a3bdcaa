#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tmkit {

enum class ErrorCode {
  DuplicateId,
  DuplicateArc,
  DanglingReference,
  InvalidId,
  UnknownToken,
  MisplacedDirection,
  EmptyFlowString,
  Syntax,
  EmptyModel,
  UnvalidatedModel,
  OverlappingRegions,
  UncoveredStage,
  DisconnectedRegion,
  UnknownStimulus,
  InvalidScript,
  NotAnFsmModel,
  InvalidFsm,
  UnknownState,
  AmbiguousTransition,
  DuplicateTransition,
  SelfLoop,
  Io,
};

std::string_view to_string(ErrorCode code);

struct SourcePosition {
  std::size_t line = 0;
  std::size_t column = 0;
};

/// Every failure raised by the toolkit. Parsers attach a source position.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<SourcePosition> position = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<SourcePosition>& position() const noexcept {
    return position_;
  }

 private:
  ErrorCode code_;
  std::optional<SourcePosition> position_;
};

}  // namespace tmkit
