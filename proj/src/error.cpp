#include "tmkit/error.hpp"

namespace tmkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DuplicateArc: return "DuplicateArc";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::InvalidId: return "InvalidId";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::MisplacedDirection: return "MisplacedDirection";
    case ErrorCode::EmptyFlowString: return "EmptyFlowString";
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::UnvalidatedModel: return "UnvalidatedModel";
    case ErrorCode::OverlappingRegions: return "OverlappingRegions";
    case ErrorCode::UncoveredStage: return "UncoveredStage";
    case ErrorCode::DisconnectedRegion: return "DisconnectedRegion";
    case ErrorCode::UnknownStimulus: return "UnknownStimulus";
    case ErrorCode::InvalidScript: return "InvalidScript";
    case ErrorCode::NotAnFsmModel: return "NotAnFsmModel";
    case ErrorCode::InvalidFsm: return "InvalidFsm";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::AmbiguousTransition: return "AmbiguousTransition";
    case ErrorCode::DuplicateTransition: return "DuplicateTransition";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string decorate(const std::string& message,
                     const std::optional<SourcePosition>& position) {
  if (!position) return message;
  return std::to_string(position->line) + ":" +
         std::to_string(position->column) + ": " + message;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<SourcePosition> position)
    : std::runtime_error(decorate(message, position)),
      code_(code),
      position_(position) {}

}  // namespace tmkit
