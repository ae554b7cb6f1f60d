#include "wonder/error.hpp"

#include <sstream>

namespace wonder {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DuplicateSid: return "DuplicateSid";
    case ErrorCode::UnknownEdc: return "UnknownEdc";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::UnknownSid: return "UnknownSid";
    case ErrorCode::NoLiveInstance: return "NoLiveInstance";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::UnboundQfi: return "UnboundQfi";
    case ErrorCode::DuplicateQfi: return "DuplicateQfi";
    case ErrorCode::WrongUpf: return "WrongUpf";
    case ErrorCode::NoBackup: return "NoBackup";
    case ErrorCode::NestedEncapsulation: return "NestedEncapsulation";
    case ErrorCode::NoFeasiblePath: return "NoFeasiblePath";
    case ErrorCode::AppNotPresent: return "AppNotPresent";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::NoDisjointPair: return "NoDisjointPair";
    case ErrorCode::AttachFailed: return "AttachFailed";
    case ErrorCode::HandoverFailed: return "HandoverFailed";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::BufferOverflow: return "BufferOverflow";
    case ErrorCode::NotAnEc: return "NotAnEc";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::NoEcInTargetEdc: return "NoEcInTargetEdc";
    case ErrorCode::UnknownSession: return "UnknownSession";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {
std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream out;
  out << problems.size() << " problem(s)";
  for (const auto& p : problems) out << "\n  " << p;
  return out.str();
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(ErrorCode::ValidationError, join_problems(problems)), problems_(std::move(problems)) {}

NoFeasiblePathError::NoFeasiblePathError(const std::string& what, std::vector<int> bearers)
    : Error(ErrorCode::NoFeasiblePath, what), bearers_(std::move(bearers)) {}

}  // namespace wonder
