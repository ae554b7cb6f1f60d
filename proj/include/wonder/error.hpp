#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wonder {

enum class ErrorCode {
  ParseError,
  ValidationError,
  DuplicateSid,
  UnknownEdc,
  UnknownElement,
  UnknownSid,
  NoLiveInstance,
  UnknownClass,
  UnboundQfi,
  DuplicateQfi,
  WrongUpf,
  NoBackup,
  NestedEncapsulation,
  NoFeasiblePath,
  AppNotPresent,
  Unreachable,
  NoDisjointPair,
  AttachFailed,
  HandoverFailed,
  PreconditionViolation,
  BufferOverflow,
  NotAnEc,
  CapacityExceeded,
  NoEcInTargetEdc,
  UnknownSession,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Carries every violated invariant, each prefixed with its field path.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Raised by the controller when a class bound cannot be met. The bearer ids
/// that had no feasible record under any UPF are attached, so the workload
/// controller can relocate exactly those.
class NoFeasiblePathError : public Error {
 public:
  NoFeasiblePathError(const std::string& what, std::vector<int> bearers = {});
  const std::vector<int>& bearers() const noexcept { return bearers_; }

 private:
  std::vector<int> bearers_;
};

}  // namespace wonder
