#include "wonder/session.hpp"

#include <algorithm>

#include "wonder/error.hpp"

namespace wonder {

const char* to_string(SessionState state) {
  switch (state) {
    case SessionState::Idle: return "Idle";
    case SessionState::Attaching: return "Attaching";
    case SessionState::Active: return "Active";
    case SessionState::HandingOver: return "HandingOver";
  }
  return "?";
}

const Bearer& UeSession::bearer(int bearer_id) const {
  auto it = std::find_if(bearers.begin(), bearers.end(),
                         [bearer_id](const Bearer& b) { return b.bearer_id == bearer_id; });
  if (it == bearers.end())
    throw Error(ErrorCode::UnknownSession, ue_id + " has no bearer " + std::to_string(bearer_id));
  return *it;
}

Bearer& UeSession::bearer(int bearer_id) {
  return const_cast<Bearer&>(std::as_const(*this).bearer(bearer_id));
}

const Bearer& UeSession::bearer_for_qfi(int qfi) const {
  auto it = std::find_if(bearers.begin(), bearers.end(),
                         [qfi](const Bearer& b) { return b.qfi == qfi; });
  if (it == bearers.end()) throw Error(ErrorCode::UnboundQfi, ue_id + " qfi " + std::to_string(qfi));
  return *it;
}

}  // namespace wonder
