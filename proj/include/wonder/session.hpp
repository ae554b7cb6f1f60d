#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wonder/mecd_model.hpp"

namespace wonder {

using SegmentList = std::vector<SegmentId>;

/// The four label stacks programmed for one bearer.
struct StackSet {
  SegmentList ul_cu;   // imposed at the CU on N3, ends at the UPF
  SegmentList ul_upf;  // imposed at the UPF on N6, ends at the EC
  SegmentList dl_ec;   // imposed at the EC, ends at the UPF
  SegmentList dl_upf;  // imposed at the UPF on N3, ends at the CU

  bool complete() const {
    return !ul_cu.empty() && !ul_upf.empty() && !dl_ec.empty() && !dl_upf.empty();
  }
  bool operator==(const StackSet&) const = default;
};

struct Bearer {
  int bearer_id = 0;
  int qfi = 0;
  int class_id = 0;
  std::string ec_element;
  StackSet stacks;
  SegmentId app_sid;
  /// Per-UE workloads move with the UE; shared (AWI) apps do not.
  bool shared_app = false;
  bool pinned_app = false;
  /// Set when the bound path is best-effort and misses the class bound.
  bool violating = false;
};

enum class SessionState { Idle, Attaching, Active, HandingOver };

const char* to_string(SessionState state);

struct UeSession {
  std::string ue_id;
  std::string ue_ip;
  std::string serving_cu;
  std::string serving_upf;
  std::vector<Bearer> bearers;
  SessionState state = SessionState::Idle;

  const Bearer& bearer(int bearer_id) const;
  Bearer& bearer(int bearer_id);
  const Bearer& bearer_for_qfi(int qfi) const;
};

}  // namespace wonder
