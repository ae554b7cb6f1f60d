#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wonder/time.hpp"

namespace wonder {

/// One control-plane message.
struct SignalingRecord {
  Micros time{0};
  std::string step;
  std::string from_role;
  std::string to_role;
  std::string ue_id;
  std::string detail;
};

class SignalingLog {
 public:
  void emit(SignalingRecord record) { records_.push_back(std::move(record)); }
  const std::vector<SignalingRecord>& records() const { return records_; }
  /// Records ordered by time; equal times keep emission order.
  std::vector<SignalingRecord> ordered() const;
  /// Step names in time order, optionally restricted to one UE.
  std::vector<std::string> steps(const std::string& ue_id = "") const;
  /// JSON lines `{time_ms, step, from_role, to_role, ue_id, detail}`.
  std::string export_jsonl() const;

 private:
  std::vector<SignalingRecord> records_;
};

/// Renders `fields` as one JSON object whose first member is `time_ms` in
/// fixed three-decimal form.
std::string json_line(Micros time, const nlohmann::ordered_json& fields);

/// True when `needle` occurs in `haystack` as an ordered subsequence.
bool is_subsequence(const std::vector<std::string>& needle,
                    const std::vector<std::string>& haystack);

}  // namespace wonder
