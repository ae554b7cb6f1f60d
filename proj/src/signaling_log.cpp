#include "wonder/signaling_log.hpp"

#include <algorithm>

namespace wonder {

std::vector<SignalingRecord> SignalingLog::ordered() const {
  auto out = records_;
  std::stable_sort(out.begin(), out.end(),
                   [](const SignalingRecord& a, const SignalingRecord& b) { return a.time < b.time; });
  return out;
}

std::vector<std::string> SignalingLog::steps(const std::string& ue_id) const {
  std::vector<std::string> out;
  for (const auto& r : ordered())
    if (ue_id.empty() || r.ue_id == ue_id) out.push_back(r.step);
  return out;
}

std::string json_line(Micros time, const nlohmann::ordered_json& fields) {
  std::string rest = fields.dump();
  std::string out = "{\"time_ms\":" + format_ms(time);
  if (rest.size() > 2) out += "," + rest.substr(1);
  else out += "}";
  return out;
}

std::string SignalingLog::export_jsonl() const {
  std::string out;
  for (const auto& r : ordered()) {
    out += json_line(r.time, {{"step", r.step},
                              {"from_role", r.from_role},
                              {"to_role", r.to_role},
                              {"ue_id", r.ue_id},
                              {"detail", r.detail}});
    out += '\n';
  }
  return out;
}

bool is_subsequence(const std::vector<std::string>& needle,
                    const std::vector<std::string>& haystack) {
  std::size_t i = 0;
  for (const auto& h : haystack)
    if (i < needle.size() && h == needle[i]) ++i;
  return i == needle.size();
}

}  // namespace wonder
