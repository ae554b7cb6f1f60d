#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wonder/mecd_model.hpp"

namespace wonder {

/// Typed access to a JSON config tree that accumulates every problem with its
/// field path instead of stopping at the first.
class ConfigReader {
 public:
  explicit ConfigReader(bool lax) : lax_(lax) {}

  void problem(const std::string& path, const std::string& message);
  void add(std::string formatted) { problems_.push_back(std::move(formatted)); }
  const std::vector<std::string>& problems() const { return problems_; }
  bool lax() const { return lax_; }

  /// Reports keys of `obj` outside `allowed` (strict mode only).
  void check_keys(const nlohmann::json& obj, const std::string& path,
                  std::initializer_list<std::string_view> allowed);

  bool is_object(const nlohmann::json& value, const std::string& path);
  bool is_array(const nlohmann::json& value, const std::string& path);

  std::optional<std::string> string(const nlohmann::json& obj, const std::string& path,
                                    const char* key, bool required);
  std::optional<double> number(const nlohmann::json& obj, const std::string& path,
                               const char* key, bool required);
  std::optional<long long> integer(const nlohmann::json& obj, const std::string& path,
                                   const char* key, bool required);
  std::optional<bool> boolean(const nlohmann::json& obj, const std::string& path, const char* key,
                              bool required);

 private:
  bool lax_;
  std::vector<std::string> problems_;
};

/// Parses a topology config document (`format_version`, `edcs`, `links`,
/// `sids`, optional `intra_edc_delay_ms` and `srv6_prefix`). Throws ParseError
/// or a ValidationError listing every violated invariant.
Topology load_topology(std::string_view config_text, bool lax = false);

/// Reads a topology object embedded at `path` of a larger document, appending
/// problems to `reader`. The result is meaningful only if no problem was added.
Topology read_topology(const nlohmann::json& node, const std::string& path, ConfigReader& reader);

/// Invariants that hold for any topology regardless of how it was built.
std::vector<std::string> validate_topology(const Topology& topology, const std::string& path);

/// Parses "fd00::/32"-style prefixes into the 32-bit tag.
std::optional<std::uint32_t> parse_srv6_prefix(std::string_view text);

}  // namespace wonder
