#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace bliss {

/// Flat `key = value` text configuration.
///
/// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
/// Keys are conventionally dotted (`sensor.full_well`). Every typed getter
/// marks its key as consumed so that `check_all_consumed` can reject keys
/// nobody asked for, naming the first unknown key.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<text>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  [[nodiscard]] bool has(const std::string& key) const;

  [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] long long get_int(const std::string& key, long long fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming the first key that no getter consumed.
  void check_all_consumed() const;

  /// Keys that start with `prefix`, in sorted order.
  [[nodiscard]] std::set<std::string> keys_with_prefix(const std::string& prefix) const;

  [[nodiscard]] const std::map<std::string, std::string>& entries() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string origin_ = "<text>";
};

}  // namespace bliss
