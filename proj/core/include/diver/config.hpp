#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace diver {

/// Flat key=value configuration text; '#' starts a comment, blank lines are
/// ignored, whitespace around keys and values is trimmed.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace diver
