#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "hmflow/smallmat.hpp"

namespace hmflow {

// Run configuration: sectioned key-value text. Keys are addressed as
// "section.key". Unknown keys are tolerated at parse time; each experiment
// validates the keys it consumes before producing any output.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  // Required accessors throw ConfigError when the key is missing/malformed.
  std::string get_string(const std::string& key) const;
  double get_number(const std::string& key) const;
  std::int64_t get_integer(const std::string& key) const;
  Vec3 get_vec3(const std::string& key) const;  // "x,y,z"

  // Defaulted accessors.
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_number(const std::string& key, double fallback) const;
  std::int64_t get_integer(const std::string& key, std::int64_t fallback) const;
  Vec3 get_vec3(const std::string& key, Vec3 fallback) const;

  void set(const std::string& key, const std::string& value);

  // FNV-1a hash of the canonicalized (sorted) key-value list, as a fixed-width
  // hex string. Identical configurations hash identically regardless of key
  // order or formatting.
  std::string hash() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace hmflow
