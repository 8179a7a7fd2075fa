#include "hmflow/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hmflow/errors.hpp"

namespace hmflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

double Config::get_number(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("config: key '" + key + "' is not a number: '" + s + "'");
  }
  return v;
}

std::int64_t Config::get_integer(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("config: key '" + key + "' is not an integer: '" + s + "'");
  }
  return v;
}

Vec3 Config::get_vec3(const std::string& key) const {
  const std::string s = get_string(key);
  Vec3 v;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &v.x, &v.y, &v.z, &tail) != 3) {
    throw ConfigError("config: key '" + key + "' is not a 3-vector 'x,y,z': '" + s + "'");
  }
  return v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}
double Config::get_number(const std::string& key, double fallback) const {
  return has(key) ? get_number(key) : fallback;
}
std::int64_t Config::get_integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_integer(key) : fallback;
}
Vec3 Config::get_vec3(const std::string& key, Vec3 fallback) const {
  return has(key) ? get_vec3(key) : fallback;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

std::string Config::hash() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;  // FNV prime
    }
  };
  for (const auto& [k, v] : kv_) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hmflow
