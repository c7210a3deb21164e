#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace terrafollow {

/// Line-oriented `key = value` text with `#` comments. Used by scenario
/// specs, pipeline configs, and report headers. Keys are tracked so a
/// caller can reject anything it did not consume.
class KvMap {
 public:
  static KvMap parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key, double fallback);
  long get_long(const std::string& key, long fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);

  /// Throws listing every key never consumed by a getter.
  void reject_unknown() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string raw(const std::string& key);

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, long> lines_;
  std::set<std::string> consumed_;
};

struct KvWriter {
  std::string text;

  void comment(const std::string& c) { text += "# " + c + "\n"; }
  void blank() { text += "\n"; }
  void put(const std::string& key, double v);
  void put(const std::string& key, long v);
  void put(const std::string& key, std::uint64_t v);
  void put(const std::string& key, bool v);
  void put(const std::string& key, const std::string& v);
};

}  // namespace terrafollow
