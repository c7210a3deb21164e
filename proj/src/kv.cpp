#include "terrafollow/kv.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "terrafollow/geometry.hpp"
#include "terrafollow/io_util.hpp"

namespace terrafollow {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvMap KvMap::parse(const std::string& text, const std::string& origin) {
  KvMap kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw MalformedRecord(origin, line_no, "expected `key = value`");
    }
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) throw MalformedRecord(origin, line_no, "empty key");
    if (kv.values_.count(key)) {
      throw MalformedRecord(origin, line_no, "duplicate key `" + key + "`");
    }
    kv.values_[key] = val;
    kv.lines_[key] = line_no;
  }
  return kv;
}

std::string KvMap::raw(const std::string& key) {
  consumed_.insert(key);
  return values_.at(key);
}

double KvMap::get_double(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw MalformedRecord(origin_, lines_[key], "key `" + key + "`: not a number: " + v);
  }
  return d;
}

long KvMap::get_long(const std::string& key, long fallback) {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  char* end = nullptr;
  long l = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw MalformedRecord(origin_, lines_[key], "key `" + key + "`: not an integer: " + v);
  }
  return l;
}

std::uint64_t KvMap::get_u64(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  char* end = nullptr;
  std::uint64_t u = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw MalformedRecord(origin_, lines_[key], "key `" + key + "`: not an integer: " + v);
  }
  return u;
}

bool KvMap::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw MalformedRecord(origin_, lines_[key], "key `" + key + "`: expected true/false: " + v);
}

std::string KvMap::get_string(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return raw(key);
}

void KvMap::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw std::runtime_error(origin_ + ": unknown key(s): " + unknown);
  }
}

void KvWriter::put(const std::string& key, double v) {
  text += key + " = " + format_double(v) + "\n";
}
void KvWriter::put(const std::string& key, long v) {
  text += key + " = " + std::to_string(v) + "\n";
}
void KvWriter::put(const std::string& key, std::uint64_t v) {
  text += key + " = " + std::to_string(v) + "\n";
}
void KvWriter::put(const std::string& key, bool v) {
  text += key + " = " + (v ? std::string("true") : std::string("false")) + "\n";
}
void KvWriter::put(const std::string& key, const std::string& v) {
  text += key + " = " + v + "\n";
}

}  // namespace terrafollow
