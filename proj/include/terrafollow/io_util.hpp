#pragma once

#include <string>

namespace terrafollow {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Write `content` to `path` via a temp file in the same directory plus
/// rename, so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

}  // namespace terrafollow
