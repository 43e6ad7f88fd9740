#pragma once

#include <string>
#include <vector>

namespace spe {

/// Shortest round-trip decimal form of a double (17 significant digits max).
std::string format_double(double v);

/// Write content to path atomically (write to a sibling temp file, then rename).
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

/// Split one CSV line on commas; no quoting (none of our formats need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace spe
