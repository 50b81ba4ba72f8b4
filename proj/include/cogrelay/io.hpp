#pragma once

#include <string>
#include <vector>

namespace cogrelay {

// Writes content to path via a temp file in the same directory plus an
// atomic rename, so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

// Shortest decimal form with 6 significant digits (printf %g).
std::string format_g6(double v);

std::string read_text_file(const std::string& path);

// Minimal CSV reading for our own artifacts: no quoting, comma-separated.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace cogrelay
