#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bvpdisc::app {

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

// Header row plus one row per entry; every column must have the same length.
void write_columns(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);

}  // namespace bvpdisc::app
