#include "bvpdisc_app/format.hpp"

#include <cstdio>
#include <fstream>

#include "bvpdisc/error.hpp"

namespace bvpdisc::app {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidArgument("write to '" + path.string() + "' failed");
}

void write_columns(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw InvalidArgument("write_columns: name/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw InvalidArgument("write_columns: ragged columns");
  }
  std::string text;
  for (std::size_t i = 0; i < names.size(); ++i) text += (i ? "," : "") + names[i];
  text += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) text += ',';
      text += format_double(columns[i][r]);
    }
    text += '\n';
  }
  write_text(path, text);
}

}  // namespace bvpdisc::app
