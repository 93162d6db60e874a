#ifndef NKLON_CSVIO_HPP
#define NKLON_CSVIO_HPP

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

namespace nklon {

// Shortest round-trip decimal form; stable across runs, parses back to
// the identical double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Fixed 17 significant digits, used where a column width contract
// exists (LON edge lists).
inline std::string fmt_double_17(double v) {
  char buf[40];
  int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

// Minimal CSV table: comma-separated, first row is the header, no
// quoting (none of the writers in this project emit commas in fields).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

CsvTable read_csv(const std::string& path);

}  // namespace nklon

#endif
