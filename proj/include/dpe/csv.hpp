#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace dpe {

// Shortest round-trip representation.
std::string format_double(double v);

// Minimal CSV writer: comma separated, no quoting (fields never contain commas).
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  template <typename... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((put(fields, first)), ...);
    os_ << '\n';
  }
  void row(const std::vector<std::string>& fields);

 private:
  template <typename T>
  void put(const T& v, bool& first) {
    if (!first) os_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>)
      os_ << format_double(static_cast<double>(v));
    else if constexpr (std::is_same_v<T, bool>)
      os_ << (v ? 1 : 0);
    else
      os_ << v;
  }

  std::ofstream os_;
  std::filesystem::path path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws ConfigError if absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace dpe
