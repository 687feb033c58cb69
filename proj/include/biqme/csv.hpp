#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biqme::csv {

// Header plus rows of a comma-separated file. Fields may be double-quoted
// with "" as an escaped quote.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
// Strict full-string numeric parse; throws ParseError naming the field.
double to_double(std::string_view field, std::size_t byte_offset = 0);

}  // namespace biqme::csv
