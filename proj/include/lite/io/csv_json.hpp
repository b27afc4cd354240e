#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace lite::io {

using Json = nlohmann::ordered_json;

// Small in-memory CSV table. Cells containing commas, quotes or newlines are
// quoted on output.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string to_string() const;
  void write(const std::string& path) const;
  static CsvTable parse(std::string_view text);
  static CsvTable read(const std::string& path);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(std::string_view cell);
// Shortest decimal that round-trips the value.
std::string fmt(double v);

void write_text(const std::string& path, std::string_view text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const Json& doc);
Json read_json(const std::string& path);

}  // namespace lite::io
