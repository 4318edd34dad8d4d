#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace hydro {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
double parse_number(const std::string& text);

/// Comma separated writer. Fields are written verbatim; callers keep
/// commas out of them. A non-empty manifest id is emitted as a leading
/// `# manifest: <id>` comment line.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path, const std::string& manifest_id = {});
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name, throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
};

/// Reads a CSV file, skipping `#` comment lines and blank lines. Every row
/// must have exactly as many fields as the header.
CsvTable read_csv(const std::string& path);

}  // namespace hydro
