#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace nvdit {

// Deterministic CSV writer: fixed significant digits, '.' decimal point,
// byte-identical output for identical inputs.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);
  static std::string num(double v, int digits = 12);

 private:
  std::ofstream out_;
  size_t columns_;
};

void write_text_file(const std::string& path, const std::string& content);

} // namespace nvdit
