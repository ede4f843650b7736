#include "nvdit/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nvdit {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << "\n";
}

std::string CsvWriter::num(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::runtime_error("csv: column count mismatch");
  for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
  out_ << "\n";
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  if (values.size() != columns_) throw std::runtime_error("csv: column count mismatch");
  for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
  out_ << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

} // namespace nvdit
