#include "output.hpp"

#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dualprobe::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::filesystem::path path(dir.empty() ? "." : dir);
  std::filesystem::create_directories(path);
  return path;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("CsvWriter: row width does not match the header");
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_number(values[k]);
  out_ << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  std::size_t width = 1;
  for (char c : line) width += c == ',';
  std::vector<std::vector<double>> columns(width);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t column = 0, start = 0;
    while (start <= line.size()) {
      const auto end = std::min(line.find(',', start), line.size());
      if (column >= width) throw ConfigError(path + ": line " + std::to_string(line_no) + ": too many fields");
      const std::string cell = line.substr(start, end - start);
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        columns[column].push_back(v);
      } catch (const std::exception&) {
        throw ConfigError(path + ": line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
      }
      ++column;
      start = end + 1;
    }
    if (column != width)
      throw ConfigError(path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " fields");
  }
  return columns;
}

}  // namespace dualprobe::cli
