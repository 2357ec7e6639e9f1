// output.hpp - plot-ready CSV and JSON files. Numbers use 12 significant
// digits, '.' as decimal separator and LF line endings on every platform.

#pragma once

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace dualprobe::cli {

std::string format_number(double x);

/// Creates the directory (and parents) if needed.
std::filesystem::path prepare_output_dir(const std::string& dir);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

/// Two-column-or-more numeric CSV with a header line. Returns the columns.
std::vector<std::vector<double>> read_csv_columns(const std::string& path);

}  // namespace dualprobe::cli
