// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mlblue::cli {

/// Shortest round-trip-safe representation (17 significant digits).
[[nodiscard]] std::string format_number(double x);

/// Comma-separated output with a fixed header; rows must match its width.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);
  [[nodiscard]] std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

using CsvTable = std::vector<std::vector<std::string>>;

/// Reads a file written by CsvWriter (no quoting), header included.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mlblue::cli
