// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace patternscope::csv {

/// A parsed delimited file: header plus data rows. Quoted fields (RFC 4180)
/// may contain commas and doubled quotes; embedded newlines are not supported.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error reports.
  std::vector<int> lines;

  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
  /// Index of `name`; throws if absent.
  int require(std::string_view name, const std::filesystem::path& source) const;
};

std::vector<std::string> split_line(std::string_view line);
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

/// Quotes the field when it contains a comma, quote, or leading/trailing space.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace patternscope::csv
