// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 PatternScope Contributors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "patternscope/analytics.hpp"
#include "patternscope/corpus.hpp"
#include "patternscope/image.hpp"
#include "patternscope/stats.hpp"

namespace patternscope {

/// 0.134 -> "13.4%"
std::string format_percent(double fraction);
/// Same without the sign: "13.4".
std::string format_percent_value(double fraction);

// Analysis tables --------------------------------------------------------------

/// group_usage.csv, box_plots.csv, bucket_curves.csv, correlations.csv,
/// category_usage.csv and summary.json. Throws DataError when there is
/// nothing to write.
void write_analysis(const std::filesystem::path& dir, const AnalysisResults& results);

// Charts -------------------------------------------------------------------------

struct BarGroup {
  std::string label;
  std::vector<double> values;  // fractions, one per series
};

/// Grouped bars; every bar is labeled with its percentage.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& series,
                          const std::vector<BarGroup>& groups);

struct BoxEntry {
  std::string label;
  FiveNumberSummary summary;
};
std::string box_plot_svg(const std::string& title, const std::vector<BoxEntry>& boxes, bool log_scale);

/// Polyline through (bucket, fraction) for buckets 1..n, y axis 0..1.
std::string line_chart_svg(const std::string& title, const std::vector<double>& fractions);

struct ContactSheet {
  Image8 image;
  int thumbnails = 0;
  int cols = 0;
  int rows = 0;
};

/// Thumbnails resized to fit `thumb` x `thumb` cells, laid out row-major.
ContactSheet contact_sheet(const std::vector<Image8>& crops, int thumb = 64, int max_cols = 8);

// Report stage ---------------------------------------------------------------------

struct ReportInputs {
  std::filesystem::path analysis_dir;
  std::filesystem::path heatmap_dir;
  std::filesystem::path crop_dir;
  std::filesystem::path verify_dir;
  std::vector<AppRecord> apps;  // for app categories
};

/// Charts from the analysis CSVs, heatmap images, and per-kind per-category
/// contact sheets of verified-positive crops. Throws DataError on empty input.
std::vector<std::string> render_reports(const ReportInputs& in, const std::filesystem::path& out);

}  // namespace patternscope
