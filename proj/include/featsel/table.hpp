#pragma once

#include <string>
#include <vector>

namespace featsel {

// Rectangular string table rendered to CSV or Markdown. Callers pre-format
// numeric cells (format_double) so both renderings stay byte-deterministic.
struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

/// Fixed-point formatting, 4 decimals by default (report convention).
std::string format_double(double v, int decimals = 4);

std::string to_markdown(const ReportTable& table);
std::string to_csv(const ReportTable& table);

/// Lowercase title with non-alphanumerics collapsed to '_'; used for file names.
std::string slugify(const std::string& title);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace featsel
