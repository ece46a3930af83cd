#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace qadapt {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;  // npos when absent
  bool has(const std::string& name) const;
};

// RFC-4180 quoting: fields containing a comma, quote, CR or LF are quoted
// and embedded quotes doubled. Records end with LF.
std::string csv_escape(const std::string& field);
void write_csv(std::ostream& os, const CsvTable& table);
std::string to_csv(const CsvTable& table);
// Throws MalformedCsv on empty input, unterminated quotes or ragged rows.
CsvTable read_csv(std::istream& is);
CsvTable parse_csv(const std::string& text);

// Long-format reshaping for external plotters.
//  - tables with mean and std columns are already long and returned as is;
//  - tables with X_mean / X_std pairs give (x, [mode,] [metric,] mean, std);
//  - other tables are melted to (x, variable, value).
// The x column is the first column. Provenance columns (seed, build_id,
// config_hash) are dropped. Throws MalformedCsv on an empty table.
CsvTable emit_plot_data(const CsvTable& table);

std::string format_double(double v);

}  // namespace qadapt
