#include "qadapt/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "qadapt/common.hpp"

namespace qadapt {

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has(const std::string& name) const { return column(name) != std::string::npos; }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  auto line = [&os](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os << ',';
      os << csv_escape(fields[i]);
    }
    os << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw Error(ErrorKind::MalformedCsv, "text after closing quote");
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    if (c == '"') {
      if (field_started || !field.empty()) throw Error(ErrorKind::MalformedCsv, "quote inside unquoted field");
      quoted = true;
      field_started = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
    } else {
      field += c;
      field_started = true;
      ++i;
    }
  }
  if (quoted) throw Error(ErrorKind::MalformedCsv, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  if (records.empty() || (records.size() == 1 && records[0].size() == 1 && records[0][0].empty()))
    throw Error(ErrorKind::MalformedCsv, "empty input");
  CsvTable t;
  t.header = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) throw Error(ErrorKind::MalformedCsv, "ragged row " + std::to_string(r));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(std::istream& is) {
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_csv(text);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

namespace {

bool is_provenance(const std::string& name) { return name == "seed" || name == "build_id" || name == "config_hash"; }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

CsvTable emit_plot_data(const CsvTable& table) {
  if (table.header.empty() || table.rows.empty()) throw Error(ErrorKind::MalformedCsv, "nothing to reshape");
  if (table.has("mean") && table.has("std")) return table;
  if (table.header.size() == 3 && table.header[1] == "variable" && table.header[2] == "value") return table;

  std::vector<std::string> metrics;
  for (const auto& h : table.header)
    if (ends_with(h, "_mean") && table.has(h.substr(0, h.size() - 5) + "_std")) metrics.push_back(h.substr(0, h.size() - 5));

  CsvTable out;
  const std::string x = table.header[0];
  const std::size_t mode_col = table.column("mode");
  if (!metrics.empty()) {
    out.header = {x};
    if (mode_col != std::string::npos) out.header.push_back("mode");
    if (metrics.size() > 1) out.header.push_back("metric");
    out.header.push_back("mean");
    out.header.push_back("std");
    for (const auto& row : table.rows)
      for (const auto& m : metrics) {
        std::vector<std::string> r = {row[0]};
        if (mode_col != std::string::npos) r.push_back(row[mode_col]);
        if (metrics.size() > 1) r.push_back(m);
        r.push_back(row[table.column(m + "_mean")]);
        r.push_back(row[table.column(m + "_std")]);
        out.rows.push_back(std::move(r));
      }
    return out;
  }
  out.header = {x, "variable", "value"};
  for (const auto& row : table.rows)
    for (std::size_t c = 1; c < table.header.size(); ++c) {
      if (is_provenance(table.header[c])) continue;
      out.rows.push_back({row[0], table.header[c], row[c]});
    }
  return out;
}

}  // namespace qadapt
