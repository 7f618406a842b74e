#include "wgf/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wgf {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  throw std::invalid_argument("csv: no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return parse_number(rows.at(row).at(column(name)));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("csv: not a number: '" + s + "'");
  return x;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_csv(const CsvTable& table) {
  if (table.header.empty()) throw std::invalid_argument("csv: empty header");
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    if (cells.size() != table.header.size()) throw std::invalid_argument("csv: ragged row");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].find_first_of(",\n\"") != std::string::npos)
        throw std::invalid_argument("csv: cell needs quoting: '" + cells[c] + "'");
      if (c) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find('"') != std::string::npos) throw std::invalid_argument("csv: quoted cells are not supported");
    if (first) {
      if (line.empty()) throw std::invalid_argument("csv: empty header");
      t.header = split(line);
      first = false;
      continue;
    }
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (first) throw std::invalid_argument("csv: missing header");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  const std::string text = to_csv(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void require_schema(const CsvTable& table, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c >= table.header.size()) throw std::invalid_argument("csv: missing column '" + header[c] + "'");
    if (table.header[c] != header[c])
      throw std::invalid_argument("csv: column " + std::to_string(c) + " is '" + table.header[c] +
                                  "', expected '" + header[c] + "'");
  }
  if (table.header.size() != header.size())
    throw std::invalid_argument("csv: unexpected column '" + table.header[header.size()] + "'");
}

}  // namespace wgf
