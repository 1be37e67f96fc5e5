#include "qsv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qsv/format.hpp"
#include "qsv/types.hpp"

namespace qsv {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

bool blank(const std::string& line) { return trim(line).empty(); }

double normalize_angle(double degrees) {
  double a = std::fmod(degrees, 180.0);
  if (a < 0) a += 180.0;
  return a == 180.0 ? 0.0 : a;
}

}  // namespace

CountTable parse_count_table(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!blank(line) && trim(line)[0] != '#') lines.push_back(line);
  if (lines.empty()) throw ValidationError("count table: empty file");

  const auto header = split(lines[0]);
  if (header.size() != 5)
    throw ValidationError("count table: header row must have 5 cells, found " + std::to_string(header.size()));
  if (lines.size() == 1) throw ValidationError("count table: missing data rows");
  if (lines.size() != 5)
    throw ValidationError("count table: expected 4 data rows, found " + std::to_string(lines.size() - 1));

  CountTable table;
  const auto angle = [](const std::string& cell, const std::string& where) {
    if (cell.empty()) throw ValidationError("count table: blank angle at " + where);
    try {
      const double a = parse_double(cell);
      if (!std::isfinite(a)) throw std::invalid_argument("");
      return normalize_angle(a);
    } catch (const std::invalid_argument&) {
      throw ValidationError("count table: bad angle '" + cell + "' at " + where);
    }
  };
  for (int c = 0; c < 4; ++c)
    table.column_angles[c] = angle(header[c + 1], "header row, column " + std::to_string(c + 2));

  for (int r = 0; r < 4; ++r) {
    const auto cells = split(lines[r + 1]);
    const std::string row = "row " + std::to_string(r + 2);
    if (cells.size() != 5)
      throw ValidationError("count table: " + row + " must have 5 cells, found " + std::to_string(cells.size()));
    table.row_angles[r] = angle(cells[0], row + ", column 1");
    for (int c = 0; c < 4; ++c) {
      const std::string& cell = cells[c + 1];
      const std::string where = row + " (angle " + cells[0] + "), column " + std::to_string(c + 2) + " (angle " +
                                header[c + 1] + ")";
      if (cell.empty()) throw ValidationError("count table: blank cell at " + where);
      std::int64_t value = 0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || end != cell.data() + cell.size())
        throw ValidationError("count table: malformed cell '" + cell + "' at " + where);
      if (value < 0) throw ValidationError("count table: negative count " + cell + " at " + where);
      table.counts[r][c] = value;
    }
  }
  return table;
}

CountTable ingest_count_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("count table: cannot open '" + path + "'");
  return parse_count_table(in);
}

void write_count_table(std::ostream& out, const CountTable& table) {
  out << "angle";
  for (double b : table.column_angles) out << ',' << format_double(b);
  out << '\n';
  for (int r = 0; r < 4; ++r) {
    out << format_double(table.row_angles[r]);
    for (int c = 0; c < 4; ++c) out << ',' << table.counts[r][c];
    out << '\n';
  }
}

std::size_t DataTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

void write_table(std::ostream& out, const DataTable& table, const std::string& metadata) {
  if (!metadata.empty()) out << "# " << metadata << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw ValidationError("table row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

DataTable read_table(std::istream& in, std::string* metadata) {
  DataTable table;
  std::string line;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header && line.rfind("# ", 0) == 0) {
      if (metadata) *metadata = line.substr(2);
      continue;
    }
    const auto cells = split(line);
    if (!header) {
      table.columns = cells;
      header = true;
      continue;
    }
    if (cells.size() != table.columns.size())
      throw ValidationError("table line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.columns.size()) + " cells");
    std::vector<double> row;
    for (const auto& cell : cells) {
      try {
        row.push_back(parse_double(cell));
      } catch (const std::invalid_argument&) {
        throw ValidationError("table line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!header) throw ValidationError("table: missing header");
  return table;
}

}  // namespace qsv
