#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qsv/analysis.hpp"

namespace qsv {

/// Count-table grid: a header row "<label>,b1,b2,b3,b4" followed by four rows
/// "a,c1,c2,c3,c4" (angles in degrees, non-negative integer counts). Angles
/// are normalized to [0, 180). Errors name the offending row and column.
CountTable parse_count_table(std::istream& in);
CountTable ingest_count_table(const std::string& path);
void write_count_table(std::ostream& out, const CountTable& table);

/// Numeric table with named columns. Integers are stored as doubles, which
/// is exact below 2^53.
struct DataTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

/// Optional "# ..." metadata line, then the header and one line per row,
/// numbers in shortest round-trip form.
void write_table(std::ostream& out, const DataTable& table, const std::string& metadata = "");
/// Inverse of write_table; `metadata` receives the text after "# " if present.
DataTable read_table(std::istream& in, std::string* metadata = nullptr);

}  // namespace qsv
