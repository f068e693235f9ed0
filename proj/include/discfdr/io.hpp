#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "discfdr/exact_tests.hpp"

namespace discfdr {

// One parsed line of the tab-separated count table.
struct CountRow {
  std::string id;
  CountPair counts;
};

// Reads `id  x1  x2  n1  n2` tab-separated rows after a mandatory header
// with exactly those column names. Throws input_error naming the offending
// line for malformed fields, count violations, or duplicate identifiers.
// Blank lines are skipped; trailing carriage returns are tolerated.
std::vector<CountRow> read_count_table(std::istream& in);
std::vector<CountRow> read_count_file(const std::string& path);

// Report formatting. fmt_sig is the diffable default (6 significant digits);
// fmt_exact emits the shortest decimal that parses back to the identical
// double, for values that must survive a round trip through text.
std::string fmt_sig(double x);
std::string fmt_exact(double x);

// CSV field escaping: wraps in quotes (doubling embedded quotes) only when
// the field contains a delimiter, quote, or newline.
std::string csv_escape(const std::string& field);

}  // namespace discfdr
