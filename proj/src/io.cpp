#include "discfdr/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_set>

#include "discfdr/errors.hpp"

namespace discfdr {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int parse_count(const std::string& field, const char* name, std::size_t lineno) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty())
    throw input_error("line " + std::to_string(lineno) + ": field '" +
                      std::string(name) + "' is not an integer: '" + field +
                      "'");
  if (value < 0)
    throw input_error("line " + std::to_string(lineno) + ": field '" +
                      std::string(name) + "' is negative");
  return value;
}

}  // namespace

std::vector<CountRow> read_count_table(std::istream& in) {
  static const std::vector<std::string> kHeader = {"id", "x1", "x2", "n1",
                                                   "n2"};
  std::vector<CountRow> rows;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (!have_header) {
      if (fields != kHeader)
        throw input_error(
            "line " + std::to_string(lineno) +
            ": expected header 'id\tx1\tx2\tn1\tn2'");
      have_header = true;
      continue;
    }
    if (fields.size() != 5)
      throw input_error("line " + std::to_string(lineno) + ": expected 5 " +
                        "tab-separated fields, got " +
                        std::to_string(fields.size()));
    CountRow row;
    row.id = fields[0];
    if (row.id.empty())
      throw input_error("line " + std::to_string(lineno) + ": empty id");
    if (!seen.insert(row.id).second)
      throw input_error("line " + std::to_string(lineno) + ": duplicate id '" +
                        row.id + "'");
    row.counts.x1 = parse_count(fields[1], "x1", lineno);
    row.counts.x2 = parse_count(fields[2], "x2", lineno);
    row.counts.n1 = parse_count(fields[3], "n1", lineno);
    row.counts.n2 = parse_count(fields[4], "n2", lineno);
    try {
      validate(row.counts);
    } catch (const input_error& e) {
      throw input_error("line " + std::to_string(lineno) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw input_error("missing header line");
  return rows;
}

std::vector<CountRow> read_count_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open input file '" + path + "'");
  return read_count_table(in);
}

std::string fmt_sig(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string fmt_exact(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\";\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace discfdr
