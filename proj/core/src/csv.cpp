#include "unml/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "unml/error.hpp"

namespace unml::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw Error(Errc::invalid_input, msg.str());
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
    field = trim(field.substr(1, field.size() - 2));
  if (field.empty()) fail(line, "empty field");
  // from_chars rejects a leading '+'.
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) fail(line, "not a number: '" + std::string(field) + "'");
  if (!std::isfinite(value)) fail(line, "non-finite value");
  return value;
}

}  // namespace

std::vector<std::vector<double>> parse(std::istream& in, const ReadOptions& options) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (options.header && line_no == 1) continue;
    const auto body = trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i < body.size() && body[i] == '"') quoted = !quoted;
      if (i == body.size() || (body[i] == ',' && !quoted)) {
        row.push_back(parse_field(body.substr(start, i - start), line_no));
        start = i + 1;
      }
    }
    if (quoted) fail(line_no, "unterminated quote");
    if (!rows.empty() && row.size() != rows.front().size())
      fail(line_no, "expected " + std::to_string(rows.front().size()) + " fields, got " +
                        std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw Error(Errc::invalid_input, "read error");
  return rows;
}

Dataset read_dataset(std::istream& in, const ReadOptions& options) {
  const auto rows = parse(in, options);
  if (rows.empty()) throw Error(Errc::invalid_input, "no data rows");
  return Dataset::from_rows(rows);
}

std::vector<double> read_column(std::istream& in, const ReadOptions& options) {
  const auto rows = parse(in, options);
  if (rows.empty()) throw Error(Errc::invalid_input, "no data rows");
  if (rows.front().size() != 1) throw Error(Errc::invalid_input, "expected a single column");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.front());
  return out;
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.m(); ++j) {
      if (j) out << ',';
      out << format_double(data.rows()(i, j));
    }
    out << '\n';
  }
}

}  // namespace unml::csv
