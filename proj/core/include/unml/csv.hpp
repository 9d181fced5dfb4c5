#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "unml/core_stats.hpp"

namespace unml::csv {

struct ReadOptions {
  bool header = false;  // skip the first line
};

/// RFC-4180 subset: comma separators, optional double quotes around a
/// field, LF or CRLF line ends, blank lines ignored. Every field must parse
/// completely as a decimal floating-point number.
std::vector<std::vector<double>> parse(std::istream& in, const ReadOptions& options = {});

/// Throws Errc::invalid_input on malformed input.
Dataset read_dataset(std::istream& in, const ReadOptions& options = {});

/// Single-column file as a flat vector.
std::vector<double> read_column(std::istream& in, const ReadOptions& options = {});

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

void write_dataset(std::ostream& out, const Dataset& data);

}  // namespace unml::csv
