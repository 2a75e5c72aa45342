#pragma once

#include "simpson/tables.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace simpson {

// Parsed CSV: comma-separated, first line is the header, UTF-8, no quoting.
// Every row must match the header's field count; violations report the file
// line number (header is line 1).
struct CsvContent {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // per row
};

CsvContent read_csv(std::istream& is, const std::string& origin);

// Builds a contingency table from an analysis CSV. In records mode every
// row is one subject. In counts mode one column must be named `count` and
// holds the cell's multiplicity; the remaining columns are the variables.
// Schemas are inferred: columns in header order, states in order of first
// appearance. Columns with fewer than two observed states are rejected.
ContingencyTable table_from_csv(std::istream& is, bool counts_mode, const std::string& origin);

} // namespace simpson
