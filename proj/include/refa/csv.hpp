#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace refa::csv {

using Row = std::vector<std::string>;

// RFC 4180 style: quoted fields may hold commas, doubled quotes and newlines.
// Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

std::string escape_field(std::string_view field);
std::string format_row(const Row& row);

}  // namespace refa::csv
