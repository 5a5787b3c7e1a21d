#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace attndrift::csv {

// Splits one record of comma-separated text into fields. Double-quoted fields
// may contain commas and doubled quotes (""). Fields are written into `out`
// (reusing its storage). Returns false on an unterminated quote.
bool split_record(std::string_view line, std::vector<std::string>& out);

// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);
void append_field(std::string& line, std::string_view field);

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Builds a comma-joined line from already formatted cells.
std::string join(const std::vector<std::string>& cells);

}  // namespace attndrift::csv
