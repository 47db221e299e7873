#pragma once

// Number formatting and small text-parsing helpers used by every file format.
// Doubles are written in shortest round-trip form (std::to_chars), so output
// is byte-identical for identical values and reads back losslessly.

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ompcs/types.hpp"

namespace ompcs::text {

std::string format_double(double value);

/// "re+imj" / "re-imj", e.g. "0.5-0.25j".
std::string format_complex(cplx value);

double parse_double(std::string_view token);
std::uint64_t parse_u64(std::string_view token);
cplx parse_complex(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Lines of `key=value`; blank lines and `#` comments are skipped.
/// Duplicate keys keep the last value.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Reads the next line that is neither blank nor a `#` comment.
bool next_data_line(std::istream& in, std::string& line);

}  // namespace ompcs::text
