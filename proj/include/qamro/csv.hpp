#pragma once

#include <string>

namespace qamro {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Quotes a field when it contains a delimiter, quote, or newline.
std::string csv_field(const std::string& s);

}  // namespace qamro
