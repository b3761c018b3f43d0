#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dflow {

/// Shortest decimal that round-trips through binary64; "inf" for infinity.
std::string format_number(double value);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

std::string csv_row(const std::vector<std::string>& fields);

/// Splits one CSV line into fields, honouring double quotes.
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace dflow
