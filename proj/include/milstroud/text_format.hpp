#pragma once

#include <string>
#include <string_view>

namespace milstroud {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

/// Parses a full decimal token; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

}  // namespace milstroud
