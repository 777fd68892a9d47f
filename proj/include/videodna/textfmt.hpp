#pragma once

#include <string>

namespace videodna {

// Shortest decimal form that parses back to the same value; used by every
// text format so round-trips are byte-exact.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace videodna
