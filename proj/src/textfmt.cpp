#include "videodna/textfmt.hpp"

#include <charconv>
#include <system_error>

#include "videodna/errors.hpp"

namespace videodna {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail(Errc::bad_format, "cannot format value");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(Errc::bad_format, "not a number: " + s);
  return v;
}

}  // namespace videodna
