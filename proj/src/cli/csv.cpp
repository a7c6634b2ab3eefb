#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace modcop::cli {

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& text) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: " + text);
  }
  return v;
}

void write_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << format_real(values[k]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& names) {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k) out << ',';
    out << names[k];
  }
  out << '\n';
}

}  // namespace modcop::cli
