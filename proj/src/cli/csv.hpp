#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace modcop::cli {

/// 17 significant digits, so the text parses back to the same double.
/// Infinities are written as inf / -inf.
std::string format_real(double v);

/// Parses the output of format_real.
double parse_real(const std::string& text);

void write_row(std::ostream& out, std::span<const double> values);
void write_header(std::ostream& out, const std::vector<std::string>& names);

}  // namespace modcop::cli
