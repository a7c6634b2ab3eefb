#include "modcop/generator_parse.hpp"

#include <charconv>
#include <cstdint>
#include <vector>

#include "modcop/errors.hpp"
#include "modcop/pathology.hpp"

namespace modcop {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view field, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw ParseError(what + ": expected a number, got '" + std::string(field) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view field, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw ParseError(what + ": expected a non-negative integer, got '" + std::string(field) + "'");
  }
  return v;
}

void expect_arity(const std::vector<std::string_view>& args, std::size_t lo, std::size_t hi, const std::string& kind) {
  if (args.size() < lo || args.size() > hi) {
    throw ParseError(kind + ": wrong number of parameters");
  }
}

Generator parse_pathology(const std::vector<std::string_view>& args) {
  expect_arity(args, 1, 4, "pathology");
  const auto terms = parse_count(args[0], "pathology terms");
  if (terms == 0) throw ParseError("pathology terms: must be at least 1");
  EnumerationMode mode = EnumerationMode::evenly_spaced;
  if (args.size() > 1) {
    auto parsed = parse_enumeration_mode(std::string(args[1]));
    if (!parsed) throw ParseError("pathology mode: expected 'evenly' or 'diagonal', got '" + std::string(args[1]) + "'");
    mode = *parsed;
  }
  std::uint64_t seed = 42;
  if (args.size() > 3) seed = parse_count(args[3], "pathology seed");
  WeightScheme scheme = WeightScheme::geometric(1.1, seed);
  if (args.size() > 2) {
    const std::string_view s = args[2];
    if (s == "zeta") {
      scheme = WeightScheme::zeta();
    } else if (s == "dyadic") {
      scheme = WeightScheme::dyadic();
    } else if (s.starts_with("geom")) {
      const double ratio = parse_real(s.substr(4), "pathology scheme ratio");
      if (!(ratio > 1.0)) throw ParseError("pathology scheme ratio: must exceed 1");
      scheme = WeightScheme::geometric(ratio, seed);
    } else {
      throw ParseError("pathology scheme: expected 'zeta', 'dyadic' or 'geomR', got '" + std::string(s) + "'");
    }
  }
  return partial_sum_generator(terms, mode, scheme).generator();
}

Generator parse_pair(const std::vector<std::string_view>& args) {
  expect_arity(args, 1, 1, "pair");
  const std::string_view field = args[0];
  if (const auto slash = field.find('/'); slash != std::string_view::npos) {
    const auto num = parse_count(field.substr(0, slash), "pair numerator");
    const auto den = parse_count(field.substr(slash + 1), "pair denominator");
    if (num == 0 || num >= den) throw ParseError("pair q: must lie in (0, 1)");
    return singular_pair(Rational{num, den});
  }
  const double q = parse_real(field, "pair q");
  if (!(q > 0.0 && q < 1.0)) throw ParseError("pair q: must lie in (0, 1)");
  return singular_pair(q);
}

}  // namespace

Generator parse_generator(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  std::vector<std::string_view> args;
  if (colon != std::string_view::npos) args = split(text.substr(colon + 1), ',');

  try {
    if (kind == "uniform") {
      expect_arity(args, 0, 0, "uniform");
      return uniform_generator();
    }
    if (kind == "triangular") {
      expect_arity(args, 0, 0, "triangular");
      return triangular_generator();
    }
    if (kind == "piecewise") {
      expect_arity(args, 1, 1, "piecewise");
      const auto n = parse_count(args[0], "piecewise n");
      if (n == 0) throw ParseError("piecewise n: must be at least 1");
      return piecewise_generator(n);
    }
    if (kind == "beta") {
      expect_arity(args, 2, 2, "beta");
      const double alpha = parse_real(args[0], "beta alpha");
      const double beta = parse_real(args[1], "beta beta");
      if (!(alpha > 0.0)) throw ParseError("beta alpha: must be > 0, got " + std::string(args[0]));
      if (!(beta > 0.0)) throw ParseError("beta beta: must be > 0, got " + std::string(args[1]));
      return beta_generator({alpha, beta});
    }
    if (kind == "pathology") return parse_pathology(args);
    if (kind == "pair") return parse_pair(args);
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  throw ParseError("unknown generator '" + std::string(kind) +
                   "' (expected uniform, piecewise:N, triangular, beta:A,B, pair:Q or pathology:N,...)");
}

}  // namespace modcop
