#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "modcop/copula.hpp"
#include "modcop/errors.hpp"
#include "modcop/generator_parse.hpp"
#include "modcop/numerics.hpp"
#include "modcop/pathology.hpp"
#include "modcop/stats.hpp"
#include "modcop/verify.hpp"

namespace modcop::cli {

namespace {

std::vector<int> parse_signs(const std::string& bits) {
  std::vector<int> out;
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw ParseError("signs: expected a string of 0 and 1, got '" + bits + "'");
    out.push_back(ch - '0');
  }
  return out;
}

int resolve_dimension(const RunConfig& c) {
  const auto signs = parse_signs(c.signs);
  const int d = c.dimension.value_or(signs.empty() ? 2 : static_cast<int>(signs.size()));
  if (d < 2) throw ParseError("dim: must be at least 2, got " + std::to_string(d));
  if (!signs.empty() && static_cast<int>(signs.size()) != d) {
    throw ParseError("signs: length " + std::to_string(signs.size()) + " does not match dim " + std::to_string(d));
  }
  return d;
}

CopulaModel build_model(const RunConfig& c) {
  const int d = resolve_dimension(c);
  const std::string spec = c.generators.empty() ? "uniform" : c.generators.front();
  return CopulaModel(d, parse_generator(spec), parse_signs(c.signs));
}

Generator single_generator(const RunConfig& c) {
  return parse_generator(c.generators.empty() ? "uniform" : c.generators.front());
}

// Fixed six decimals; negative zero prints as zero.
std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string rational_text(const Rational& q) { return std::to_string(q.num) + "/" + std::to_string(q.den); }

}  // namespace

std::pair<double, double> parse_interval(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ParseError("interval: expected 'a,b', got '" + text + "'");
  double a = 0.0, b = 0.0;
  try {
    a = parse_real(text.substr(0, comma));
    b = parse_real(text.substr(comma + 1));
  } catch (const std::exception&) {
    throw ParseError("interval: expected 'a,b', got '" + text + "'");
  }
  if (!(0.0 <= a && a < b && b <= 1.0)) throw ParseError("interval: need 0 <= a < b <= 1, got '" + text + "'");
  return {a, b};
}

int cmd_sample(const RunConfig& c, std::ostream& out) {
  const CopulaModel m = build_model(c);
  const std::size_t n = c.n.value_or(1000);
  if (n == 0) throw ParseError("n: must be at least 1");
  const SampleMatrix s = sample_copula(m, n, c.seed.value_or(0));
  std::vector<std::string> header;
  for (int j = 1; j <= m.dimension(); ++j) header.push_back("u" + std::to_string(j));
  write_header(out, header);
  for (std::size_t r = 0; r < s.rows; ++r) write_row(out, s.row(r));
  return kOk;
}

int cmd_density_grid(const RunConfig& c, std::ostream& out) {
  const CopulaModel m = build_model(c);
  if (m.dimension() != 2) throw ParseError("density-grid: grid output is bivariate, got dim " + std::to_string(m.dimension()));
  const int res = c.resolution.value_or(101);
  if (res < 2) throw ParseError("resolution: must be at least 2, got " + std::to_string(res));
  const double steps = res - 1;
  const int s1 = m.signs()[0] ? -1 : 1;
  const int s2 = m.signs()[1] ? -1 : 1;
  write_header(out, {"u1", "u2", "density"});
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      // The lattice sum is the rational (s1 i + s2 j)/(res - 1); carry it
      // as quotient plus exact remainder so lattice hyperplanes are hit exactly.
      const double num = s1 * i + s2 * j;
      const double q = num / steps;
      const double rem = std::fma(-q, steps, num) / steps;
      const double row[3] = {i / steps, j / steps, density_from_sum(m, SplitReal{q, rem})};
      write_row(out, row);
    }
  }
  return kOk;
}

int cmd_generator_plot(const RunConfig& c, std::ostream& out) {
  const Generator g = single_generator(c);
  const int res = c.resolution.value_or(1000);
  if (res < 2) throw ParseError("resolution: must be at least 2, got " + std::to_string(res));
  write_header(out, {"x", "f(x)"});
  for (int i = 0; i < res; ++i) {
    const double x = (i + 0.5) / res;
    const double row[2] = {x, g.density(x)};
    write_row(out, row);
  }
  return kOk;
}

int cmd_rho(const RunConfig& c, std::ostream& out) {
  const CopulaModel m = build_model(c);
  if (m.dimension() != 2) throw ParseError("rho: Spearman's rho is bivariate, got dim " + std::to_string(m.dimension()));
  const double closed = spearman_rho_closed_form(m.generator(), c.tolerance);
  const SampleMatrix s = sample_copula(m, c.n.value_or(100000), c.seed.value_or(0));
  const double sample = spearman_rho_sample(s, 0, 1).value;
  out << "closed " << fixed6(closed) << '\n';
  out << "sample " << fixed6(sample) << '\n';
  out << "gap " << fixed6(sample - closed) << '\n';
  return kOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  VerifyOptions o;
  o.generators = c.generators;
  const auto signs = parse_signs(c.signs);
  if (c.dimension || !signs.empty()) o.dimensions = {resolve_dimension(c)};
  o.signs = signs;
  o.checks = c.checks;
  o.inject = c.inject;
  if (c.n) o.samples = *c.n;
  if (c.seed) o.seed = *c.seed;
  o.tolerance = c.tolerance;
  o.on_result = [&out](const CheckOutcome& r) {
    out << (r.passed ? "PASS " : "FAIL ") << r.check << ' ' << r.generator << ' '
        << (r.dimension > 0 ? "d=" + std::to_string(r.dimension) : std::string("d=-")) << ' ' << r.detail << '\n';
    out.flush();
  };
  const VerifyReport report = run_verification(o);
  const auto failed = report.failed_checks();
  out << "verify: " << report.outcomes.size() << " outcomes, " << failed.size() << " failing checks";
  for (const auto& f : failed) out << ' ' << f;
  out << '\n';
  return failed.empty() ? kOk : kFailed;
}

int cmd_probe(const RunConfig& c, std::ostream& out) {
  const int d = c.dimension.value_or(2);
  if (d < 2) throw ParseError("dim: must be at least 2, got " + std::to_string(d));
  if (!(c.threshold > 0.0) || !std::isfinite(c.threshold)) throw ParseError("threshold: must be a positive number");
  const ProbeOptions opts;
  const UnboundednessWitness w = unboundedness_probe(c.interval_lo, c.interval_hi, c.threshold, opts);
  const PartialSum sum(w.terms, opts.mode, opts.scheme);
  const CopulaModel m(d, sum.generator());
  const auto u = witness_copula_point(w, d);
  const double cu = density(m, u);
  out << "generator " << sum.id() << '\n';
  out << "terms " << w.terms << '\n';
  out << "q " << rational_text(w.q) << '\n';
  out << "singular_point " << format_real(w.singular_point) << '\n';
  out << "offset " << format_real(w.offset) << '\n';
  out << "x " << format_real(w.x) << '\n';
  out << "value " << format_real(w.value) << '\n';
  out << "iterations " << w.iterations << '\n';
  out << "copula_point ";
  for (std::size_t k = 0; k < u.size(); ++k) out << (k ? "," : "") << format_real(u[k]);
  out << '\n';
  out << "copula_density " << format_real(cu) << '\n';
  return (std::isfinite(cu) && cu > c.threshold) ? kOk : kFailed;
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  std::ostream* target = &out;
  const bool to_file = !config.out.empty() && config.out != "-";
  if (to_file) {
    file.open(config.out, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot open '" << config.out << "' for writing\n";
      return kIo;
    }
    target = &file;
  }
  int code = kOk;
  try {
    if (config.command == "sample") {
      code = cmd_sample(config, *target);
    } else if (config.command == "density-grid") {
      code = cmd_density_grid(config, *target);
    } else if (config.command == "generator-plot") {
      code = cmd_generator_plot(config, *target);
    } else if (config.command == "rho") {
      code = cmd_rho(config, *target);
    } else if (config.command == "verify") {
      code = cmd_verify(config, *target);
    } else if (config.command == "probe") {
      code = cmd_probe(config, *target);
    } else {
      err << "error: unknown command '" << config.command << "'\n";
      return kUsage;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedDimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  target->flush();
  if (to_file) {
    file.close();
    if (!file) {
      err << "error: failed writing '" << config.out << "'\n";
      return kIo;
    }
  } else if (!*target) {
    return kIo;
  }
  return code;
}

}  // namespace modcop::cli
