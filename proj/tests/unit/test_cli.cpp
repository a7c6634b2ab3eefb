#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "csv.hpp"
#include "doctest.h"
#include "modcop/stats.hpp"

using namespace modcop::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(RunConfig c) {
  std::ostringstream out, err;
  const int code = run_command(c, out, err);
  return {code, out.str(), err.str()};
}

RunConfig config(const std::string& command, const std::string& gen) {
  RunConfig c;
  c.command = command;
  c.generators = {gen};
  return c;
}

// Rows of a CSV body (header dropped), parsed to doubles.
std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) row.push_back(parse_real(f));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("real formatting round trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const double x = dist(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    CHECK(parse_real(format_real(x)) == x);
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(format_real(inf) == "inf");
  CHECK(format_real(-inf) == "-inf");
  CHECK(parse_real("inf") == inf);
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK_THROWS(parse_real("abc"));
}

TEST_CASE("sample writes a deterministic CSV") {
  auto c = config("sample", "beta:1.5,1.5");
  c.dimension = 2;
  c.n = 1000;
  c.seed = 7;
  const auto a = run(c), b = run(c);
  CHECK(a.code == kOk);
  CHECK(a.out == b.out);
  CHECK(first_line(a.out) == "u1,u2");
  const auto rows = parse_csv(a.out);
  REQUIRE(rows.size() == 1000);
  std::vector<double> col(rows.size());
  for (int j = 0; j < 2; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][j];
    CHECK(modcop::ks_uniformity(col).p_value > 0.001);
  }
  c.seed = 8;
  CHECK(run(c).out != a.out);
}

TEST_CASE("density grid") {
  auto c = config("density-grid", "uniform");
  c.dimension = 2;
  c.resolution = 11;
  auto r = run(c);
  REQUIRE(r.code == kOk);
  CHECK(first_line(r.out) == "u1,u2,density");
  auto rows = parse_csv(r.out);
  CHECK(rows.size() == 121);
  for (const auto& row : rows) CHECK(row[2] == 1.0);

  c.generators = {"piecewise:10"};
  c.resolution = 101;
  std::set<double> distinct;
  for (const auto& row : parse_csv(run(c).out)) distinct.insert(row[2]);
  CHECK(distinct.size() == 10);

  c.generators = {"beta:1.5,1.5"};
  for (const auto& row : parse_csv(run(c).out)) {
    const double s = std::round((row[0] + row[1]) * 100.0);
    if (s == 0.0 || s == 100.0 || s == 200.0) {
      CHECK(row[2] == 0.0);
    } else {
      CHECK(row[2] > 0.0);
    }
  }

  c.generators = {"beta:0.5,0.5"};
  c.resolution = 5;
  r = run(c);
  CHECK(r.out.find(",inf\n") != std::string::npos);

  c.dimension = 3;
  r = run(c);
  CHECK(r.code == kUsage);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("generator plot") {
  auto c = config("generator-plot", "triangular");
  c.resolution = 100;
  auto rows = parse_csv(run(c).out);
  REQUIRE(rows.size() == 100);
  for (const auto& row : rows) CHECK(row[1] == doctest::Approx(2.0 * row[0]).epsilon(1e-15));

  auto spikes = [](const std::vector<std::vector<double>>& rs) {
    std::vector<double> at;
    for (std::size_t i = 1; i + 1 < rs.size(); ++i) {
      if (rs[i][1] > rs[i - 1][1] && rs[i][1] > rs[i + 1][1]) at.push_back(rs[i][0]);
    }
    return at;
  };
  c.generators = {"pathology:1,evenly,geom1.1,42"};
  c.resolution = 1000;
  rows = parse_csv(run(c).out);
  // The midpoint grid straddles x = 1/2, so the peak is one of the two middle points.
  std::size_t top = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][1] > rows[top][1]) top = i;
  }
  CHECK(std::abs(rows[top][0] - 0.5) < 1e-3);
  CHECK(spikes(rows).size() <= 1);

  c.generators = {"pathology:100,evenly,geom1.1,42"};
  c.resolution = 20000;
  CHECK(spikes(parse_csv(run(c).out)).size() == 100);
}

TEST_CASE("rho report") {
  auto c = config("rho", "beta:1.5,1.5");
  c.dimension = 2;
  c.n = 20000;
  c.seed = 3;
  auto r = run(c);
  CHECK(r.code == kOk);
  CHECK(first_line(r.out) == "closed 0.125000");
  CHECK(r.out.find("sample ") != std::string::npos);
  CHECK(r.out.find("gap ") != std::string::npos);
  c.generators = {"uniform"};
  CHECK(first_line(run(c).out) == "closed 0.000000");
  c.generators = {"beta:0.5,0.5"};
  CHECK(first_line(run(c).out) == "closed -0.250000");
}

TEST_CASE("probe report") {
  auto c = config("probe", "");
  c.generators.clear();
  c.threshold = 1e6;
  auto r = run(c);
  REQUIRE(r.code == kOk);
  std::istringstream in(r.out);
  std::string key;
  double value = 0.0, x = 0.0, sp = 0.0, off = 0.0, cval = 0.0;
  std::string line;
  std::vector<double> point;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> key;
    if (key == "value") ls >> value;
    if (key == "x") ls >> x;
    if (key == "singular_point") ls >> sp;
    if (key == "offset") ls >> off;
    if (key == "copula_density") ls >> cval;
    if (key == "copula_point") {
      std::string rest;
      ls >> rest;
      std::istringstream ps(rest);
      std::string f;
      while (std::getline(ps, f, ',')) point.push_back(parse_real(f));
    }
  }
  CHECK(value > 1e6);
  CHECK(std::isfinite(value));
  CHECK(cval > 1e6);
  CHECK(std::isfinite(cval));
  REQUIRE(point.size() == 2);
  const double s = point[0] + point[1];
  CHECK(std::abs((s - std::floor(s)) - x) <= 1e-12);

  c.threshold = 1.0;
  c.interval_lo = 0.4;
  c.interval_hi = 0.6;
  r = run(c);
  CHECK(r.out.find("terms 1\n") != std::string::npos);
}

TEST_CASE("verify command") {
  auto c = config("verify", "beta:1.5,1.5");
  c.checks = {"normalization", "rho"};
  c.n = 20000;
  auto r = run(c);
  CHECK(r.code == kOk);
  CHECK(r.out.find("PASS normalization beta:1.5,1.5 d=-") != std::string::npos);
  c.inject = "negate-weight";
  c.checks = {"nonnegativity"};
  r = run(c);
  CHECK(r.code == kFailed);
  CHECK(r.out.find("FAIL nonnegativity") != std::string::npos);
}

TEST_CASE("exit codes") {
  auto c = config("sample", "beta:0,1");
  auto r = run(c);
  CHECK(r.code == kUsage);
  CHECK(r.err.find("alpha") != std::string::npos);

  c = config("sample", "uniform");
  c.out = "/nonexistent-dir/out.csv";
  CHECK(run(c).code == kIo);

  c = config("sample", "uniform");
  c.dimension = 1;
  CHECK(run(c).code == kUsage);

  c = config("probe", "");
  c.interval_lo = 0.6;
  c.interval_hi = 0.5;
  CHECK(run(c).code == kUsage);

  CHECK_THROWS(parse_interval("0.1"));
  CHECK(parse_interval("0.1,0.2") == std::pair{0.1, 0.2});
}

TEST_CASE("output file receives the bytes") {
  const auto path = std::filesystem::temp_directory_path() / "modcop_cli_test.csv";
  auto c = config("sample", "uniform");
  c.dimension = 3;
  c.n = 10;
  c.seed = 1;
  const auto direct = run(c).out;
  c.out = path.string();
  REQUIRE(run(c).code == kOk);
  std::ifstream in(path, std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text == direct);
  std::filesystem::remove(path);
}
