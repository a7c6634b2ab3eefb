#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modcop/copula.hpp"
#include "modcop/errors.hpp"
#include "modcop/generator_parse.hpp"
#include "modcop/pathology.hpp"
#include "modcop/stats.hpp"
#include "modcop/verify.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace {

modcop::SampleMatrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw modcop::DomainError("expected a 2-d array");
  modcop::SampleMatrix s;
  s.rows = static_cast<std::size_t>(a.shape(0));
  s.cols = static_cast<std::size_t>(a.shape(1));
  s.values.assign(a.data(), a.data() + s.rows * s.cols);
  return s;
}

py::array_t<double> to_array(const modcop::SampleMatrix& s) {
  py::array_t<double> out({s.rows, s.cols});
  std::copy(s.values.begin(), s.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_modcop, m) {
  m.doc() = "Copulas with density f(sum u_j mod 1)";

  auto base = py::register_exception<modcop::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<modcop::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<modcop::BoundaryError>(m, "BoundaryError", base.ptr());
  py::register_exception<modcop::UnsupportedDimensionError>(m, "UnsupportedDimensionError", base.ptr());
  py::register_exception<modcop::DegenerateInputError>(m, "DegenerateInputError", base.ptr());
  py::register_exception<modcop::BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<modcop::NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<modcop::UndefinedCorrelationError>(m, "UndefinedCorrelationError", base.ptr());
  py::register_exception<modcop::ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<modcop::ParseError>(m, "ParseError", base.ptr());

  py::class_<modcop::Generator>(m, "Generator")
      .def_property_readonly("id", &modcop::Generator::id)
      .def("density",
           [](const modcop::Generator& g, const py::object& x) {
             return py::vectorize([&g](double v) { return g.density(v); })(x);
           },
           "x"_a)
      .def("cdf",
           [](const modcop::Generator& g, const py::object& x) {
             return py::vectorize([&g](double v) { return g.cdf(v); })(x);
           },
           "x"_a)
      .def("inverse_cdf",
           [](const modcop::Generator& g, const py::object& p) {
             return py::vectorize([&g](double v) { return g.inverse_cdf(v); })(p);
           },
           "p"_a)
      .def_property_readonly("singular_points", &modcop::Generator::singular_points)
      .def("sample",
           [](const modcop::Generator& g, std::size_t n, std::uint64_t seed) {
             const auto v = modcop::sample(g, n, seed);
             return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
           },
           "n"_a, "seed"_a = 0)
      .def("__repr__", [](const modcop::Generator& g) { return "Generator('" + g.id() + "')"; });

  m.def("parse_generator", [](const std::string& spec) { return modcop::parse_generator(spec); }, "spec"_a,
        "Build a generator from a spec such as 'beta:1.5,1.5' or 'pathology:50'.");
  m.def("singular_pair", py::overload_cast<double>(&modcop::singular_pair), "q"_a);

  py::class_<modcop::CopulaModel>(m, "CopulaModel")
      .def(py::init([](int d, const py::object& gen, std::vector<int> signs) {
             modcop::Generator g = py::isinstance<py::str>(gen) ? modcop::parse_generator(gen.cast<std::string>())
                                                                : gen.cast<modcop::Generator>();
             return modcop::CopulaModel(d, g, std::move(signs));
           }),
           "dimension"_a, "generator"_a, "signs"_a = std::vector<int>{})
      .def_property_readonly("dimension", &modcop::CopulaModel::dimension)
      .def_property_readonly("generator", &modcop::CopulaModel::generator)
      .def_property_readonly("signs", &modcop::CopulaModel::signs)
      .def_property_readonly("id", &modcop::CopulaModel::id)
      .def("density", [](const modcop::CopulaModel& c, std::vector<double> u) { return modcop::density(c, u); }, "u"_a)
      .def("cdf",
           [](const modcop::CopulaModel& c, std::vector<double> u, const std::string& method, double tol,
              std::size_t mc_samples, std::uint64_t seed) {
             modcop::CdfOptions o;
             if (method == "exact") {
               o.method = modcop::CdfMethod::exact;
             } else if (method == "monte_carlo") {
               o.method = modcop::CdfMethod::monte_carlo;
             } else if (method != "automatic") {
               throw modcop::DomainError("method must be automatic, exact or monte_carlo");
             }
             o.tolerance = tol;
             o.mc_samples = mc_samples;
             o.seed = seed;
             const auto r = modcop::cdf(c, u, o);
             return py::make_tuple(r.value, r.error_estimate);
           },
           "u"_a, "method"_a = "automatic", "tol"_a = 1e-12, "mc_samples"_a = 200000, "seed"_a = 0,
           "Returns (value, error_estimate).")
      .def("partial_derivative",
           [](const modcop::CopulaModel& c, std::vector<double> u, int j, double tol) {
             return modcop::partial_derivative(c, u, j, tol);
           },
           "u"_a, "j"_a, "tol"_a = 1e-12)
      .def("second_partial",
           [](const modcop::CopulaModel& c, std::vector<double> u, int i, int j, double tol) {
             return modcop::second_partial(c, u, i, j, tol);
           },
           "u"_a, "i"_a, "j"_a, "tol"_a = 1e-12)
      .def("sample",
           [](const modcop::CopulaModel& c, std::size_t n, std::uint64_t seed, unsigned threads) {
             return to_array(modcop::sample_copula(c, n, seed, threads));
           },
           "n"_a, "seed"_a = 0, "threads"_a = 1);

  m.def("spearman_rho_closed_form",
        [](const modcop::Generator& g, double tol) { return modcop::spearman_rho_closed_form(g, tol); }, "generator"_a,
        "tol"_a = 1e-12);
  m.def("spearman_rho_sample",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, std::size_t i, std::size_t j) {
          const auto r = modcop::spearman_rho_sample(to_matrix(data), i, j);
          return py::make_tuple(r.value, r.standard_error);
        },
        "data"_a, "i"_a = 0, "j"_a = 1, "Returns (rho, standard_error).");
  m.def("kendall_tau_sample",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, std::size_t i, std::size_t j) {
          return modcop::kendall_tau_sample(to_matrix(data), i, j);
        },
        "data"_a, "i"_a = 0, "j"_a = 1);
  m.def("ks_uniformity",
        [](std::vector<double> x) {
          const auto r = modcop::ks_uniformity(x);
          return py::make_tuple(r.statistic, r.p_value);
        },
        "sample"_a, "Returns (statistic, p_value).");
  m.def("tail_diagnostic",
        [](const modcop::CopulaModel& c, std::vector<double> ts) {
          py::list out;
          for (const auto& p : modcop::tail_diagnostic(c, ts)) out.append(py::make_tuple(p.t, p.ratio, p.bound));
          return out;
        },
        "model"_a, "t_values"_a, "List of (t, ratio, bound).");

  m.def("unboundedness_probe",
        [](double a, double b, double threshold) {
          const auto w = modcop::unboundedness_probe(a, b, threshold);
          py::dict d;
          d["terms"] = w.terms;
          d["q"] = py::make_tuple(w.q.num, w.q.den);
          d["singular_point"] = w.singular_point;
          d["offset"] = w.offset;
          d["x"] = w.x;
          d["value"] = w.value;
          d["copula_point"] = modcop::witness_copula_point(w, 2);
          return d;
        },
        "a"_a, "b"_a, "threshold"_a);

  m.def("verify",
        [](std::vector<std::string> generators, std::vector<int> dims, std::vector<std::string> checks,
           const std::string& inject, std::size_t samples, std::uint64_t seed) {
          modcop::VerifyOptions o;
          o.generators = std::move(generators);
          o.dimensions = std::move(dims);
          o.checks = std::move(checks);
          o.inject = inject;
          o.samples = samples;
          o.seed = seed;
          py::list out;
          for (const auto& r : modcop::run_verification(o).outcomes) {
            py::dict d;
            d["check"] = r.check;
            d["generator"] = r.generator;
            d["dimension"] = r.dimension;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            out.append(d);
          }
          return out;
        },
        "generators"_a = std::vector<std::string>{}, "dimensions"_a = std::vector<int>{2, 3},
        "checks"_a = std::vector<std::string>{}, "inject"_a = "", "samples"_a = 100000, "seed"_a = 12345);
  m.def("check_names", &modcop::check_names);

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
