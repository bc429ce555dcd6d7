#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hombridge/ctl.hpp"

namespace py = pybind11;
using namespace hombridge;

namespace {

py::array_t<double> to_numpy(const std::vector<real>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  auto a = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i) a(static_cast<py::ssize_t>(i)) = static_cast<double>(v[i]);
  return out;
}

Profile from_numpy(const Grid& g, py::array_t<double, py::array::c_style | py::array::forcecast> values) {
  if (values.ndim() != 1) throw InvalidArgument("profile values must be one-dimensional");
  auto a = values.unchecked<1>();
  std::vector<real> v(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a(static_cast<py::ssize_t>(i));
  return Profile(g, std::move(v));
}

py::dict report_dict(const DiagnosticsReport& r) {
  py::dict d;
  d["c"] = r.c;
  d["amplitude"] = r.amplitude;
  d["lower_bound"] = r.lower_bound;
  d["bound_ok"] = r.bound_ok;
  d["bound_margin"] = r.bound_margin;
  d["energy_identity_residual"] = r.energy_identity_residual;
  d["energy_identity_limit"] = r.energy_identity_limit;
  d["energy_inequality_slack"] = r.energy_inequality_slack;
  d["energy_inequality_limit"] = r.energy_inequality_limit;
  d["energy_ok"] = r.energy_ok;
  d["identity6_max_residual"] = r.identity6_max_residual;
  d["identity6_limit"] = r.identity6_limit;
  d["identity6_pairs"] = r.identity6_pairs;
  d["identity6_ok"] = r.identity6_ok;
  d["sign_changes_left"] = r.sign_changes_left;
  d["sign_changes_right"] = r.sign_changes_right;
  d["sign_changes_ok"] = r.sign_changes_ok;
  d["boundary_max"] = r.decay.boundary_max;
  d["decay_ok"] = r.decay.passed;
  d["fitted_rate"] = r.decay.fitted_rate;
  d["expected_rate"] = r.decay.expected_rate;
  d["hamiltonian_boundary"] = r.hamiltonian_boundary;
  d["overall_pass"] = r.overall_pass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hombridge, m) {
  m.doc() = "Homoclinic travelling waves of u'''' + c^2 u'' + f(u) = 0";

  const auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<InadmissibleSpeed>(m, "InadmissibleSpeed", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<SolverFailure>(m, "SolverFailure", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  py::class_<NonlinearitySpec>(m, "Nonlinearity")
      .def(py::init(&NonlinearitySpec::parse), py::arg("expression"))
      .def_static("piecewise", &NonlinearitySpec::piecewise)
      .def_static("exponential", &NonlinearitySpec::exponential)
      .def_static("builtin", &NonlinearitySpec::builtin, py::arg("name"))
      .def("with_max_smoothing", &NonlinearitySpec::with_max_smoothing, py::arg("temperature"))
      .def_property_readonly("source", &NonlinearitySpec::source)
      .def_property_readonly("fprime_at_zero", &NonlinearitySpec::fprime_at_zero)
      .def("__call__", [](const NonlinearitySpec& s, double u) { return s.value(u); }, py::arg("u"))
      .def("derivative", [](const NonlinearitySpec& s, double u) { return s.derivative(u); }, py::arg("u"))
      .def("__repr__", [](const NonlinearitySpec& s) { return "Nonlinearity('" + s.source() + "')"; });

  py::class_<AssumptionReport>(m, "AssumptionReport")
      .def_readonly("a1_pass", &AssumptionReport::a1_pass)
      .def_readonly("first_violation", &AssumptionReport::first_violation)
      .def_readonly("a2_pass", &AssumptionReport::a2_pass)
      .def_readonly("fprime_at_zero", &AssumptionReport::fprime_at_zero)
      .def_readonly("u_max", &AssumptionReport::u_max)
      .def_readonly("samples", &AssumptionReport::samples);
  m.def("check_assumptions", &check_assumptions, py::arg("f"), py::arg("u_max") = 100.0,
        py::arg("samples") = 4096);

  m.def("admissible", &admissible, py::arg("f"), py::arg("c"));
  m.def(
      "lower_bound",
      [](const NonlinearitySpec& f, double c, double search_max) { return lower_bound_L(f, c, search_max).value; },
      py::arg("f"), py::arg("c"), py::arg("search_max") = kDefaultSearchMax,
      "L(f,c), or None when unbounded on the search range");
  m.def("nonexistence_predicate", &nonexistence_predicate, py::arg("f"), py::arg("c"),
        py::arg("u_max") = kDefaultSearchMax);
  m.def(
      "tail_parameters",
      [](const NonlinearitySpec& f, double c) {
        const auto t = tail_parameters(f, c);
        return py::make_tuple(t.rho, t.omega);
      },
      py::arg("f"), py::arg("c"), "(rho, omega) of the decaying tail root rho + i omega");
  m.def("multiplier_max", &multiplier_max, py::arg("c"));

  py::class_<Grid>(m, "Grid")
      .def(py::init<double, std::size_t>(), py::arg("T"), py::arg("n"))
      .def_property_readonly("T", &Grid::half_length)
      .def_property_readonly("n", &Grid::size)
      .def_property_readonly("spacing", [](const Grid& g) { return static_cast<double>(g.spacing()); })
      .def_property_readonly("points", [](const Grid& g) {
        std::vector<real> s(g.size());
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = g.point(j);
        return to_numpy(s);
      });

  py::class_<WaveProfile>(m, "Wave")
      .def_readonly("c", &WaveProfile::c)
      .def_readonly("residual_norm", &WaveProfile::residual_norm)
      .def_readonly("newton_iters", &WaveProfile::newton_iters)
      .def_readonly("converged", &WaveProfile::converged)
      .def_readonly("message", &WaveProfile::message)
      .def_property_readonly("status", [](const WaveProfile& w) { return std::string(to_string(w.status)); })
      .def_property_readonly("grid", [](const WaveProfile& w) { return w.profile.grid; })
      .def_property_readonly("values", [](const WaveProfile& w) { return to_numpy(w.profile.values); })
      .def_property_readonly("amplitude", [](const WaveProfile& w) { return amplitude(w.profile); });

  m.def(
      "residual",
      [](const NonlinearitySpec& f, double c, const Grid& g, py::array_t<double> values) {
        return to_numpy(residual(f, c, from_numpy(g, values)).values);
      },
      py::arg("f"), py::arg("c"), py::arg("grid"), py::arg("values"));
  m.def(
      "initial_guess",
      [](const NonlinearitySpec& f, double c, const Grid& g, double A) {
        return to_numpy(initial_guess(f, c, g, A).values);
      },
      py::arg("f"), py::arg("c"), py::arg("grid"), py::arg("amplitude"));
  m.def(
      "solve",
      [](const NonlinearitySpec& f, double c, const Grid& g, double tol, std::optional<double> seed) {
        SolverConfig cfg;
        cfg.newton_tol = tol;
        py::gil_scoped_release release;
        return solve_wave(f, c, g, cfg, seed);
      },
      py::arg("f"), py::arg("c"), py::arg("grid") = Grid(100.0, 4096), py::arg("tol") = 1e-10,
      py::arg("seed_amplitude") = py::none());
  m.def(
      "continue_in_c",
      [](const NonlinearitySpec& f, double c_start, double c_end, double step, const Grid& g) {
        SolverConfig cfg;
        cfg.continuation_step = step;
        py::gil_scoped_release release;
        return continue_in_c(f, c_start, c_end, cfg, g).waves;
      },
      py::arg("f"), py::arg("c_start"), py::arg("c_end"), py::arg("step") = 0.025,
      py::arg("grid") = Grid(100.0, 4096));
  m.def(
      "diagnose", [](const WaveProfile& w, const NonlinearitySpec& f) { return report_dict(diagnose(w, f)); },
      py::arg("wave"), py::arg("f"));
  m.def(
      "hamiltonian",
      [](const Grid& g, py::array_t<double> values, double c) {
        return to_numpy(hamiltonian_profile(from_numpy(g, values), c).values);
      },
      py::arg("grid"), py::arg("values"), py::arg("c"));

  m.def(
      "save_solution",
      [](const std::string& path, const WaveProfile& w, const NonlinearitySpec& f) {
        save_solution(path, make_solution_file(w, f, diagnose(w, f)));
      },
      py::arg("path"), py::arg("wave"), py::arg("f"));
  m.def(
      "load_solution",
      [](const std::string& path) {
        const SolutionFile s = load_solution(path);
        py::dict d;
        d["source"] = s.nonlinearity_source;
        d["c"] = s.c;
        d["T"] = s.T;
        d["n"] = s.n;
        d["values"] = to_numpy(s.values);
        d["residual_norm"] = s.residual_norm;
        d["amplitude"] = s.amplitude;
        d["diagnostics"] = report_dict(s.diagnostics);
        return d;
      },
      py::arg("path"));
}
