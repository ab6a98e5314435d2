#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tfw/calculus.hpp"
#include "tfw/config.hpp"
#include "tfw/errors.hpp"
#include "tfw/experiments.hpp"
#include "tfw/fem.hpp"
#include "tfw/kernels.hpp"
#include "tfw/model.hpp"
#include "tfw/noise.hpp"
#include "tfw/runner.hpp"
#include "tfw/solver.hpp"
#include "tfw/special.hpp"

namespace py = pybind11;
using namespace tfw;

namespace {

calculus::TimeSeries series_of(const std::vector<double>& values, double tau) { return {tau, values}; }

py::dict report_dict(const experiments::ErrorReport& r) {
  py::dict d;
  d["study"] = r.study;
  d["param_name"] = r.param_name;
  d["passed"] = r.passed();
  py::list ladder;
  for (const auto& l : r.ladder) {
    py::dict row;
    row["series"] = l.series;
    row["param"] = l.param;
    row["mse"] = l.mse;
    row["stderr"] = l.stderr_mse;
    row["n_samples"] = l.n_samples;
    ladder.append(row);
  }
  d["ladder"] = ladder;
  auto fit = [](const std::optional<experiments::RateFit>& f) -> py::object {
    if (!f) return py::none();
    py::dict x;
    x["slope"] = f->slope;
    x["intercept"] = f->intercept;
    x["ci_low"] = f->ci_low;
    x["ci_high"] = f->ci_high;
    return x;
  };
  d["fit"] = fit(r.fit);
  d["fit_corrected"] = fit(r.fit_corrected);
  py::dict checks;
  for (const auto& c : r.checks) checks[py::str(c.name)] = py::make_tuple(c.value, c.low, c.high, c.pass);
  d["checks"] = checks;
  d["metrics"] = r.metrics;
  d["csv"] = experiments::to_csv(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral and finite-element solvers for the stochastic tempered time-fractional wave equation";

  py::register_exception<PoleError>(m, "PoleError", PyExc_ValueError);
  py::register_exception<OverflowError>(m, "OverflowError", PyExc_OverflowError);
  py::register_exception<GuardError>(m, "GuardError", PyExc_FloatingPointError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);

  // special
  m.def("gamma", &special::gamma, py::arg("x"));
  m.def("ml", py::vectorize([](double alpha, double beta, double z) { return special::ml(alpha, beta, z); }),
        py::arg("alpha"), py::arg("beta"), py::arg("z"), "Mittag-Leffler E_{alpha,beta}(z) for real z.");

  // calculus
  m.def("frac_integral", [](const std::vector<double>& v, double tau, double alpha) {
    return calculus::frac_integral(series_of(v, tau), alpha).values;
  }, py::arg("values"), py::arg("tau"), py::arg("alpha"));
  m.def("tempered_frac_integral", [](const std::vector<double>& v, double tau, double alpha, double nu) {
    return calculus::tempered_frac_integral(series_of(v, tau), alpha, nu).values;
  }, py::arg("values"), py::arg("tau"), py::arg("alpha"), py::arg("nu"));
  m.def("caputo", [](const std::vector<double>& v, double tau, double alpha, std::optional<double> slope) {
    return calculus::caputo(series_of(v, tau), alpha, slope).values;
  }, py::arg("values"), py::arg("tau"), py::arg("alpha"), py::arg("initial_slope") = py::none());
  m.def("tempered_caputo",
        [](const std::vector<double>& v, double tau, double alpha, double nu, std::optional<double> slope) {
          return calculus::tempered_caputo(series_of(v, tau), alpha, nu, slope).values;
        },
        py::arg("values"), py::arg("tau"), py::arg("alpha"), py::arg("nu"), py::arg("initial_slope") = py::none());

  // model
  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("alpha", &ModelSpec::alpha)
      .def_readwrite("beta", &ModelSpec::beta)
      .def_readwrite("nu", &ModelSpec::nu)
      .def_readwrite("hurst", &ModelSpec::hurst)
      .def_readwrite("domain_len", &ModelSpec::domain_len)
      .def_readwrite("horizon", &ModelSpec::horizon)
      .def_readwrite("n_modes", &ModelSpec::n_modes)
      .def_readwrite("init_a", &ModelSpec::init_a)
      .def_readwrite("init_b", &ModelSpec::init_b)
      .def_readwrite("gamma", &ModelSpec::gamma_declared)
      .def("set_nonlinearity",
           [](ModelSpec& s, const std::string& which, const std::string& kind, double c0, double c1, double amp) {
             NonlinearitySpec* t = which == "f" ? &s.f_spec : which == "g" ? &s.g_spec : which == "h" ? &s.h_spec : nullptr;
             if (!t) throw py::value_error("which must be 'f', 'g' or 'h'");
             t->kind = nonlinearity_kind_from_string(kind);
             if (t->kind == NonlinearityKind::dense) throw py::value_error("dense nonlinearities are C++ only");
             t->c0 = c0;
             t->c1 = c1;
             t->amplitude = amp;
           },
           py::arg("which"), py::arg("kind"), py::arg("c0") = 0.0, py::arg("c1") = 0.0, py::arg("amplitude") = 0.0)
      .def("nonlinearity", [](const ModelSpec& s, const std::string& which) {
        const NonlinearitySpec& t = which == "f" ? s.f_spec : which == "g" ? s.g_spec : s.h_spec;
        return py::make_tuple(to_string(t.kind), t.c0, t.c1, t.amplitude);
      })
      .def("set_coefficients",
           [](ModelSpec& s, const std::string& which, double scale, double rate, double perturbation) {
             if (which != "sigma" && which != "rho") throw py::value_error("which must be 'sigma' or 'rho'");
             CoeffRule& r = which == "sigma" ? s.noise_coeffs.sigma : s.noise_coeffs.rho;
             r.scale = scale;
             r.rate = rate;
             r.perturbation = perturbation;
           },
           py::arg("which"), py::arg("scale"), py::arg("rate"), py::arg("perturbation") = 0.0)
      .def("validate", &ModelSpec::validate)
      .def("normalize_initial_data", &ModelSpec::normalize_initial_data)
      .def("lambda_beta", &ModelSpec::lambda_beta)
      .def("gamma_tilde", &ModelSpec::gamma_tilde);
  m.def("benchmark_model", &benchmark_model);
  m.def("frac_eigenvalues", &frac_eigenvalues, py::arg("n_modes"), py::arg("domain_len"), py::arg("beta"));
  m.def("hs_norm", &hs_norm, py::arg("coeffs"), py::arg("s"), py::arg("domain_len") = 1.0);

  // noise
  py::class_<NoisePath>(m, "NoisePath")
      .def_readonly("tau", &NoisePath::tau)
      .def_readonly("n_steps", &NoisePath::n_steps)
      .def_readonly("hurst", &NoisePath::hurst)
      .def_readonly("seed", &NoisePath::seed)
      .def_readonly("bm_incr", &NoisePath::bm_incr)
      .def_readonly("fbm_incr", &NoisePath::fbm_incr)
      .def_property_readonly("n_modes", &NoisePath::n_modes);
  m.def("sample_path", &noise::sample_path, py::arg("n_modes"), py::arg("n_steps"), py::arg("tau"), py::arg("hurst"),
        py::arg("seed"), py::arg("sample") = 0);
  m.def("coarsen", &noise::coarsen, py::arg("path"), py::arg("factor"));
  m.def("normalize_increments", &noise::normalize_increments, py::arg("path"));

  // kernels
  auto ctx = [](double lam_beta, double alpha, double nu) { return kernels::ModeKernelCtx{lam_beta, alpha, nu}; };
  m.def("eval_T", py::vectorize([ctx](double t, double l, double a, double nu) { return kernels::eval_T(ctx(l, a, nu), t); }),
        py::arg("t"), py::arg("lam_beta"), py::arg("alpha"), py::arg("nu") = 0.0);
  m.def("eval_R", py::vectorize([ctx](double t, double l, double a, double nu) { return kernels::eval_R(ctx(l, a, nu), t); }),
        py::arg("t"), py::arg("lam_beta"), py::arg("alpha"), py::arg("nu") = 0.0);
  m.def("eval_S", py::vectorize([ctx](double t, double l, double a, double nu) { return kernels::eval_S(ctx(l, a, nu), t); }),
        py::arg("t"), py::arg("lam_beta"), py::arg("alpha"), py::arg("nu") = 0.0);

  // solver
  py::class_<ModalTrajectory>(m, "ModalTrajectory")
      .def_readonly("tau", &ModalTrajectory::tau)
      .def_readonly("n_steps", &ModalTrajectory::n_steps)
      .def_readonly("coeffs", &ModalTrajectory::coeffs)
      .def_property_readonly("n_modes", &ModalTrajectory::n_modes)
      .def("at", &ModalTrajectory::at, py::arg("m"));
  m.def("exact_linear", &solver::exact_linear, py::arg("model"), py::arg("tau"), py::arg("n_steps"));
  m.def("solve_regularized",
        [](const ModelSpec& model, const NoisePath& path) { return solver::solve_regularized(model, path); },
        py::arg("model"), py::arg("path"), py::call_guard<py::gil_scoped_release>());
  m.def("time_derivative", &solver::time_derivative, py::arg("traj"));
  m.def("residual_check", &solver::residual_check, py::arg("traj"), py::arg("model"), py::arg("path"));

  // fem
  py::class_<fem::FemSpace>(m, "FemSpace")
      .def_readonly("h_bar", &fem::FemSpace::h_bar)
      .def_readonly("n_dofs", &fem::FemSpace::n_dofs)
      .def_readonly("nodes", &fem::FemSpace::nodes)
      .def_readonly("mass", &fem::FemSpace::mass)
      .def_readonly("frac_stiff", &fem::FemSpace::frac_stiff)
      .def_readonly("eig_vals", &fem::FemSpace::eig_vals)
      .def_readonly("eig_vecs", &fem::FemSpace::eig_vecs)
      .def("coupling", &fem::FemSpace::coupling, py::arg("n_cont"));
  m.def("build_space", &fem::build_space, py::arg("h_bar"), py::arg("domain_len"), py::arg("beta"),
        py::arg("spectral_trunc") = 0);
  m.def("project_L2", &fem::project_L2, py::arg("space"), py::arg("target"));
  m.def("project_ritz", &fem::project_ritz, py::arg("space"), py::arg("target"));
  m.def("discrete_norm", &fem::discrete_norm, py::arg("space"), py::arg("nodal"), py::arg("p"));
  m.def("solve_fem",
        [](const ModelSpec& model, const fem::FemSpace& space, const NoisePath& path) {
          return fem::solve_fem(model, space, path);
        },
        py::arg("model"), py::arg("space"), py::arg("path"), py::call_guard<py::gil_scoped_release>());
  m.def("prolongate", &fem::prolongate, py::arg("space"), py::arg("coeffs"), py::arg("n_cont"));

  // experiments and runner
  m.def("fit_rate", [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto f = experiments::fit_rate(x, y);
    return py::make_tuple(f.slope, f.intercept, f.ci_low, f.ci_high);
  }, py::arg("x"), py::arg("y"), "OLS slope of log y on log x: (slope, intercept, ci_low, ci_high).");
  m.def("special_selftest", [] { return report_dict(experiments::special_selftest()); });
  m.def("stability_probe", [] { return report_dict(experiments::stability_probe({})); });
  m.def("config_keys", &config_keys);
  m.def("run_config", [](const std::string& text, int threads, std::optional<std::uint64_t> seed) {
    std::istringstream in(text);
    RunConfig cfg = parse_config(in);
    if (seed) cfg.mc.seed = *seed;
    std::vector<experiments::ErrorReport> reports;
    {
      py::gil_scoped_release release;
      reports = run_study(cfg, threads);
    }
    py::list out;
    for (const auto& r : reports) out.append(report_dict(r));
    return out;
  }, py::arg("text"), py::arg("threads") = 0, py::arg("seed") = py::none(),
     "Parses a configuration given as text, runs its study and returns one dict per report.");
}
