// Thin Python layer over the C++ library. Configs cross the boundary as JSON
// strings so the Python side never has to mirror RunConfig field by field.

#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adammcmc/acceptance.hpp"
#include "adammcmc/diagnostics.hpp"
#include "adammcmc/experiment.hpp"
#include "adammcmc/prolate.hpp"

namespace py = pybind11;
using namespace adammcmc;

namespace {

RunConfig parse(const std::string& config_json) {
  RunConfig c = RunConfig::from_json(config_json);
  c.validate();
  return c;
}

py::dict record_dict(const ChainRecord& rec) {
  const std::size_t n = rec.rows.size();
  Eigen::VectorXd loss(n), log_alpha(n), theta_norm(n);
  std::vector<bool> accepted(n);
  for (std::size_t i = 0; i < n; ++i) {
    loss[i] = rec.rows[i].loss;
    log_alpha[i] = rec.rows[i].log_alpha;
    theta_norm[i] = rec.rows[i].theta_norm;
    accepted[i] = rec.rows[i].accepted;
  }
  py::dict d;
  d["loss"] = loss;
  d["log_alpha"] = log_alpha;
  d["theta_norm"] = theta_norm;
  d["accepted"] = accepted;
  d["acceptance_rate"] = rec.acceptance_rate();
  return d;
}

py::dict run(const std::string& config_json) {
  RunResult res;
  Experiment exp;
  {
    py::gil_scoped_release release;
    exp = build_experiment(parse(config_json));
    res = run_experiment(exp);
  }
  Eigen::MatrixXd samples(res.chain.samples.size(), exp.target.dim());
  for (std::size_t i = 0; i < res.chain.samples.size(); ++i) {
    samples.row(static_cast<Eigen::Index>(i)) = res.chain.samples[i].transpose();
  }
  py::dict d = record_dict(res.chain.record);
  d["samples"] = samples;
  d["post_mean"] = res.metrics.post_mean;
  d["post_var"] = res.metrics.post_var;
  d["post_loss_mean"] = res.metrics.post_loss_mean;
  d["boundary_rejects"] = res.metrics.boundary_rejects;
  d["nonfinite_rejects"] = res.metrics.nonfinite_rejects;
  d["test_accuracy"] = res.metrics.test_accuracy;
  d["median_spread_test"] = res.metrics.median_spread_test;
  d["median_spread_ood"] = res.metrics.median_spread_ood;
  d["dim"] = exp.target.dim();
  d["sigma_dir"] = exp.mcmc.proposal.sigma_dir;
  return d;
}

py::list scan(const std::string& config_json, const std::string& param,
              const std::vector<double>& grid, int replicates, int jobs) {
  const RunConfig base = parse(config_json);
  std::vector<ScanRow> rows;
  {
    py::gil_scoped_release release;
    rows = scan_acceptance(base, param, grid, replicates, jobs);
  }
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["param"] = r.param;
    d["value"] = r.value;
    d["seed"] = r.seed;
    d["mean_acceptance"] = r.mean_acceptance;
    d["metric"] = r.metric;
    out.append(d);
  }
  return out;
}

py::dict compare_mh(const std::string& config_json, std::int64_t burn_in) {
  const RunConfig c = parse(config_json);
  MhComparison cmp;
  {
    py::gil_scoped_release release;
    cmp = compare_full_vs_stochastic_mh(c, c.steps, burn_in);
  }
  auto stats = [](const ChainStats& s) {
    py::dict d;
    d["mean_acceptance"] = s.mean_acceptance;
    d["loss_mean"] = s.loss_mean;
    d["loss_var"] = s.loss_var;
    return d;
  };
  py::dict st = record_dict(cmp.stochastic), fu = record_dict(cmp.full);
  st["full_data_loss"] = cmp.stochastic_full_loss;
  fu["full_data_loss"] = cmp.full_full_loss;
  st["stats"] = stats(cmp.stochastic_stats);
  fu["stats"] = stats(cmp.full_stats);
  py::dict d;
  d["stochastic"] = st;
  d["full"] = fu;
  return d;
}

py::list verify(bool quick) {
  SuiteOptions opts;
  opts.quick = quick;
  std::vector<CriterionResult> results;
  {
    py::gil_scoped_release release;
    results = run_acceptance_suite(opts);
  }
  py::list out;
  for (const auto& r : results) {
    py::dict d;
    d["id"] = r.id;
    d["name"] = r.name;
    d["passed"] = r.passed;
    d["detail"] = r.detail;
    d["seconds"] = r.seconds;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Metropolis-adjusted Adam sampler with a rank-1 Gaussian proposal";
  m.attr("__version__") = kVersion;

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::object err = py::reinterpret_borrow<py::object>(config_error)(e.what());
      err.attr("field") = e.field();
      PyErr_SetObject(config_error.ptr(), err.ptr());
    }
  });
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ProlateCovariance>(m, "ProlateCovariance",
                                "sigma^2 I + sigma_dir^2 d d^T, never materialized")
      .def(py::init<double, double, ParamVector>(), py::arg("sigma"), py::arg("sigma_dir"),
           py::arg("direction"))
      .def_property_readonly("sigma", &ProlateCovariance::sigma)
      .def_property_readonly("sigma_dir", &ProlateCovariance::sigma_dir)
      .def_property_readonly("direction", &ProlateCovariance::direction)
      .def_property_readonly("dim", &ProlateCovariance::dim)
      .def("log_det", &ProlateCovariance::log_det)
      .def("inv_quad_form", &ProlateCovariance::inv_quad_form, py::arg("x"))
      .def("solve", &ProlateCovariance::solve, py::arg("x"))
      .def("multiply", &ProlateCovariance::multiply, py::arg("x"))
      .def("log_density", &ProlateCovariance::log_density, py::arg("mean"), py::arg("x"))
      .def("sample",
           py::overload_cast<const ParamVector&, const ParamVector&, double>(
               &ProlateCovariance::sample, py::const_),
           py::arg("mean"), py::arg("z"), py::arg("xi"));

  m.def("default_config", [] { return RunConfig{}.to_json(); },
        "Default run configuration as JSON.");
  m.def("normalize_config", [](const std::string& s) { return parse(s).to_json(); },
        py::arg("config_json"), "Validate a JSON config and return its canonical form.");
  m.def("config_hash", [](const std::string& s) { return parse(s).hash(); },
        py::arg("config_json"));
  m.def("run", &run, py::arg("config_json"), "Run one chain; returns traces and samples.");
  m.def("scan", &scan, py::arg("config_json"), py::arg("param"), py::arg("grid"),
        py::arg("replicates") = 3, py::arg("jobs") = 1);
  m.def("compare_mh", &compare_mh, py::arg("config_json"), py::arg("burn_in") = 0,
        "Stochastic vs full-data Metropolis-Hastings with identical batches and seeds.");
  m.def("verify", &verify, py::arg("quick") = true);

  m.def(
      "two_moons",
      [](std::size_t n, double noise, std::uint64_t seed) {
        const Dataset d = make_two_moons(n, noise, seed);
        return py::make_tuple(Eigen::MatrixXd(d.inputs), d.labels);
      },
      py::arg("n"), py::arg("noise") = 0.2, py::arg("seed") = 7);
  m.def("truncated_gaussian_variance", &truncated_gaussian_variance, py::arg("lam"),
        py::arg("half_width"));
}
