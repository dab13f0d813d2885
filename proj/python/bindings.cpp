#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "gwharm/conductance.hpp"
#include "gwharm/dimension.hpp"
#include "gwharm/environment.hpp"
#include "gwharm/experiment.hpp"
#include "gwharm/path_stats.hpp"
#include "gwharm/rng.hpp"
#include "gwharm/walk.hpp"

namespace py = pybind11;
using namespace gwharm;

namespace {

py::dict walk_dict(const WalkPath& p, int safety_margin) {
  const PathEvents ev = regeneration_events(p, safety_margin);
  py::dict d;
  d["depths"] = p.depths;
  d["steps"] = p.steps();
  d["rejected"] = p.rejected_count;
  d["truncated"] = p.truncated;
  d["fresh_times"] = ev.fresh_times;
  d["exit_times"] = ev.exit_times;
  d["regen_times"] = ev.regen_times;
  d["regen_heights"] = ev.regen_heights;
  d["censor_cutoff"] = ev.censor_cutoff;
  return d;
}

// Settings as a dict of strings/numbers, applied through the CLI parser.
ExperimentConfig config_from(const py::dict& settings) {
  ExperimentConfig c;
  for (const auto& [k, v] : settings) {
    std::string text;
    if (py::isinstance<py::bool_>(v)) {
      text = v.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& x : v) text += (text.empty() ? "" : ",") + py::str(x).cast<std::string>();
    } else {
      text = py::str(v).cast<std::string>();
    }
    apply_setting(c, py::str(k).cast<std::string>(), text);
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random walks on weighted Galton-Watson trees";
  m.attr("__version__") = version_stamp();

  py::class_<EnvironmentLaw>(m, "EnvironmentLaw")
      .def_property_readonly("pmf", &EnvironmentLaw::pmf)
      .def_property_readonly("tag", &EnvironmentLaw::tag)
      .def_property_readonly("mean_offspring", &EnvironmentLaw::mean_offspring)
      .def_property_readonly("degenerate", &EnvironmentLaw::degenerate)
      .def("describe", &EnvironmentLaw::describe)
      .def("__repr__", &EnvironmentLaw::describe);

  m.def("preset", &preset, py::arg("name"));
  m.def("preset_examples", &preset_examples);
  m.def("psi", &psi, py::arg("law"), py::arg("alpha"));
  m.def("transience_margin", [](const EnvironmentLaw& law) {
    const CriterionReport r = transience_margin(law);
    return py::dict(py::arg("margin") = r.margin(), py::arg("min_alpha") = r.min_alpha,
                    py::arg("min_value") = r.min_value);
  });
  m.def("tree_key", [](std::uint64_t seed) { return tree_root_key(seed); }, py::arg("seed"));
  m.def("beta_truncated", &beta_truncated_lazy, py::arg("law"), py::arg("key"), py::arg("D"),
        py::arg("generic") = false);
  m.def("beta_profile", &beta_profile_lazy, py::arg("law"), py::arg("key"), py::arg("D"),
        py::arg("generic") = false);
  m.def(
      "beta_adaptive",
      [](const EnvironmentLaw& law, std::uint64_t key, double tol, int D_step, int max_depth) {
        const ConductanceEstimate e = beta_adaptive_lazy(law, key, tol, D_step, max_depth);
        return py::dict(py::arg("value") = e.value, py::arg("depth") = e.depth,
                        py::arg("cauchy_gap") = e.cauchy_gap, py::arg("trace") = e.trace);
      },
      py::arg("law"), py::arg("key"), py::arg("tol") = kDefaultBetaTol,
      py::arg("D_step") = kDefaultDepthStep, py::arg("max_depth") = 200);
  m.def("harm_first_step", &harm_first_step_lazy, py::arg("law"), py::arg("key"), py::arg("D"),
        py::arg("generic") = false);
  m.def(
      "run_walk",
      [](const EnvironmentLaw& law, std::uint64_t seed, int max_depth, std::int64_t horizon,
         bool condition_nonreturn, int safety_margin) {
        WalkConfig wc;
        wc.seed = seed;
        wc.max_depth = max_depth;
        wc.horizon = horizon;
        wc.condition_nonreturn = condition_nonreturn;
        std::optional<WalkPath> p;
        {
          py::gil_scoped_release release;
          p.emplace(run_walk(law, wc));
        }
        return walk_dict(*p, safety_margin);
      },
      py::arg("law"), py::arg("seed"), py::arg("max_depth"), py::arg("horizon") = 1'000'000,
      py::arg("condition_nonreturn") = false, py::arg("safety_margin") = kDefaultSafetyMargin);
  m.def(
      "run_experiment",
      [](const py::dict& settings) {
        const ExperimentConfig c = config_from(settings);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        return py::module_::import("json").attr("loads")(r.summary.dump());
      },
      py::arg("settings"),
      "Runs one experiment; settings use the config-file keys. Returns the summary dict.");
  m.def("experiment_names", &experiment_names);

  py::register_exception<MarginRefused>(m, "MarginRefused", PyExc_RuntimeError);
  py::register_exception<NotRealizedError>(m, "NotRealizedError", PyExc_RuntimeError);
}
