#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "msfilter/campaign.hpp"
#include "msfilter/error.hpp"
#include "msfilter/exact.hpp"
#include "msfilter/filter.hpp"
#include "msfilter/io.hpp"
#include "msfilter/metrics.hpp"
#include "msfilter/model.hpp"
#include "msfilter/simulate.hpp"
#include "msfilter/smoother.hpp"

namespace py = pybind11;
using namespace msfilter;

namespace {

Matrix stack_rows(const std::vector<Vector>& rows, Eigen::Index cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t t = 0; t < rows.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = rows[t].transpose();
  return out;
}

ObservationSeries series(const Matrix& y, const MSStateSpace& model) {
  ObservationSeries data{y};
  validate_observations(data, model);
  return data;
}

// A filter run together with the model it was computed under, so smoothing needs no extra argument.
struct PyRun {
  FilterRun run;
  MSStateSpace model;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regime-switching state-space filters and smoothers";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<MSStateSpace>(m, "Model")
      .def_property_readonly("h", &MSStateSpace::h)
      .def_property_readonly("m", [](const MSStateSpace& s) { return s.dims.m; })
      .def_property_readonly("p", [](const MSStateSpace& s) { return s.dims.p; })
      .def_property_readonly("Q", [](const MSStateSpace& s) { return s.chain.Q; })
      .def("to_json", [](const MSStateSpace& s) { return io::model_to_json(s).dump(); })
      .def("hash", &io::model_hash)
      .def("__repr__", [](const MSStateSpace& s) {
        return "<Model h=" + std::to_string(s.h()) + " m=" + std::to_string(s.dims.m) +
               " p=" + std::to_string(s.dims.p) + ">";
      });

  m.def("load_model", [](const std::filesystem::path& path) { return io::load_model(path); }, py::arg("path"));
  m.def("model_from_json", [](const std::string& text) {
    io::json doc;
    try {
      doc = io::json::parse(text);
    } catch (const io::json::exception& e) {
      throw Error(ErrorCode::kParse, e.what());
    }
    return io::model_from_json(doc);
  }, py::arg("text"));

  m.def("stationary_distribution", [](const Matrix& Q) { return stationary_distribution(MarkovChain{Q}); },
        py::arg("Q"));
  m.def("grand_transition", [](const Matrix& Q, int order) { return grand_transition(MarkovChain{Q}, order); },
        py::arg("Q"), py::arg("order"));

  m.def("simulate", [](const MSStateSpace& model, int n, std::uint64_t seed) {
    const SimOutput sim = simulate(model, n, seed);
    py::dict out;
    out["regimes"] = sim.regimes;
    out["states"] = sim.states;
    out["observations"] = sim.observations;
    return out;
  }, py::arg("model"), py::arg("n"), py::arg("seed"));

  py::class_<PyRun>(m, "FilterRun")
      .def_property_readonly("algo", [](const PyRun& r) { return r.run.tag.name(); })
      .def_property_readonly("total_loglik", [](const PyRun& r) { return r.run.total_loglik; })
      .def_property_readonly("retained", [](const PyRun& r) { return r.run.retained; })
      .def_property_readonly("periods", [](const PyRun& r) { return r.run.periods(); })
      .def_property_readonly("means", [](const PyRun& r) {
        std::vector<Vector> rows;
        for (const auto& s : r.run.steps) rows.push_back(s.fused_mean);
        return stack_rows(rows, r.model.dims.m);
      })
      .def_property_readonly("covs", [](const PyRun& r) {
        std::vector<Matrix> covs;
        for (const auto& s : r.run.steps) covs.push_back(s.fused_cov);
        return covs;
      })
      .def_property_readonly("regime_probs", [](const PyRun& r) {
        std::vector<Vector> rows;
        for (const auto& s : r.run.steps) rows.push_back(s.regime_marginals);
        return stack_rows(rows, r.model.h());
      })
      .def_property_readonly("loglik_increments", [](const PyRun& r) {
        std::vector<double> out;
        for (const auto& s : r.run.steps) out.push_back(s.loglik_increment);
        return out;
      });

  m.def("run_filter", [](const MSStateSpace& model, const Matrix& y, const std::string& algo,
                         const std::string& warmup, bool retain) {
    FilterOptions options;
    options.warmup = parse_warmup(warmup);
    options.retain_for_smoothing = retain;
    PyRun out{{}, model};
    {
      py::gil_scoped_release release;
      out.run = run_filter(model, series(y, model), AlgoTag::parse(algo), options);
    }
    return out;
  }, py::arg("model"), py::arg("y"), py::arg("algo") = "imm1", py::arg("warmup") = "paper",
     py::arg("retain") = true);

  m.def("smooth", [](const PyRun& r) {
    const SmootherRun sm = smooth_run(r.run, r.model);
    py::dict out;
    out["means"] = stack_rows(sm.means, r.model.dims.m);
    out["covs"] = sm.covs;
    out["regime_probs"] = stack_rows(sm.regime_probs, r.model.h());
    out["zero_denominators"] = sm.zero_denominators;
    return out;
  }, py::arg("run"));

  m.def("exact_filter", [](const MSStateSpace& model, const Matrix& y) {
    const ExactRun run = exact_run(model, series(y, model));
    std::vector<Vector> means, probs;
    std::vector<Matrix> covs;
    for (const auto& s : run.steps) {
      means.push_back(s.fused_mean);
      covs.push_back(s.fused_cov);
      probs.push_back(s.regime_marginals);
    }
    py::dict out;
    out["means"] = stack_rows(means, model.dims.m);
    out["covs"] = covs;
    out["regime_probs"] = stack_rows(probs, model.h());
    out["total_loglik"] = run.total_loglik;
    return out;
  }, py::arg("model"), py::arg("y"));

  m.def("rmse", [](const Matrix& est, const Matrix& truth, std::optional<Vector> normalizer) {
    return normalizer ? rmse(est, truth, *normalizer) : rmse(est, truth);
  }, py::arg("estimates"), py::arg("truth"), py::arg("normalizer") = py::none());

  m.def("run_campaign", [](const std::filesystem::path& path, std::optional<int> threads) {
    CampaignConfig config = io::load_campaign(path);
    if (threads) config.threads = *threads;
    const MSStateSpace model = io::load_model(config.model_path);
    MetricReport report;
    {
      py::gil_scoped_release release;
      report = monte_carlo(model, config);
    }
    return py::module_::import("json").attr("loads")(io::report_to_json(report, io::model_hash(model)).dump());
  }, py::arg("path"), py::arg("threads") = py::none());
}
