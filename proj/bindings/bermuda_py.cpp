#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bermuda/config.hpp"
#include "bermuda/dp.hpp"
#include "bermuda/gbm.hpp"
#include "bermuda/localpoly.hpp"
#include "bermuda/oracles.hpp"
#include "bermuda/parallel.hpp"
#include "bermuda/payoff.hpp"
#include "bermuda/pricing.hpp"
#include "bermuda/studies.hpp"
#include "bermuda/version.hpp"

namespace py = pybind11;
using namespace bermuda;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    std::vector<double> out(static_cast<std::size_t>(arr.size()));
    std::copy(arr.data(), arr.data() + arr.size(), out.begin());
    return out;
}

ContinuationEstimator make_estimator(
    py::array_t<double, py::array::c_style | py::array::forcecast> sample_x,
    py::array_t<double, py::array::c_style | py::array::forcecast> sample_y, int degree,
    const std::string& kernel, double bandwidth, double c_max, double nu) {
    if (sample_y.ndim() != 1) throw std::invalid_argument("sample_y must be one-dimensional");
    const auto m = static_cast<std::size_t>(sample_y.shape(0));
    int dim = 1;
    if (sample_x.ndim() == 2) {
        dim = static_cast<int>(sample_x.shape(1));
        if (static_cast<std::size_t>(sample_x.shape(0)) != m)
            throw std::invalid_argument("sample_x and sample_y row counts differ");
    } else if (sample_x.ndim() == 1) {
        if (static_cast<std::size_t>(sample_x.shape(0)) != m)
            throw std::invalid_argument("sample_x and sample_y lengths differ");
    } else {
        throw std::invalid_argument("sample_x must be (M,) or (M, d)");
    }
    KernelSpec spec{kernel_kind_from_name(kernel), bandwidth};
    return ContinuationEstimator(to_vector(sample_x), to_vector(sample_y),
                                 MonomialBasis::build(dim, degree), spec, c_max, nu);
}

py::dict report_to_dict(const PricingReport& report) {
    py::dict out;
    out["v_hat"] = report.v_hat;
    out["v_tilde"] = report.v_tilde;
    out["se_hat"] = report.se_hat;
    out["se_tilde"] = report.se_tilde;
    out["master_seed"] = report.master_seed;
    py::list runs;
    for (const auto& run : report.runs) {
        py::dict r;
        r["v_hat"] = run.v_hat;
        r["v_tilde"] = run.v_tilde;
        r["se_hat"] = run.se_hat;
        r["se_tilde"] = run.se_tilde;
        r["seed"] = run.seed;
        runs.append(r);
    }
    out["runs"] = runs;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Regression Monte Carlo pricing of Bermudan options with truncated "
              "local polynomial continuation-value estimates";
    m.attr("__version__") = kVersion;

    m.def("set_max_threads", &set_max_threads, py::arg("n"));

    py::class_<GbmParams>(m, "GbmParams")
        .def(py::init([](int assets, double rate, double dividend, double sigma,
                         std::vector<double> correlation) {
                 GbmParams p;
                 p.assets = assets;
                 p.rate = rate;
                 p.dividend = dividend;
                 p.sigma = sigma;
                 p.correlation = std::move(correlation);
                 p.validate();
                 return p;
             }),
             py::arg("assets") = 1, py::arg("rate") = 0.0, py::arg("dividend") = 0.0,
             py::arg("sigma") = 0.0, py::arg("correlation") = std::vector<double>{})
        .def_readonly("assets", &GbmParams::assets)
        .def_readonly("rate", &GbmParams::rate)
        .def_readonly("dividend", &GbmParams::dividend)
        .def_readonly("sigma", &GbmParams::sigma);

    py::class_<ExerciseGrid>(m, "ExerciseGrid")
        .def_static("uniform", &ExerciseGrid::uniform, py::arg("t0"), py::arg("maturity"),
                    py::arg("dates"))
        .def(py::init([](std::vector<double> times) {
            ExerciseGrid grid;
            grid.times = std::move(times);
            grid.validate();
            return grid;
        }))
        .def_readonly("times", &ExerciseGrid::times)
        .def_property_readonly("dates", &ExerciseGrid::num_steps);

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_property_readonly("num_paths", &PathEnsemble::num_paths)
        .def_property_readonly("dim", &PathEnsemble::dim)
        .def_property_readonly("seed", &PathEnsemble::seed)
        .def_property_readonly("stream_offset", &PathEnsemble::stream_offset)
        .def_property_readonly("grid", &PathEnsemble::grid)
        .def_property_readonly("states", [](const PathEnsemble& self) {
            const int L = self.grid().num_steps();
            py::array_t<double> arr({self.num_paths(), L + 1, self.dim()});
            std::copy(self.raw().begin(), self.raw().end(), arr.mutable_data());
            return arr;
        });

    m.def("simulate_gbm", &simulate_gbm, py::arg("params"), py::arg("x0"), py::arg("grid"),
          py::arg("num_paths"), py::arg("seed"), py::arg("stream_offset") = 0,
          "Exact lognormal transitions on the exercise grid; path m depends only on "
          "(seed, stream_offset + m).");

    py::class_<PayoffSpec>(m, "PayoffSpec")
        .def_static("max_call", &PayoffSpec::max_call, py::arg("kappa"))
        .def_static("power_put", &PayoffSpec::power_put, py::arg("strike"), py::arg("alpha"))
        .def_static("vanilla_put", &PayoffSpec::vanilla_put, py::arg("strike"))
        .def_static("digital", &PayoffSpec::digital, py::arg("threshold"), py::arg("level"),
                    py::arg("gap"), py::arg("terminal_strike"), py::arg("terminal_cap"),
                    py::arg("digital_date") = 0, py::arg("terminal_date") = 1);

    m.def("evaluate_payoff",
          [](const PayoffSpec& spec, int date, std::vector<double> x) {
              return evaluate(spec, date, x);
          },
          py::arg("spec"), py::arg("date"), py::arg("x"));

    m.def("bandwidth_rule", &bandwidth_rule, py::arg("num_paths"), py::arg("beta"), py::arg("nu"),
          py::arg("dim"), "h = M^(-1/(2(beta+nu)+d))");

    py::class_<ContinuationEstimator>(m, "ContinuationEstimator")
        .def(py::init(&make_estimator), py::arg("sample_x"), py::arg("sample_y"),
             py::arg("degree") = 0, py::arg("kernel") = "triangle", py::arg("bandwidth") = 1.0,
             py::arg("c_max") = 1.0, py::arg("nu") = 0.0)
        .def("value",
             [](const ContinuationEstimator& self, std::vector<double> x) {
                 return self.raw_eval(x);
             })
        .def("truncated_value",
             [](const ContinuationEstimator& self, std::vector<double> x) {
                 return self.truncate_eval(x);
             })
        .def("diagnostics",
             [](const ContinuationEstimator& self, std::vector<double> x) {
                 const auto [value, diag] = self.fit_eval(x);
                 py::dict out;
                 out["value"] = value;
                 out["lambda_min"] = diag.lambda_min;
                 out["lambda_max"] = diag.lambda_max;
                 out["effective_points"] = diag.effective_points;
                 return out;
             })
        .def_property_readonly("gate_threshold", &ContinuationEstimator::gate_threshold);

    py::class_<DpConfig>(m, "DpConfig")
        .def(py::init([](int degree, const std::string& kernel, double bandwidth, double nu,
                         double discount_per_step, bool truncation, std::optional<double> c_max) {
                 DpConfig cfg;
                 cfg.degree = degree;
                 cfg.kernel = {kernel_kind_from_name(kernel), bandwidth};
                 cfg.nu = nu;
                 cfg.discount_per_step = discount_per_step;
                 cfg.truncation = truncation;
                 cfg.c_max = c_max;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("degree") = 0, py::arg("kernel") = "triangle", py::arg("bandwidth") = 1.0,
             py::arg("nu") = 0.0, py::arg("discount_per_step") = 1.0,
             py::arg("truncation") = true, py::arg("c_max") = std::nullopt);

    py::class_<EstimatorChain>(m, "EstimatorChain")
        .def_property_readonly("num_dates", &EstimatorChain::num_dates)
        .def_property_readonly("c_max", &EstimatorChain::c_max)
        .def("continuation",
             [](const EstimatorChain& self, int k, std::vector<double> x) {
                 return self.continuation(k, x);
             },
             py::arg("k"), py::arg("x"));

    m.def("backward_induct", &backward_induct, py::arg("paths"), py::arg("payoff"),
          py::arg("config"),
          "Recursive surrogate-target regression of continuation values, C-hat_L = 0 downward.");

    m.def("tilde_price",
          [](const PathEnsemble& paths, const EstimatorChain& chain, const PayoffSpec& payoff) {
              const auto t = tilde_price(paths, chain, payoff);
              return py::make_tuple(t.value, t.std_error);
          },
          py::arg("paths"), py::arg("chain"), py::arg("payoff"));

    m.def("lower_bound_price",
          [](const EstimatorChain& chain, const PayoffSpec& payoff, const PathEnsemble& fresh,
             int start_index) {
              const auto policy = make_policy(chain, payoff, start_index);
              const auto lb = lower_bound_price(policy, fresh);
              py::dict out;
              out["value"] = lb.value;
              out["se"] = lb.std_error;
              out["stop_counts"] = lb.stop_counts;
              return out;
          },
          py::arg("chain"), py::arg("payoff"), py::arg("fresh_paths"), py::arg("start_index") = 1);

    py::class_<RunPlan>(m, "RunPlan")
        .def(py::init([](const GbmParams& model, std::vector<double> x0, const ExerciseGrid& grid,
                         const PayoffSpec& payoff, const DpConfig& dp, int train_paths,
                         int pricing_paths, int start_index, std::uint64_t seed) {
                 RunPlan plan;
                 plan.model = model;
                 plan.x0 = std::move(x0);
                 plan.grid = grid;
                 plan.payoff = payoff;
                 plan.dp = dp;
                 plan.num_train_paths = train_paths;
                 plan.num_pricing_paths = pricing_paths;
                 plan.start_index = start_index;
                 plan.master_seed = seed;
                 plan.validate();
                 return plan;
             }),
             py::arg("model"), py::arg("x0"), py::arg("grid"), py::arg("payoff"), py::arg("dp"),
             py::arg("train_paths"), py::arg("pricing_paths"), py::arg("start_index") = 1,
             py::arg("seed") = 1);

    m.def("replicate",
          [](const RunPlan& plan, int replications) {
              return report_to_dict(replicate(plan, replications));
          },
          py::arg("plan"), py::arg("replications") = 1,
          "Independent (train, fit, fresh-price) cycles with derived seeds.");

    m.def("lattice_max_call_2d",
          [](const GbmParams& model, std::vector<double> x0, const ExerciseGrid& grid,
             double strike, int steps_per_interval) {
              LatticeParams params;
              params.model = model;
              params.x0 = std::move(x0);
              params.grid = grid;
              params.strike = strike;
              params.steps_per_interval = steps_per_interval;
              return lattice_max_call_2d(params);
          },
          py::arg("model"), py::arg("x0"), py::arg("grid"), py::arg("strike"),
          py::arg("steps_per_interval") = 300);

    m.def("power_put_c0",
          [](double strike, double alpha, double sigma, double delta_t, double x) {
              return power_put_c0({strike, alpha, sigma, delta_t}, x);
          },
          py::arg("strike"), py::arg("alpha"), py::arg("sigma"), py::arg("delta_t"), py::arg("x"));

    m.def("boundary_alpha_fit",
          [](std::vector<double> margins, std::vector<double> deltas) {
              const auto fit = boundary_alpha_fit(margins, deltas);
              py::dict out;
              out["alpha_hat"] = fit.alpha_hat;
              out["intercept"] = fit.intercept;
              out["zero_fraction"] = fit.zero_fraction;
              out["infinite"] = fit.infinite;
              out["deltas"] = fit.deltas;
              out["p"] = fit.p;
              out["hits"] = fit.hits;
              return out;
          },
          py::arg("margins"), py::arg("delta_grid"));
}
