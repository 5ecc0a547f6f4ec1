#include "eio/datagen.hpp"
#include "eio/estimators.hpp"
#include "eio/experiments.hpp"
#include "eio/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

// Records cross the boundary as plain dicts; python callers feed them
// straight into pandas or csv writers.
py::dict record_to_dict(const eio::ExperimentRecord& rec) {
    py::dict d;
    d["experiment"] = rec.experiment;
    for (const auto& [key, value] : rec.parameters) {
        d[key.c_str()] = value;
    }
    if (!rec.stat_label.empty()) {
        d["stat"] = rec.stat_label;
    }
    d["mean"] = rec.statistic_mean;
    d["sd"] = rec.statistic_sd;
    if (!std::isnan(rec.statistic_q90)) d["q90"] = rec.statistic_q90;
    if (!std::isnan(rec.bound_value)) d["bound_value"] = rec.bound_value;
    d["replicates"] = rec.replicates;
    d["skipped"] = rec.skipped;
    return d;
}

py::list records_to_list(const std::vector<eio::ExperimentRecord>& records) {
    py::list out;
    for (const auto& rec : records) {
        out.append(record_to_dict(rec));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "error-in-operator regression: estimators, leading-term formulas and "
              "experiment drivers";

    py::register_exception<eio::Error>(m, "EioError", PyExc_RuntimeError);

    py::class_<eio::ValidatedSpec>(m, "ValidatedSpec")
        .def_property_readonly("dim", &eio::ValidatedSpec::dim)
        .def_property_readonly("spectrum", &eio::ValidatedSpec::spectrum)
        .def_property_readonly("theta_circ", &eio::ValidatedSpec::theta_circ)
        .def_property_readonly("noise_std", &eio::ValidatedSpec::noise_std);

    m.def(
        "sine_spec",
        [](eio::Index dim, const eio::Vector& theta, double noise_std) {
            return eio::validate_spec(eio::DesignSpec::sine(dim, theta, noise_std));
        },
        py::arg("dim"), py::arg("theta_circ"), py::arg("noise_std"));
    m.def(
        "gaussian_spec",
        [](const eio::Vector& spectrum, const eio::Vector& theta, double noise_std) {
            return eio::validate_spec(eio::DesignSpec::gaussian(spectrum, theta, noise_std));
        },
        py::arg("spectrum"), py::arg("theta_circ"), py::arg("noise_std"));

    py::class_<eio::Dataset>(m, "Dataset")
        .def_readonly("x", &eio::Dataset::x)
        .def_readonly("y", &eio::Dataset::y)
        .def_property_readonly("n", &eio::Dataset::n)
        .def_property_readonly("dim", &eio::Dataset::dim);

    py::class_<eio::SufficientStats>(m, "SufficientStats")
        .def_readonly("z", &eio::SufficientStats::z)
        .def_readonly("sigma_hat", &eio::SufficientStats::sigma_hat)
        .def_property_readonly("u", [](const eio::SufficientStats& s) {
            return s.u.has_value() ? py::cast(*s.u) : py::none().cast<py::object>();
        });

    py::class_<eio::Hyperparams>(m, "Hyperparams")
        .def(py::init<>())
        .def_readwrite("mu", &eio::Hyperparams::mu)
        .def_readwrite("lambda_", &eio::Hyperparams::lambda)
        .def_readwrite("tau", &eio::Hyperparams::tau)
        .def_readwrite("max_iter", &eio::Hyperparams::max_iter)
        .def_readwrite("tol", &eio::Hyperparams::tol);

    py::class_<eio::Triplet>(m, "Triplet")
        .def_readonly("theta", &eio::Triplet::theta)
        .def_readonly("eta", &eio::Triplet::eta)
        .def_readonly("a", &eio::Triplet::a);

    py::class_<eio::FitReport>(m, "FitReport")
        .def_readonly("estimate", &eio::FitReport::estimate)
        .def_readonly("objective_trace", &eio::FitReport::objective_trace)
        .def_readonly("theta_residuals", &eio::FitReport::theta_residuals)
        .def_readonly("iterations", &eio::FitReport::iterations)
        .def_readonly("converged", &eio::FitReport::converged);

    py::class_<eio::PopulationStats>(m, "PopulationStats")
        .def_static("from_spec", &eio::PopulationStats::from_spec)
        .def_readonly("sigma", &eio::PopulationStats::sigma)
        .def_readonly("ez", &eio::PopulationStats::ez);

    m.def(
        "gen_design",
        [](const eio::ValidatedSpec& spec, eio::Index n, std::uint64_t seed,
           std::uint64_t stream_id) {
            eio::RngStream rng(seed, stream_id);
            return eio::gen_design(spec, n, rng);
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"), py::arg("stream_id") = 0);
    m.def("true_covariance", &eio::true_covariance, py::arg("spec"));
    m.def(
        "sufficient_stats",
        [](const eio::Dataset& data, const eio::ValidatedSpec* spec) {
            return spec == nullptr ? eio::sufficient_stats(data)
                                   : eio::sufficient_stats(data, *spec);
        },
        py::arg("data"), py::arg("spec") = nullptr);

    m.def("objective_empirical", &eio::objective_empirical, py::arg("stats"), py::arg("hp"),
          py::arg("v"));
    m.def("objective_population", &eio::objective_population, py::arg("pop"), py::arg("hp"),
          py::arg("v"));
    m.def("theta_update", &eio::theta_update, py::arg("a"), py::arg("z"), py::arg("lambda_"));
    m.def("a_update", &eio::a_update, py::arg("sigma_hat"), py::arg("z"), py::arg("theta"),
          py::arg("mu"));
    m.def("eio_fit", &eio::eio_fit, py::arg("stats"), py::arg("hp"));
    m.def("population_fit", &eio::population_fit, py::arg("pop"), py::arg("hp"));
    m.def("plugin_fit", &eio::plugin_fit, py::arg("stats"), py::arg("lambda_"));
    m.def("ridge_fit", &eio::ridge_fit, py::arg("data"), py::arg("tau"));

    m.def("bias_leading_term", &eio::bias_leading_term, py::arg("sigma"),
          py::arg("theta_circ"), py::arg("lambda_"));
    m.def(
        "variance_leading_term",
        [](const eio::Matrix& sigma, const eio::Matrix& sigma_hat, const eio::Vector& u,
           const eio::Vector& b_lambda, double lambda) {
            const auto out = eio::variance_leading_term(sigma, sigma_hat, u, b_lambda, lambda);
            return py::make_tuple(out.zeta, out.zeta_tilde);
        },
        py::arg("sigma"), py::arg("sigma_hat"), py::arg("u"), py::arg("b_lambda"),
        py::arg("lambda_"));
    m.def("excess_risk", &eio::excess_risk, py::arg("sigma"), py::arg("theta_hat"),
          py::arg("theta_circ"));
    m.def(
        "spectral_summary",
        [](const eio::Vector& spectrum, double lambda) {
            const auto ss = eio::spectral_summary(spectrum, lambda);
            py::dict d;
            d["eff_rank"] = ss.eff_rank;
            d["k_star"] = ss.k_star;
            d["r2"] = ss.r2;
            d["r4"] = ss.r4;
            return d;
        },
        py::arg("spectrum"), py::arg("lambda_"));

    py::class_<eio::BoundConfig>(m, "BoundConfig")
        .def(py::init<>())
        .def_readwrite("c_x", &eio::BoundConfig::c_x)
        .def_readwrite("sigma_psi1", &eio::BoundConfig::sigma_psi1)
        .def_readwrite("delta", &eio::BoundConfig::delta);

    m.def("psi_bound", &eio::psi_bound, py::arg("n"), py::arg("cfg"), py::arg("sigma"),
          py::arg("theta_circ"));
    m.def("risk_bound_rhs", &eio::risk_bound_rhs, py::arg("n"), py::arg("cfg"),
          py::arg("sigma"), py::arg("theta_circ"), py::arg("mu"), py::arg("lambda_"));
    m.def(
        "concentration_bound_cov",
        [](const eio::Matrix& a, const eio::Matrix& b, const eio::Matrix& sigma,
           const eio::BoundConfig& cfg, eio::Index n) {
            const auto out = eio::concentration_bound_cov(a, b, sigma, cfg, n);
            return py::make_tuple(out.value, out.precondition_ok);
        },
        py::arg("a"), py::arg("b"), py::arg("sigma"), py::arg("cfg"), py::arg("n"));
    m.def(
        "concentration_bound_noise",
        [](const eio::Matrix& b, const eio::Matrix& sigma, const eio::BoundConfig& cfg,
           eio::Index n) {
            const auto out = eio::concentration_bound_noise(b, sigma, cfg, n);
            return py::make_tuple(out.value, out.precondition_ok);
        },
        py::arg("b"), py::arg("sigma"), py::arg("cfg"), py::arg("n"));

    m.def(
        "ratio_bias_experiment",
        [](const eio::ValidatedSpec& spec, const eio::Hyperparams& base,
           const std::vector<double>& mu_grid, const std::vector<double>& lambda_grid) {
            return records_to_list(eio::ratio_bias_experiment(spec, base, mu_grid, lambda_grid));
        },
        py::arg("spec"), py::arg("base"), py::arg("mu_grid"), py::arg("lambda_grid"));

    m.def("default_lambda_grid", &eio::default_lambda_grid);
    m.def("default_mu_grid", &eio::default_mu_grid);

    m.attr("MU_INFINITY") = eio::kMuInfinity;
}
