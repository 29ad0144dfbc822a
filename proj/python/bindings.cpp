#include "longrisk/annuity_engine.hpp"
#include "longrisk/errors.hpp"
#include "longrisk/leecarter.hpp"
#include "longrisk/mortality_data.hpp"
#include "longrisk/projection.hpp"
#include "longrisk/risk_decomposition.hpp"
#include "longrisk/rng.hpp"
#include "longrisk/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

namespace py = pybind11;
using namespace longrisk;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lee-Carter mortality modelling and annuity liability risk decomposition";

    py::register_exception<Error>(m, "LongriskError");

    py::class_<MortalitySurface>(m, "MortalitySurface")
        .def(py::init<>())
        .def_readwrite("age_min", &MortalitySurface::age_min)
        .def_readwrite("age_max", &MortalitySurface::age_max)
        .def_readwrite("year_min", &MortalitySurface::year_min)
        .def_readwrite("year_max", &MortalitySurface::year_max)
        .def_readwrite("q", &MortalitySurface::q)
        .def("at", &MortalitySurface::at, py::arg("age"), py::arg("year"));

    py::class_<ClosedTable>(m, "ClosedTable")
        .def_readonly("table", &ClosedTable::table)
        .def_readonly("base_age_max", &ClosedTable::base_age_max)
        .def_readonly("terminal_age", &ClosedTable::terminal_age)
        .def("at", &ClosedTable::at, py::arg("age"), py::arg("year"));

    py::class_<LeeCarterModel>(m, "LeeCarterModel")
        .def_readonly("age_min", &LeeCarterModel::age_min)
        .def_readonly("age_max", &LeeCarterModel::age_max)
        .def_readonly("year_min", &LeeCarterModel::year_min)
        .def_readonly("year_max", &LeeCarterModel::year_max)
        .def_readonly("alpha", &LeeCarterModel::alpha)
        .def_readonly("beta", &LeeCarterModel::beta)
        .def_readonly("k", &LeeCarterModel::k)
        .def_readonly("explained_variance", &LeeCarterModel::explained_variance)
        .def_readonly("residual_sd", &LeeCarterModel::residual_sd)
        .def_readonly("degenerate", &LeeCarterModel::degenerate);

    py::class_<DriftModel>(m, "DriftModel")
        .def(py::init<>())
        .def_readwrite("a", &DriftModel::a)
        .def_readwrite("b", &DriftModel::b)
        .def_readwrite("sigma_gamma", &DriftModel::sigma_gamma)
        .def_readwrite("cov_ab", &DriftModel::cov_ab)
        .def_readwrite("n_obs", &DriftModel::n_obs)
        .def_readwrite("year_min", &DriftModel::year_min)
        .def_readwrite("year_max", &DriftModel::year_max);

    py::class_<Annuitant>(m, "Annuitant")
        .def(py::init<>())
        .def(py::init([](uint64_t id, int age, double rent) {
                 return Annuitant{id, age, rent};
             }),
             py::arg("id"), py::arg("age"), py::arg("rent"))
        .def_readwrite("id", &Annuitant::id)
        .def_readwrite("age", &Annuitant::age)
        .def_readwrite("rent", &Annuitant::rent);

    py::class_<Portfolio>(m, "Portfolio")
        .def(py::init<>())
        .def_readwrite("annuitants", &Portfolio::annuitants)
        .def_readwrite("valuation_year", &Portfolio::valuation_year);

    py::class_<SampleSummary>(m, "SampleSummary")
        .def_readonly("n", &SampleSummary::n)
        .def_readonly("mean", &SampleSummary::mean)
        .def_readonly("sd", &SampleSummary::sd)
        .def_readonly("cv", &SampleSummary::cv)
        .def_readonly("q05", &SampleSummary::q05)
        .def_readonly("q25", &SampleSummary::q25)
        .def_readonly("q75", &SampleSummary::q75)
        .def_readonly("q95", &SampleSummary::q95)
        .def_readonly("min", &SampleSummary::min)
        .def_readonly("max", &SampleSummary::max);

    py::class_<LiabilityDistribution>(m, "LiabilityDistribution")
        .def_readonly("samples", &LiabilityDistribution::samples)
        .def_readonly("seed", &LiabilityDistribution::seed)
        .def_readonly("discount_rate", &LiabilityDistribution::discount_rate)
        .def_readonly("summary", &LiabilityDistribution::summary);

    py::class_<StochasticSimOptions>(m, "StochasticSimOptions")
        .def(py::init<>())
        .def_readwrite("n_sims", &StochasticSimOptions::n_sims)
        .def_readwrite("sigma_scale", &StochasticSimOptions::sigma_scale)
        .def_readwrite("raw_bias", &StochasticSimOptions::raw_bias)
        .def_readwrite("drift_uncertainty", &StochasticSimOptions::drift_uncertainty)
        .def_readwrite("terminal_age", &StochasticSimOptions::terminal_age)
        .def_readwrite("seed", &StochasticSimOptions::seed)
        .def_readwrite("threads", &StochasticSimOptions::threads);

    py::class_<DecompositionConfig>(m, "DecompositionConfig")
        .def(py::init<>())
        .def_readwrite("n_outer", &DecompositionConfig::n_outer)
        .def_readwrite("m_inner", &DecompositionConfig::m_inner)
        .def_readwrite("sigma_scale", &DecompositionConfig::sigma_scale)
        .def_readwrite("convergence_threshold", &DecompositionConfig::convergence_threshold)
        .def_readwrite("max_rounds", &DecompositionConfig::max_rounds)
        .def_readwrite("seed", &DecompositionConfig::seed)
        .def_readwrite("threads", &DecompositionConfig::threads)
        .def_readwrite("drift_uncertainty", &DecompositionConfig::drift_uncertainty)
        .def_readwrite("terminal_age", &DecompositionConfig::terminal_age);

    py::class_<DecompositionRound>(m, "DecompositionRound")
        .def_readonly("round", &DecompositionRound::round)
        .def_readonly("n_outer", &DecompositionRound::n_outer)
        .def_readonly("m_inner", &DecompositionRound::m_inner)
        .def_readonly("within", &DecompositionRound::within)
        .def_readonly("between_raw", &DecompositionRound::between_raw)
        .def_readonly("between", &DecompositionRound::between)
        .def_readonly("total", &DecompositionRound::total)
        .def_readonly("omega", &DecompositionRound::omega)
        .def_readonly("grand_mean", &DecompositionRound::grand_mean);

    py::class_<DecompositionResult>(m, "DecompositionResult")
        .def_readonly("within", &DecompositionResult::within)
        .def_readonly("between_raw", &DecompositionResult::between_raw)
        .def_readonly("between", &DecompositionResult::between)
        .def_readonly("total", &DecompositionResult::total)
        .def_readonly("omega", &DecompositionResult::omega)
        .def_readonly("grand_mean", &DecompositionResult::grand_mean)
        .def_readonly("n_outer", &DecompositionResult::n_outer)
        .def_readonly("m_inner", &DecompositionResult::m_inner)
        .def_readonly("rounds", &DecompositionResult::rounds)
        .def_readonly("converged", &DecompositionResult::converged)
        .def_readonly("trace", &DecompositionResult::trace);

    py::class_<OmegaCurvePoint>(m, "OmegaCurvePoint")
        .def_readonly("sigma_scale", &OmegaCurvePoint::sigma_scale)
        .def_readonly("size_scale", &OmegaCurvePoint::size_scale)
        .def_readonly("omega", &OmegaCurvePoint::omega)
        .def_readonly("within", &OmegaCurvePoint::within)
        .def_readonly("between", &OmegaCurvePoint::between)
        .def_readonly("total", &OmegaCurvePoint::total)
        .def_readonly("rounds", &OmegaCurvePoint::rounds);

    py::class_<SyntheticWorldOptions>(m, "SyntheticWorldOptions")
        .def(py::init<>())
        .def_readwrite("age_min", &SyntheticWorldOptions::age_min)
        .def_readwrite("age_max", &SyntheticWorldOptions::age_max)
        .def_readwrite("year_min", &SyntheticWorldOptions::year_min)
        .def_readwrite("year_max", &SyntheticWorldOptions::year_max)
        .def_readwrite("alpha_base", &SyntheticWorldOptions::alpha_base)
        .def_readwrite("alpha_slope", &SyntheticWorldOptions::alpha_slope)
        .def_readwrite("k_slope", &SyntheticWorldOptions::k_slope)
        .def_readwrite("k_noise_sd", &SyntheticWorldOptions::k_noise_sd)
        .def_readwrite("cell_noise_sd", &SyntheticWorldOptions::cell_noise_sd)
        .def_readwrite("seed", &SyntheticWorldOptions::seed);

    py::class_<SyntheticPortfolioOptions>(m, "SyntheticPortfolioOptions")
        .def(py::init<>())
        .def_readwrite("size", &SyntheticPortfolioOptions::size)
        .def_readwrite("mean_age", &SyntheticPortfolioOptions::mean_age)
        .def_readwrite("age_sd", &SyntheticPortfolioOptions::age_sd)
        .def_readwrite("mean_rent", &SyntheticPortfolioOptions::mean_rent)
        .def_readwrite("rent_log_sd", &SyntheticPortfolioOptions::rent_log_sd)
        .def_readwrite("valuation_year", &SyntheticPortfolioOptions::valuation_year)
        .def_readwrite("seed", &SyntheticPortfolioOptions::seed);

    m.def("load_mortality_csv",
          [](const std::filesystem::path& path) { return load_mortality_csv(path); },
          py::arg("path"));
    m.def("load_portfolio_csv",
          [](const std::filesystem::path& path) { return load_portfolio_csv(path); },
          py::arg("path"));
    m.def("q_to_mu", &q_to_mu, py::arg("q"));
    m.def("mu_to_q", &mu_to_q, py::arg("mu"));
    m.def("close_table",
          [](const MortalitySurface& surface, int terminal_age) {
              return close_table(surface, terminal_age);
          },
          py::arg("surface"), py::arg("terminal_age") = 120);

    m.def("fit", [](const MortalitySurface& surface) { return fit(surface); },
          py::arg("surface"));
    m.def("fit_drift", py::overload_cast<const LeeCarterModel&>(&fit_drift), py::arg("model"));
    m.def("reference_drift", &reference_drift);
    m.def("extrapolate_k", &extrapolate_k, py::arg("drift"), py::arg("years"));
    m.def("project_closed_surface",
          [](const LeeCarterModel& model, const DriftModel& drift, int year_start, int year_end,
             int terminal_age) {
              return project_closed_surface(model, drift, year_start, year_end, terminal_age,
                                            ClosureMethod::kLogisticBlend);
          },
          py::arg("model"), py::arg("drift"), py::arg("year_start"), py::arg("year_end"),
          py::arg("terminal_age") = 120);

    m.def("expected_flows", &expected_flows, py::arg("portfolio"), py::arg("table"));
    m.def("reserve", &reserve, py::arg("flows"), py::arg("discount_rate"));
    m.def("replicate", &replicate, py::arg("portfolio"), py::arg("factor"));
    m.def("simulate_lambda", &simulate_lambda, py::arg("portfolio"), py::arg("table"),
          py::arg("discount_rate"), py::arg("n_sims"), py::arg("seed") = 0,
          py::arg("threads") = 1);
    m.def("simulate_lambda_stochastic", &simulate_lambda_stochastic, py::arg("portfolio"),
          py::arg("model"), py::arg("drift"), py::arg("discount_rate"), py::arg("options"));
    m.def("summarize", &summarize, py::arg("samples"));

    m.def("nested_simulate", &nested_simulate, py::arg("portfolio"), py::arg("model"),
          py::arg("drift"), py::arg("discount_rate"), py::arg("config"));
    m.def("converge", &converge, py::arg("portfolio"), py::arg("model"), py::arg("drift"),
          py::arg("discount_rate"), py::arg("config"));
    m.def("omega_curve", &omega_curve, py::arg("portfolio"), py::arg("model"), py::arg("drift"),
          py::arg("discount_rate"), py::arg("config"), py::arg("sigma_scales"),
          py::arg("size_scales"));

    m.def("synthetic_surface", &synthetic_surface,
          py::arg("options") = SyntheticWorldOptions{});
    m.def("synthetic_portfolio", &synthetic_portfolio,
          py::arg("options") = SyntheticPortfolioOptions{});
    m.def("inverse_normal_cdf", &inverse_normal_cdf, py::arg("u"));
}
