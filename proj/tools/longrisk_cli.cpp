#include "longrisk/annuity_engine.hpp"
#include "longrisk/errors.hpp"
#include "longrisk/leecarter.hpp"
#include "longrisk/mortality_data.hpp"
#include "longrisk/projection.hpp"
#include "longrisk/risk_decomposition.hpp"
#include "longrisk/serialization.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitInternal = 4;

json load_config_file(const std::string& path) {
    if (path.empty()) {
        return json::object();
    }
    const json j = longrisk::load_json(path);
    if (!j.is_object()) {
        throw longrisk::StructuralError("config file must hold a JSON object: " + path);
    }
    return j;
}

const json* config_lookup(const json& cfg, const std::string& flag) {
    // flag is the long name, e.g. "--discount-rate"; accept both hyphen and
    // underscore spellings in the file
    std::string key = flag.substr(2);
    if (cfg.contains(key)) {
        return &cfg[key];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    if (cfg.contains(key)) {
        return &cfg[key];
    }
    return nullptr;
}

template <typename T>
void fill_option(CLI::App* cmd, const json& cfg, const std::string& flag, T& value) {
    if (cmd->count(flag) > 0) {
        return; // command line wins
    }
    if (const json* entry = config_lookup(cfg, flag)) {
        try {
            value = entry->get<T>();
        } catch (const json::exception&) {
            throw longrisk::ArgumentError("config value for " + flag + " has the wrong type");
        }
    }
}

void require_path(const std::string& value, const std::string& flag) {
    if (value.empty()) {
        throw longrisk::ArgumentError("missing required option " + flag);
    }
}

fs::path prepare_out_dir(const std::string& out_dir) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw longrisk::IoError("cannot create output directory " + dir.string() + ": " +
                                ec.message());
    }
    return dir;
}

struct FitArgs {
    std::string mortality;
    std::string out_dir = ".";
    std::string config;
    int age_min = -1;
    int age_max = -1;
};

int cmd_fit(const FitArgs& args) {
    const fs::path out = prepare_out_dir(args.out_dir);
    longrisk::MortalitySurface surface = longrisk::load_mortality_csv(args.mortality);
    if (args.age_min >= 0 || args.age_max >= 0) {
        const int lo = args.age_min >= 0 ? args.age_min : surface.age_min;
        const int hi = args.age_max >= 0 ? args.age_max : surface.age_max;
        surface = longrisk::restrict_ages(surface, lo, hi);
    }

    const longrisk::LeeCarterModel model = longrisk::fit(surface);
    const longrisk::DriftModel drift = longrisk::fit_drift(model);
    const Eigen::MatrixXd residuals = longrisk::residual_matrix(model, surface);

    json config = {
        {"command", "fit"},
        {"mortality", args.mortality},
        {"age_min", surface.age_min},
        {"age_max", surface.age_max},
        {"out_dir", args.out_dir},
    };
    longrisk::save_model_json(out / "model.json", model, drift, config);
    longrisk::write_residuals_csv(out / "residuals.csv", residuals, model.age_min,
                                  model.year_min, config);

    json report = {
        {"age_min", model.age_min},
        {"age_max", model.age_max},
        {"year_min", model.year_min},
        {"year_max", model.year_max},
        {"explained_variance", model.explained_variance},
        {"residual_sd", model.residual_sd},
        {"degenerate", model.degenerate},
        {"drift_a", drift.a},
        {"drift_b", drift.b},
        {"sigma_gamma", drift.sigma_gamma},
        {"config", config},
    };
    longrisk::save_json(out / "fit_report.json", report);
    std::cout << "fit: explained_variance=" << longrisk::format_double(model.explained_variance)
              << " sigma_gamma=" << longrisk::format_double(drift.sigma_gamma) << "\n";
    return kExitOk;
}

struct ProjectArgs {
    std::string model;
    std::string out_dir = ".";
    std::string config;
    std::string mode = "deterministic";
    int horizon = 60;
    int terminal_age = 120;
    double sigma_scale = 1.0;
    bool raw_bias = false;
    std::uint64_t seed = 0;
};

int cmd_project(const ProjectArgs& args) {
    const fs::path out = prepare_out_dir(args.out_dir);
    const auto [model, drift] = longrisk::load_model_json(args.model);
    if (args.horizon < 1) {
        throw longrisk::ArgumentError("horizon must be at least 1 year");
    }
    if (args.mode != "deterministic" && args.mode != "stochastic") {
        throw longrisk::ArgumentError("mode must be deterministic or stochastic");
    }
    const int year_start = model.year_max + 1;
    const int year_end = model.year_max + args.horizon;
    const double sigma_eff = args.sigma_scale * drift.sigma_gamma;
    const bool stochastic = args.mode == "stochastic" && sigma_eff > 0.0;

    auto shared = std::make_shared<const longrisk::LeeCarterModel>(model);
    longrisk::ProjectedSurface projected;
    if (stochastic) {
        std::vector<int> years;
        for (int y = year_start; y <= year_end; ++y) years.push_back(y);
        const Eigen::VectorXd k = longrisk::sample_k_path(
            drift, years, longrisk::RngStream(args.seed).substream(longrisk::kStreamSurface),
            sigma_eff);
        projected = longrisk::build_surface(shared, years, k, !args.raw_bias,
                                            args.raw_bias ? 0.0 : sigma_eff);
    } else {
        projected = longrisk::project_deterministic(shared, drift, year_start, year_end);
    }
    const longrisk::ClosedTable closed =
        longrisk::close_table(projected.to_surface(), args.terminal_age);

    json config = {
        {"command", "project"},
        {"model", args.model},
        {"mode", stochastic ? "stochastic" : "deterministic"},
        {"year_start", year_start},
        {"year_end", year_end},
        {"terminal_age", args.terminal_age},
        {"sigma_scale", stochastic ? args.sigma_scale : 0.0},
        {"raw_bias", stochastic ? args.raw_bias : false},
        {"seed", args.seed},
        {"out_dir", args.out_dir},
    };
    longrisk::write_surface_csv(out / "projected_surface.csv", projected.to_surface(), config);
    longrisk::write_surface_csv(out / "closed_table.csv", closed.table, config);

    json sidecar = {
        {"kind", longrisk::to_string(projected.kind)},
        {"sigma_gamma", drift.sigma_gamma},
        {"sigma_scale", stochastic ? args.sigma_scale : 0.0},
        {"seed", args.seed},
        {"drift", {{"a", drift.a}, {"b", drift.b}, {"sigma_gamma", drift.sigma_gamma}}},
        {"year_start", year_start},
        {"year_end", year_end},
        {"terminal_age", args.terminal_age},
        {"closure", longrisk::to_string(closed.method)},
        {"config", config},
    };
    longrisk::save_json(out / "projected_surface.json", sidecar);
    std::cout << "project: years " << year_start << ".." << year_end << " ("
              << longrisk::to_string(projected.kind) << ")\n";
    return kExitOk;
}

struct SimulateArgs {
    std::string model;
    std::string portfolio;
    std::string out_dir = ".";
    std::string config;
    std::string mode = "stochastic";
    double discount_rate = 0.025;
    int terminal_age = 120;
    int valuation_year = 0; // 0 = model year_max + 1
    int sims = 20000;
    double sigma_scale = 1.0;
    bool raw_bias = false;
    bool drift_uncertainty = false;
    std::uint64_t seed = 0;
    int threads = 1;
    std::uint64_t bins = 0;
};

int cmd_simulate(const SimulateArgs& args) {
    const fs::path out = prepare_out_dir(args.out_dir);
    const auto [model, drift] = longrisk::load_model_json(args.model);
    std::vector<std::string> warnings;
    longrisk::Portfolio portfolio = longrisk::load_portfolio_csv(args.portfolio, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << args.portfolio << ": " << w << "\n";
    }
    if (args.mode != "deterministic" && args.mode != "stochastic") {
        throw longrisk::ArgumentError("mode must be deterministic or stochastic");
    }
    portfolio.valuation_year =
        args.valuation_year > 0 ? args.valuation_year : model.year_max + 1;

    // resolved (effective) mode: stochastic with no surface randomness is
    // the deterministic pipeline and is reported as such
    const bool deterministic =
        args.mode == "deterministic" ||
        (args.sigma_scale * drift.sigma_gamma == 0.0 && !args.drift_uncertainty);
    const double sigma_scale = deterministic ? 0.0 : args.sigma_scale;

    int age_min = portfolio.annuitants.front().age;
    for (const auto& a : portfolio.annuitants) age_min = std::min(age_min, a.age);
    const int year_start = portfolio.valuation_year;
    const int year_end = year_start + args.terminal_age - std::min(age_min, args.terminal_age);

    // analytic reserve on the deterministic projection, used as the
    // cross-check target in the summary
    const longrisk::ClosedTable det_table = longrisk::project_closed_surface(
        model, drift, year_start, year_end, args.terminal_age,
        longrisk::ClosureMethod::kLogisticBlend);
    const std::vector<double> flows = longrisk::expected_flows(portfolio, det_table);
    const double analytic_reserve = longrisk::reserve(flows, args.discount_rate);

    longrisk::LiabilityDistribution dist;
    if (deterministic) {
        dist = longrisk::simulate_lambda(portfolio, det_table, args.discount_rate, args.sims,
                                         args.seed, args.threads);
    } else {
        longrisk::StochasticSimOptions options;
        options.n_sims = args.sims;
        options.sigma_scale = sigma_scale;
        options.raw_bias = args.raw_bias;
        options.drift_uncertainty = args.drift_uncertainty;
        options.terminal_age = args.terminal_age;
        options.seed = args.seed;
        options.threads = args.threads;
        dist = longrisk::simulate_lambda_stochastic(portfolio, model, drift,
                                                    args.discount_rate, options);
    }

    json config = {
        {"command", "simulate"},
        {"model", args.model},
        {"portfolio", args.portfolio},
        {"mode", deterministic ? "deterministic" : "stochastic"},
        {"discount_rate", args.discount_rate},
        {"terminal_age", args.terminal_age},
        {"valuation_year", portfolio.valuation_year},
        {"sims", args.sims},
        {"sigma_scale", sigma_scale},
        {"raw_bias", deterministic ? false : args.raw_bias},
        {"drift_uncertainty", deterministic ? false : args.drift_uncertainty},
        {"seed", args.seed},
        {"threads", args.threads},
        {"bins", args.bins},
        {"out_dir", args.out_dir},
    };

    longrisk::write_samples_csv(out / "samples.csv", dist.samples, config);
    longrisk::write_flows_csv(out / "flows.csv", flows, config);
    longrisk::write_histogram_csv(out / "histogram.csv",
                                  longrisk::histogram(dist.samples, args.bins), config);

    const double mc_se = dist.summary.sd / std::sqrt(static_cast<double>(dist.summary.n));
    json summary = {
        {"summary", longrisk::summary_to_json(dist.summary)},
        {"kind", longrisk::to_string(dist.kind)},
        {"seed", args.seed},
        {"n_sims", args.sims},
        {"analytic_reserve", analytic_reserve},
        {"mc_se", mc_se},
        {"reserve_gap_in_se",
         mc_se > 0.0 ? std::abs(dist.summary.mean - analytic_reserve) / mc_se : 0.0},
        {"config", config},
    };
    longrisk::save_json(out / "summary.json", summary);
    std::cout << "simulate: mean=" << longrisk::format_double(dist.summary.mean)
              << " sd=" << longrisk::format_double(dist.summary.sd)
              << " cv=" << longrisk::format_double(dist.summary.cv) << "\n";
    return kExitOk;
}

struct DecomposeArgs {
    std::string model;
    std::string portfolio;
    std::string out_dir = ".";
    std::string config;
    double discount_rate = 0.025;
    int terminal_age = 120;
    int valuation_year = 0;
    int outer = 100;
    int inner = 200;
    std::vector<double> sigma_scales;
    std::vector<int> size_scales;
    double threshold = 1e-3;
    int max_rounds = 8;
    bool drift_uncertainty = false;
    std::uint64_t seed = 0;
    int threads = 1;
};

int cmd_decompose(const DecomposeArgs& args) {
    const fs::path out = prepare_out_dir(args.out_dir);
    const auto [model, drift] = longrisk::load_model_json(args.model);
    std::vector<std::string> warnings;
    longrisk::Portfolio portfolio = longrisk::load_portfolio_csv(args.portfolio, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << args.portfolio << ": " << w << "\n";
    }
    portfolio.valuation_year =
        args.valuation_year > 0 ? args.valuation_year : model.year_max + 1;

    const std::vector<double> sigma_scales =
        args.sigma_scales.empty() ? std::vector<double>{1.0} : args.sigma_scales;
    const std::vector<int> size_scales =
        args.size_scales.empty() ? std::vector<int>{1} : args.size_scales;

    longrisk::DecompositionConfig config;
    config.n_outer = args.outer;
    config.m_inner = args.inner;
    config.convergence_threshold = args.threshold;
    config.max_rounds = args.max_rounds;
    config.seed = args.seed;
    config.threads = args.threads;
    config.drift_uncertainty = args.drift_uncertainty;
    config.terminal_age = args.terminal_age;

    json config_echo = {
        {"command", "decompose"},
        {"model", args.model},
        {"portfolio", args.portfolio},
        {"discount_rate", args.discount_rate},
        {"terminal_age", args.terminal_age},
        {"valuation_year", portfolio.valuation_year},
        {"outer", args.outer},
        {"inner", args.inner},
        {"sigma_scales", sigma_scales},
        {"size_scales", size_scales},
        {"threshold", args.threshold},
        {"max_rounds", args.max_rounds},
        {"drift_uncertainty", args.drift_uncertainty},
        {"seed", args.seed},
        {"threads", args.threads},
        {"out_dir", args.out_dir},
    };

    try {
        // detailed result for the first cell, curve across the whole grid
        config.sigma_scale = sigma_scales.front();
        const longrisk::Portfolio first_portfolio = longrisk::replicate(
            portfolio, size_scales.front());
        const longrisk::DecompositionResult first =
            longrisk::converge(first_portfolio, model, drift, args.discount_rate, config);

        std::vector<longrisk::OmegaCurvePoint> points;
        points.push_back({sigma_scales.front(), size_scales.front(), first.omega, first.within,
                          first.between, first.total, first.rounds});
        for (size_t si = 0; si < sigma_scales.size(); ++si) {
            for (size_t zi = 0; zi < size_scales.size(); ++zi) {
                if (si == 0 && zi == 0) {
                    continue;
                }
                longrisk::DecompositionConfig cell = config;
                cell.sigma_scale = sigma_scales[si];
                const longrisk::DecompositionResult r = longrisk::converge(
                    longrisk::replicate(portfolio, size_scales[zi]), model, drift,
                    args.discount_rate, cell);
                points.push_back({sigma_scales[si], size_scales[zi], r.omega, r.within,
                                  r.between, r.total, r.rounds});
            }
        }

        json result_json = longrisk::decomposition_to_json(first);
        result_json["sigma_scale"] = sigma_scales.front();
        result_json["size_scale"] = size_scales.front();
        result_json["config"] = config_echo;
        longrisk::save_json(out / "decomposition.json", result_json);
        longrisk::write_omega_curve_csv(out / "omega_curve.csv", points, config_echo);
        std::cout << "decompose: omega=" << longrisk::format_double(first.omega) << " in "
                  << first.rounds << " rounds (" << points.size() << " curve points)\n";
        return kExitOk;
    } catch (const longrisk::DecompositionConvergenceError& e) {
        json trace = json::array();
        for (const auto& round : e.trace()) {
            trace.push_back({
                {"round", round.round},
                {"n_outer", round.n_outer},
                {"m_inner", round.m_inner},
                {"within", round.within},
                {"between_raw", round.between_raw},
                {"between", round.between},
                {"total", round.total},
                {"omega", round.omega},
                {"grand_mean", round.grand_mean},
            });
        }
        longrisk::save_json(out / "decomposition_trace.json",
                            json{{"error", e.what()}, {"trace", trace}, {"config", config_echo}});
        throw;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lee-Carter mortality fitting, projection, and annuity liability analysis"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a Lee-Carter model and its drift");
    fit->add_option("--mortality", fit_args.mortality, "Mortality CSV (age,year,qx)");
    fit->add_option("--age-min", fit_args.age_min, "Restrict fit to ages >= this");
    fit->add_option("--age-max", fit_args.age_max, "Restrict fit to ages <= this");
    fit->add_option("--out-dir", fit_args.out_dir, "Output directory");
    fit->add_option("--config", fit_args.config, "JSON config file (flags override)");

    ProjectArgs project_args;
    CLI::App* project = app.add_subcommand("project", "Project future mortality surfaces");
    project->add_option("--model", project_args.model, "Model JSON from fit");
    project->add_option("--mode", project_args.mode, "deterministic or stochastic");
    project->add_option("--horizon", project_args.horizon, "Projection years");
    project->add_option("--terminal-age", project_args.terminal_age, "Closure terminal age");
    project->add_option("--sigma-scale", project_args.sigma_scale, "Multiplier on sigma_gamma");
    project->add_flag("--raw-bias", project_args.raw_bias, "Skip the bias correction");
    project->add_option("--seed", project_args.seed, "RNG seed");
    project->add_option("--out-dir", project_args.out_dir, "Output directory");
    project->add_option("--config", project_args.config, "JSON config file (flags override)");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate the liability distribution");
    simulate->add_option("--model", sim_args.model, "Model JSON from fit");
    simulate->add_option("--portfolio", sim_args.portfolio, "Portfolio CSV (id,age,rent)");
    simulate->add_option("--mode", sim_args.mode, "deterministic or stochastic");
    simulate->add_option("--discount-rate", sim_args.discount_rate, "Annual discount rate");
    simulate->add_option("--terminal-age", sim_args.terminal_age, "Closure terminal age");
    simulate->add_option("--valuation-year", sim_args.valuation_year,
                         "Valuation year (default: first year after the fit window)");
    simulate->add_option("--sims", sim_args.sims, "Number of simulations");
    simulate->add_option("--sigma-scale", sim_args.sigma_scale, "Multiplier on sigma_gamma");
    simulate->add_flag("--raw-bias", sim_args.raw_bias, "Skip the bias correction");
    simulate->add_flag("--drift-uncertainty", sim_args.drift_uncertainty,
                       "Redraw (a, b) per scenario");
    simulate->add_option("--seed", sim_args.seed, "RNG seed");
    simulate->add_option("--threads", sim_args.threads, "Worker threads");
    simulate->add_option("--bins", sim_args.bins, "Histogram bins (0 = Freedman-Diaconis)");
    simulate->add_option("--out-dir", sim_args.out_dir, "Output directory");
    simulate->add_option("--config", sim_args.config, "JSON config file (flags override)");

    DecomposeArgs dec_args;
    CLI::App* decompose =
        app.add_subcommand("decompose", "Split liability variance into within/between parts");
    decompose->add_option("--model", dec_args.model, "Model JSON from fit");
    decompose->add_option("--portfolio", dec_args.portfolio, "Portfolio CSV (id,age,rent)");
    decompose->add_option("--discount-rate", dec_args.discount_rate, "Annual discount rate");
    decompose->add_option("--terminal-age", dec_args.terminal_age, "Closure terminal age");
    decompose->add_option("--valuation-year", dec_args.valuation_year,
                          "Valuation year (default: first year after the fit window)");
    decompose->add_option("--outer", dec_args.outer, "Outer surface draws N");
    decompose->add_option("--inner", dec_args.inner, "Inner simulations M per surface");
    decompose->add_option("--sigma-scale", dec_args.sigma_scales, "Sigma scales (repeatable)")
        ->delimiter(',');
    decompose->add_option("--size-scale", dec_args.size_scales, "Size scales (repeatable)")
        ->delimiter(',');
    decompose->add_option("--threshold", dec_args.threshold, "Convergence threshold");
    decompose->add_option("--max-rounds", dec_args.max_rounds, "Doubling-round cap");
    decompose->add_flag("--drift-uncertainty", dec_args.drift_uncertainty,
                        "Redraw (a, b) per outer scenario");
    decompose->add_option("--seed", dec_args.seed, "RNG seed");
    decompose->add_option("--threads", dec_args.threads, "Worker threads");
    decompose->add_option("--out-dir", dec_args.out_dir, "Output directory");
    decompose->add_option("--config", dec_args.config, "JSON config file (flags override)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit->parsed()) {
            const json cfg = load_config_file(fit_args.config);
            fill_option(fit, cfg, "--mortality", fit_args.mortality);
            fill_option(fit, cfg, "--age-min", fit_args.age_min);
            fill_option(fit, cfg, "--age-max", fit_args.age_max);
            fill_option(fit, cfg, "--out-dir", fit_args.out_dir);
            require_path(fit_args.mortality, "--mortality");
            return cmd_fit(fit_args);
        }
        if (project->parsed()) {
            const json cfg = load_config_file(project_args.config);
            fill_option(project, cfg, "--model", project_args.model);
            fill_option(project, cfg, "--mode", project_args.mode);
            fill_option(project, cfg, "--horizon", project_args.horizon);
            fill_option(project, cfg, "--terminal-age", project_args.terminal_age);
            fill_option(project, cfg, "--sigma-scale", project_args.sigma_scale);
            fill_option(project, cfg, "--raw-bias", project_args.raw_bias);
            fill_option(project, cfg, "--seed", project_args.seed);
            fill_option(project, cfg, "--out-dir", project_args.out_dir);
            require_path(project_args.model, "--model");
            return cmd_project(project_args);
        }
        if (simulate->parsed()) {
            const json cfg = load_config_file(sim_args.config);
            fill_option(simulate, cfg, "--model", sim_args.model);
            fill_option(simulate, cfg, "--portfolio", sim_args.portfolio);
            fill_option(simulate, cfg, "--mode", sim_args.mode);
            fill_option(simulate, cfg, "--discount-rate", sim_args.discount_rate);
            fill_option(simulate, cfg, "--terminal-age", sim_args.terminal_age);
            fill_option(simulate, cfg, "--valuation-year", sim_args.valuation_year);
            fill_option(simulate, cfg, "--sims", sim_args.sims);
            fill_option(simulate, cfg, "--sigma-scale", sim_args.sigma_scale);
            fill_option(simulate, cfg, "--raw-bias", sim_args.raw_bias);
            fill_option(simulate, cfg, "--drift-uncertainty", sim_args.drift_uncertainty);
            fill_option(simulate, cfg, "--seed", sim_args.seed);
            fill_option(simulate, cfg, "--threads", sim_args.threads);
            fill_option(simulate, cfg, "--bins", sim_args.bins);
            fill_option(simulate, cfg, "--out-dir", sim_args.out_dir);
            require_path(sim_args.model, "--model");
            require_path(sim_args.portfolio, "--portfolio");
            return cmd_simulate(sim_args);
        }
        if (decompose->parsed()) {
            const json cfg = load_config_file(dec_args.config);
            fill_option(decompose, cfg, "--model", dec_args.model);
            fill_option(decompose, cfg, "--portfolio", dec_args.portfolio);
            fill_option(decompose, cfg, "--discount-rate", dec_args.discount_rate);
            fill_option(decompose, cfg, "--terminal-age", dec_args.terminal_age);
            fill_option(decompose, cfg, "--valuation-year", dec_args.valuation_year);
            fill_option(decompose, cfg, "--outer", dec_args.outer);
            fill_option(decompose, cfg, "--inner", dec_args.inner);
            fill_option(decompose, cfg, "--sigma-scale", dec_args.sigma_scales);
            fill_option(decompose, cfg, "--size-scale", dec_args.size_scales);
            fill_option(decompose, cfg, "--threshold", dec_args.threshold);
            fill_option(decompose, cfg, "--max-rounds", dec_args.max_rounds);
            fill_option(decompose, cfg, "--drift-uncertainty", dec_args.drift_uncertainty);
            fill_option(decompose, cfg, "--seed", dec_args.seed);
            fill_option(decompose, cfg, "--threads", dec_args.threads);
            fill_option(decompose, cfg, "--out-dir", dec_args.out_dir);
            require_path(dec_args.model, "--model");
            require_path(dec_args.portfolio, "--portfolio");
            return cmd_decompose(dec_args);
        }
        std::cerr << "error: no subcommand given\n";
        return kExitInput;
    } catch (const longrisk::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const longrisk::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const longrisk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
