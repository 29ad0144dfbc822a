#include "longrisk/risk_decomposition.hpp"

#include "longrisk/errors.hpp"
#include "longrisk/parallel.hpp"
#include "longrisk/projection.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace longrisk {

namespace {

struct Welford {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / static_cast<double>(count - 1); }
};

void validate_config(const DecompositionConfig& config) {
    if (config.n_outer < 2 || config.m_inner < 2) {
        throw ArgumentError("decomposition needs n_outer >= 2 and m_inner >= 2");
    }
    if (!(config.convergence_threshold > 0.0)) {
        throw ArgumentError("convergence threshold must be positive");
    }
    if (config.sigma_scale < 0.0) {
        throw ArgumentError("sigma_scale must be non-negative");
    }
    if (config.max_rounds < 2) {
        throw ArgumentError("max_rounds must allow at least 2 rounds");
    }
}

DecompositionRound reduce_round(const std::vector<Welford>& rows, int round, int m_inner,
                                bool force_zero_between) {
    const auto n = static_cast<double>(rows.size());
    DecompositionRound out;
    out.round = round;
    out.n_outer = static_cast<int>(rows.size());
    out.m_inner = m_inner;

    double within_sum = 0.0;
    double mean_sum = 0.0;
    for (const auto& row : rows) {
        within_sum += row.variance();
        mean_sum += row.mean;
    }
    out.within = within_sum / n;
    out.grand_mean = mean_sum / n;

    double between_sum = 0.0;
    for (const auto& row : rows) {
        const double d = row.mean - out.grand_mean;
        between_sum += d * d;
    }
    out.between_raw = between_sum / (n - 1.0);
    out.between = force_zero_between
                      ? 0.0
                      : adjusted_between(out.between_raw, out.within, m_inner);
    out.total = out.within + out.between;
    out.omega = out.total > 0.0 ? std::clamp(out.between / out.total, 0.0, 1.0) : 0.0;
    return out;
}

DecompositionResult run_rows(const RowFactory& factory, const DecompositionConfig& config,
                             bool force_zero_between, bool doubling) {
    validate_config(config);

    std::vector<Welford> rows;
    std::vector<DecompositionRound> trace;
    DecompositionRound previous;

    for (int round = 0;; ++round) {
        const long long target_n = static_cast<long long>(config.n_outer) << round;
        const long long target_m = static_cast<long long>(config.m_inner) << round;
        const auto old_n = static_cast<long long>(rows.size());
        rows.resize(static_cast<size_t>(target_n));

        parallel_for(target_n, config.threads, [&](long long begin, long long end) {
            for (long long n = begin; n < end; ++n) {
                auto& row = rows[static_cast<size_t>(n)];
                if (row.count >= target_m) {
                    continue;
                }
                const InnerSampler sampler = factory(static_cast<uint64_t>(n));
                for (long long m = row.count; m < target_m; ++m) {
                    row.add(sampler(static_cast<uint64_t>(m)));
                }
            }
        });
        (void)old_n;

        const DecompositionRound current =
            reduce_round(rows, round, static_cast<int>(target_m), force_zero_between);
        trace.push_back(current);

        bool stop = false;
        if (!doubling) {
            stop = true;
        } else if (round >= 1) {
            const double omega_gap = std::abs(current.omega - previous.omega);
            double total_gap;
            if (current.total > 0.0) {
                total_gap = std::abs(current.total - previous.total) / current.total;
            } else {
                total_gap = previous.total == 0.0 ? 0.0 : 1.0;
            }
            stop = omega_gap < config.convergence_threshold &&
                   total_gap < config.convergence_threshold;
        }

        if (stop) {
            DecompositionResult result;
            result.within = current.within;
            result.between_raw = current.between_raw;
            result.between = current.between;
            result.total = current.total;
            result.omega = current.omega;
            result.grand_mean = current.grand_mean;
            result.n_outer = current.n_outer;
            result.m_inner = current.m_inner;
            result.rounds = round + 1;
            result.converged = true;
            result.trace = std::move(trace);
            return result;
        }
        if (doubling && round + 1 >= config.max_rounds) {
            throw DecompositionConvergenceError(
                "decomposition did not stabilize within " + std::to_string(config.max_rounds) +
                    " rounds (last omega " + std::to_string(current.omega) + ")",
                std::move(trace));
        }
        previous = current;
    }
}

RowFactory make_engine_factory(const Portfolio& portfolio, const LeeCarterModel& model,
                               const DriftModel& drift, double discount_rate,
                               const DecompositionConfig& config) {
    int age_min = portfolio.annuitants.front().age;
    for (const auto& a : portfolio.annuitants) {
        age_min = std::min(age_min, a.age);
    }
    const int year_start = portfolio.valuation_year;
    const int year_end =
        year_start + config.terminal_age - std::min(age_min, config.terminal_age);
    const double sigma_eff = config.sigma_scale * drift.sigma_gamma;

    const RngStream root(config.seed);
    const RngStream surface_root = root.substream(kStreamSurface);
    const RngStream deaths_root = root.substream(kStreamDeaths);
    const RngStream drift_root = root.substream(kStreamDrift);

    auto model_ptr = std::make_shared<const LeeCarterModel>(model);
    auto portfolio_ptr = std::make_shared<const Portfolio>(portfolio);
    const DriftModel base_drift = drift;
    const DecompositionConfig cfg = config;

    return [=](uint64_t n) -> InnerSampler {
        DriftModel scenario_drift = base_drift;
        if (cfg.drift_uncertainty) {
            RngStream stream = drift_root.substream(n);
            const auto [a, b] = sample_drift_params(base_drift, stream);
            scenario_drift.a = a;
            scenario_drift.b = b;
        }
        const ClosedTable table =
            draw_closed_surface(*model_ptr, scenario_drift, year_start, year_end,
                                cfg.terminal_age, cfg.closure, sigma_eff, true,
                                surface_root.substream(n));
        auto schedules = std::make_shared<const PortfolioSchedules>(
            build_schedules(*portfolio_ptr, table, discount_rate));
        const RngStream row_deaths = deaths_root.substream(n);
        return [schedules, row_deaths](uint64_t m) {
            return simulate_lambda_once(*schedules, row_deaths.substream(m));
        };
    };
}

} // namespace

double estimate_within(const Eigen::MatrixXd& lambdas) {
    if (lambdas.rows() < 1) {
        throw ArgumentError("within estimate needs at least one row");
    }
    if (lambdas.cols() < 2) {
        throw ArgumentError("within estimate needs at least 2 inner draws per row");
    }
    const double m = static_cast<double>(lambdas.cols());
    double sum = 0.0;
    for (Eigen::Index n = 0; n < lambdas.rows(); ++n) {
        const double row_mean = lambdas.row(n).mean();
        double ss = 0.0;
        for (Eigen::Index j = 0; j < lambdas.cols(); ++j) {
            const double d = lambdas(n, j) - row_mean;
            ss += d * d;
        }
        sum += ss / (m - 1.0);
    }
    return sum / static_cast<double>(lambdas.rows());
}

double estimate_between(const Eigen::MatrixXd& lambdas) {
    if (lambdas.rows() < 2) {
        throw ArgumentError("between estimate needs at least 2 rows");
    }
    const Eigen::VectorXd row_means = lambdas.rowwise().mean();
    const double grand = row_means.mean();
    double ss = 0.0;
    for (Eigen::Index n = 0; n < row_means.size(); ++n) {
        const double d = row_means(n) - grand;
        ss += d * d;
    }
    return ss / static_cast<double>(lambdas.rows() - 1);
}

double adjusted_between(double between_raw, double within, int m_inner) {
    if (m_inner < 1) {
        throw ArgumentError("m_inner must be positive");
    }
    return std::max(0.0, between_raw - within / static_cast<double>(m_inner));
}

double omega(double within, double between) {
    if (within < 0.0 || between < 0.0) {
        throw ArgumentError("variance components must be non-negative");
    }
    const double total = within + between;
    if (total <= 0.0) {
        throw DegeneracyError("zero total variance: omega is undefined");
    }
    return std::clamp(between / total, 0.0, 1.0);
}

DecompositionResult nested_simulate_rows(const RowFactory& factory,
                                         const DecompositionConfig& config,
                                         bool force_zero_between) {
    return run_rows(factory, config, force_zero_between, false);
}

DecompositionResult converge_rows(const RowFactory& factory, const DecompositionConfig& config,
                                  bool force_zero_between) {
    return run_rows(factory, config, force_zero_between, true);
}

DecompositionResult nested_simulate(const Portfolio& portfolio, const LeeCarterModel& model,
                                    const DriftModel& drift, double discount_rate,
                                    const DecompositionConfig& config) {
    validate_config(config);
    const bool degenerate =
        config.sigma_scale * drift.sigma_gamma == 0.0 && !config.drift_uncertainty;
    return nested_simulate_rows(
        make_engine_factory(portfolio, model, drift, discount_rate, config), config, degenerate);
}

DecompositionResult converge(const Portfolio& portfolio, const LeeCarterModel& model,
                             const DriftModel& drift, double discount_rate,
                             const DecompositionConfig& config) {
    validate_config(config);
    const bool degenerate =
        config.sigma_scale * drift.sigma_gamma == 0.0 && !config.drift_uncertainty;
    return converge_rows(make_engine_factory(portfolio, model, drift, discount_rate, config),
                         config, degenerate);
}

std::vector<OmegaCurvePoint> omega_curve(const Portfolio& portfolio,
                                         const LeeCarterModel& model, const DriftModel& drift,
                                         double discount_rate, const DecompositionConfig& config,
                                         const std::vector<double>& sigma_scales,
                                         const std::vector<int>& size_scales) {
    if (sigma_scales.empty() || size_scales.empty()) {
        throw ArgumentError("omega curve needs at least one sigma scale and one size scale");
    }
    std::vector<OmegaCurvePoint> points;
    points.reserve(sigma_scales.size() * size_scales.size());
    for (const double sigma_scale : sigma_scales) {
        for (const int size_scale : size_scales) {
            const Portfolio scaled = replicate(portfolio, size_scale);
            DecompositionConfig cell = config;
            cell.sigma_scale = sigma_scale;
            const DecompositionResult result =
                converge(scaled, model, drift, discount_rate, cell);
            points.push_back({sigma_scale, size_scale, result.omega, result.within,
                              result.between, result.total, result.rounds});
        }
    }
    return points;
}

} // namespace longrisk
