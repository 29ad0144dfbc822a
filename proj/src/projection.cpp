#include "longrisk/projection.hpp"

#include "longrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace longrisk {

DriftModel fit_drift(const Eigen::VectorXd& k, const std::vector<int>& years) {
    const auto n = static_cast<Eigen::Index>(years.size());
    if (k.size() != n) {
        throw ArgumentError("drift fit: k has " + std::to_string(k.size()) + " entries but " +
                            std::to_string(n) + " years were given");
    }
    if (n < 3) {
        throw ArgumentError("drift fit needs at least 3 observations, got " + std::to_string(n));
    }

    double t_mean = 0.0;
    for (int y : years) t_mean += y;
    t_mean /= static_cast<double>(n);
    const double k_mean = k.mean();

    double sxx = 0.0;
    double sxy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dt = years[static_cast<size_t>(i)] - t_mean;
        sxx += dt * dt;
        sxy += dt * (k(i) - k_mean);
    }
    if (sxx <= 0.0) {
        throw ArgumentError("drift fit: all observation years are identical");
    }

    DriftModel drift;
    drift.a = sxy / sxx;
    drift.b = k_mean - drift.a * t_mean;
    drift.n_obs = static_cast<int>(n);
    drift.year_min = *std::min_element(years.begin(), years.end());
    drift.year_max = *std::max_element(years.begin(), years.end());

    double ssr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double resid = k(i) - (drift.a * years[static_cast<size_t>(i)] + drift.b);
        ssr += resid * resid;
    }
    const double s2 = ssr / static_cast<double>(n - 2);
    drift.sigma_gamma = std::sqrt(s2);

    // Var(a) = s^2 / Sxx, Var(b) = s^2 (1/n + t_mean^2 / Sxx), Cov = -s^2 t_mean / Sxx.
    drift.cov_ab(0, 0) = s2 / sxx;
    drift.cov_ab(0, 1) = -s2 * t_mean / sxx;
    drift.cov_ab(1, 0) = drift.cov_ab(0, 1);
    drift.cov_ab(1, 1) = s2 * (1.0 / static_cast<double>(n) + t_mean * t_mean / sxx);
    return drift;
}

DriftModel fit_drift(const LeeCarterModel& model) {
    std::vector<int> years;
    years.reserve(static_cast<size_t>(model.n_years()));
    for (int y = model.year_min; y <= model.year_max; ++y) years.push_back(y);
    return fit_drift(model.k, years);
}

DriftModel reference_drift() {
    DriftModel drift;
    drift.a = -2.05775;
    drift.b = 4059.94439;
    drift.sigma_gamma = 3.9388782;
    drift.n_obs = 56;
    drift.year_min = 1950;
    drift.year_max = 2005;
    // Covariance reconstructed from the fit window geometry.
    const double n = drift.n_obs;
    const double t_mean = 0.5 * (drift.year_min + drift.year_max);
    double sxx = 0.0;
    for (int y = drift.year_min; y <= drift.year_max; ++y) {
        sxx += (y - t_mean) * (y - t_mean);
    }
    const double s2 = drift.sigma_gamma * drift.sigma_gamma;
    drift.cov_ab(0, 0) = s2 / sxx;
    drift.cov_ab(0, 1) = -s2 * t_mean / sxx;
    drift.cov_ab(1, 0) = drift.cov_ab(0, 1);
    drift.cov_ab(1, 1) = s2 * (1.0 / n + t_mean * t_mean / sxx);
    return drift;
}

Eigen::VectorXd extrapolate_k(const DriftModel& drift, const std::vector<int>& future_years) {
    Eigen::VectorXd k(static_cast<Eigen::Index>(future_years.size()));
    for (size_t i = 0; i < future_years.size(); ++i) {
        const int y = future_years[i];
        if (y <= drift.year_max) {
            throw ArgumentError("extrapolation year " + std::to_string(y) +
                                " is inside the fit window ending " +
                                std::to_string(drift.year_max));
        }
        k(static_cast<Eigen::Index>(i)) = drift.a * y + drift.b;
    }
    return k;
}

Eigen::VectorXd sample_k_path(const DriftModel& drift, const std::vector<int>& future_years,
                              RngStream stream, double sigma_gamma) {
    if (sigma_gamma < 0.0) {
        throw ArgumentError("sigma_gamma must be non-negative");
    }
    Eigen::VectorXd k = extrapolate_k(drift, future_years);
    if (sigma_gamma == 0.0) {
        return k;
    }
    for (size_t i = 0; i < future_years.size(); ++i) {
        RngStream year_stream = stream.substream(static_cast<uint64_t>(future_years[i]));
        k(static_cast<Eigen::Index>(i)) += sigma_gamma * year_stream.normal();
    }
    return k;
}

Eigen::VectorXd sample_k_path(const DriftModel& drift, const std::vector<int>& future_years,
                              RngStream stream) {
    return sample_k_path(drift, future_years, stream, drift.sigma_gamma);
}

Eigen::VectorXd k_path_spanning(const LeeCarterModel& model, const DriftModel& drift,
                                const std::vector<int>& years, PathMode mode,
                                RngStream stream, double sigma_gamma) {
    Eigen::VectorXd k(static_cast<Eigen::Index>(years.size()));
    for (size_t i = 0; i < years.size(); ++i) {
        const int y = years[i];
        if (y >= model.year_min && y <= model.year_max) {
            k(static_cast<Eigen::Index>(i)) = model.k(y - model.year_min);
        } else if (y > drift.year_max) {
            double value = drift.a * y + drift.b;
            if (mode == PathMode::kSampled && sigma_gamma > 0.0) {
                value += sigma_gamma * stream.substream(static_cast<uint64_t>(y)).normal();
            }
            k(static_cast<Eigen::Index>(i)) = value;
        } else {
            throw ArgumentError("year " + std::to_string(y) +
                                " precedes the fitted window and cannot be projected");
        }
    }
    return k;
}

std::pair<double, double> sample_drift_params(const DriftModel& drift, RngStream stream) {
    // Cholesky of the 2x2 covariance, with a tolerance for round-off.
    const double v11 = drift.cov_ab(0, 0);
    const double v12 = drift.cov_ab(0, 1);
    const double v22 = drift.cov_ab(1, 1);
    const double scale = std::max({std::abs(v11), std::abs(v22), 1.0});
    const double tol = 1e-12 * scale;
    if (v11 < -tol || v22 < -tol) {
        throw NumericError("drift covariance has a negative diagonal");
    }
    const double l11 = std::sqrt(std::max(v11, 0.0));
    double l21 = 0.0;
    double l22sq = std::max(v22, 0.0);
    if (l11 > 0.0) {
        l21 = v12 / l11;
        l22sq = v22 - l21 * l21;
    } else if (std::abs(v12) > tol) {
        throw NumericError("drift covariance is not positive semi-definite");
    }
    if (l22sq < -tol) {
        throw NumericError("drift covariance is not positive semi-definite");
    }
    const double l22 = std::sqrt(std::max(l22sq, 0.0));

    const double z1 = stream.normal();
    const double z2 = stream.normal();
    return {drift.a + l11 * z1, drift.b + l21 * z1 + l22 * z2};
}

std::string to_string(SurfaceKind kind) {
    switch (kind) {
        case SurfaceKind::kDeterministic: return "deterministic";
        case SurfaceKind::kStochasticRaw: return "stochastic_raw";
        case SurfaceKind::kStochasticCorrected: return "stochastic_corrected";
    }
    throw ArgumentError("unknown surface kind");
}

SurfaceKind surface_kind_from_string(const std::string& name) {
    if (name == "deterministic") return SurfaceKind::kDeterministic;
    if (name == "stochastic_raw") return SurfaceKind::kStochasticRaw;
    if (name == "stochastic_corrected") return SurfaceKind::kStochasticCorrected;
    throw ArgumentError("unknown surface kind '" + name + "'");
}

MortalitySurface ProjectedSurface::to_surface() const {
    MortalitySurface surface;
    surface.age_min = base_model->age_min;
    surface.age_max = base_model->age_max;
    surface.year_min = year_start;
    surface.year_max = year_end;
    surface.q = q_future;
    return surface;
}

ProjectedSurface build_surface(std::shared_ptr<const LeeCarterModel> model,
                               const std::vector<int>& years, const Eigen::VectorXd& k_path,
                               bool corrected, double sigma_gamma) {
    if (!model) {
        throw ArgumentError("build_surface: model is null");
    }
    if (years.empty()) {
        throw ArgumentError("build_surface: no years given");
    }
    if (k_path.size() != static_cast<Eigen::Index>(years.size())) {
        throw ArgumentError("build_surface: k path length does not match the years");
    }
    for (size_t i = 1; i < years.size(); ++i) {
        if (years[i] != years[i - 1] + 1) {
            throw ArgumentError("build_surface: years must be consecutive");
        }
    }
    if (!k_path.allFinite()) {
        throw DomainError("build_surface: k path contains non-finite values");
    }

    const Eigen::Index n_ages = model->alpha.size();
    ProjectedSurface out;
    out.base_model = model;
    out.year_start = years.front();
    out.year_end = years.back();
    out.k_path = k_path;
    out.kind = corrected ? SurfaceKind::kStochasticCorrected : SurfaceKind::kStochasticRaw;
    out.q_future.resize(n_ages, static_cast<Eigen::Index>(years.size()));

    Eigen::VectorXd base = model->alpha;
    if (corrected) {
        const double half_var = 0.5 * sigma_gamma * sigma_gamma;
        base -= half_var * model->beta.cwiseProduct(model->beta);
    }
    for (Eigen::Index j = 0; j < out.q_future.cols(); ++j) {
        for (Eigen::Index i = 0; i < n_ages; ++i) {
            const double mu = std::exp(base(i) + model->beta(i) * k_path(j));
            out.q_future(i, j) = mu_to_q(mu);
        }
    }
    return out;
}

ProjectedSurface project_deterministic(std::shared_ptr<const LeeCarterModel> model,
                                       const DriftModel& drift, int year_start, int year_end) {
    if (!model) {
        throw ArgumentError("project_deterministic: model is null");
    }
    if (year_end < year_start) {
        throw ArgumentError("projection window is empty");
    }
    std::vector<int> years;
    years.reserve(static_cast<size_t>(year_end - year_start + 1));
    for (int y = year_start; y <= year_end; ++y) years.push_back(y);
    const Eigen::VectorXd k = extrapolate_k(drift, years);
    ProjectedSurface out = build_surface(std::move(model), years, k, false, 0.0);
    out.kind = SurfaceKind::kDeterministic;
    return out;
}

ClosedTable project_closed_surface(const LeeCarterModel& model, const DriftModel& drift,
                                   int year_start, int year_end, int terminal_age,
                                   ClosureMethod closure) {
    auto shared = std::make_shared<const LeeCarterModel>(model);
    const ProjectedSurface projected =
        project_deterministic(shared, drift, year_start, year_end);
    return close_table(projected.to_surface(), terminal_age, closure);
}

ClosedTable draw_closed_surface(const LeeCarterModel& model, const DriftModel& drift,
                                int year_start, int year_end, int terminal_age,
                                ClosureMethod closure, double sigma_eff, bool corrected,
                                RngStream surface_stream) {
    if (sigma_eff == 0.0) {
        return project_closed_surface(model, drift, year_start, year_end, terminal_age, closure);
    }
    std::vector<int> years;
    years.reserve(static_cast<size_t>(year_end - year_start + 1));
    for (int y = year_start; y <= year_end; ++y) years.push_back(y);
    const Eigen::VectorXd k = sample_k_path(drift, years, surface_stream, sigma_eff);
    auto shared = std::make_shared<const LeeCarterModel>(model);
    const ProjectedSurface projected =
        build_surface(shared, years, k, corrected, corrected ? sigma_eff : 0.0);
    return close_table(projected.to_surface(), terminal_age, closure);
}

} // namespace longrisk
