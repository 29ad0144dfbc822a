#pragma once

#include "longrisk/leecarter.hpp"
#include "longrisk/mortality_data.hpp"
#include "longrisk/rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <utility>
#include <vector>

namespace longrisk {

/// Affine trend of the time index: k_t = a*t + b + gamma_t with gamma_t
/// i.i.d. N(0, sigma_gamma^2). Regression is on the absolute calendar year.
struct DriftModel {
    double a = 0.0;
    double b = 0.0;
    double sigma_gamma = 0.0;
    Eigen::Matrix2d cov_ab = Eigen::Matrix2d::Zero(); // OLS covariance of (a, b)
    int n_obs = 0;
    int year_min = 0; // fit window
    int year_max = 0;
};

/// OLS fit of k on calendar year; sigma_gamma uses the (n-2) denominator.
DriftModel fit_drift(const Eigen::VectorXd& k, const std::vector<int>& years);
DriftModel fit_drift(const LeeCarterModel& model);

/// Reference drift parameters from a fit to the INED French female series;
/// documented defaults, useful for quick experiments without data files.
DriftModel reference_drift();

/// Deterministic extrapolation k_t = a*t + b. Every year must lie beyond the
/// fit window; historical k values come from the fitted model instead.
Eigen::VectorXd extrapolate_k(const DriftModel& drift, const std::vector<int>& future_years);

/// Stochastic path: the extrapolation line plus i.i.d. Gaussian noise, one
/// substream per calendar year (so the draw for a year does not depend on
/// which other years are evaluated). sigma_gamma == 0 returns the line
/// bit-for-bit.
Eigen::VectorXd sample_k_path(const DriftModel& drift, const std::vector<int>& future_years,
                              RngStream stream, double sigma_gamma);
Eigen::VectorXd sample_k_path(const DriftModel& drift, const std::vector<int>& future_years,
                              RngStream stream);

/// k values for arbitrary years: fitted k inside the model's window, the
/// drift line beyond it, with noise (when sampled) only beyond the window.
enum class PathMode { kDeterministic, kSampled };
Eigen::VectorXd k_path_spanning(const LeeCarterModel& model, const DriftModel& drift,
                                const std::vector<int>& years, PathMode mode,
                                RngStream stream, double sigma_gamma);

/// One draw of (a, b) from the bivariate normal with mean (a, b) and the OLS
/// covariance. Throws NumericError when cov_ab is not positive semi-definite.
std::pair<double, double> sample_drift_params(const DriftModel& drift, RngStream stream);

enum class SurfaceKind { kDeterministic, kStochasticRaw, kStochasticCorrected };

std::string to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

/// Future death probabilities built from a Lee-Carter model and a k path.
struct ProjectedSurface {
    std::shared_ptr<const LeeCarterModel> base_model;
    int year_start = 0;
    int year_end = 0;
    Eigen::MatrixXd q_future; // model ages x horizon years
    SurfaceKind kind = SurfaceKind::kDeterministic;
    Eigen::VectorXd k_path;

    /// View the projection as a plain surface (same grid conventions).
    MortalitySurface to_surface() const;
};

/// Hazards exp(alpha_x + beta_x k_t), optionally with the lognormal-mean
/// correction term -beta_x^2 sigma_gamma^2 / 2 so that the expected hazard
/// over k draws equals the trend hazard. Hazards convert to q via mu_to_q.
ProjectedSurface build_surface(std::shared_ptr<const LeeCarterModel> model,
                               const std::vector<int>& years, const Eigen::VectorXd& k_path,
                               bool corrected, double sigma_gamma);

/// Deterministic projection over [year_start, year_end] (kind = deterministic).
ProjectedSurface project_deterministic(std::shared_ptr<const LeeCarterModel> model,
                                       const DriftModel& drift, int year_start, int year_end);

/// Deterministic projection, closed to the terminal age.
ClosedTable project_closed_surface(const LeeCarterModel& model, const DriftModel& drift,
                                   int year_start, int year_end, int terminal_age,
                                   ClosureMethod closure);

/// One stochastic surface draw over [year_start, year_end], closed to the
/// terminal age. `corrected == true` applies the bias correction with the
/// same effective sigma used for the noise. With sigma_eff == 0 the result
/// is bit-identical to project_closed_surface.
ClosedTable draw_closed_surface(const LeeCarterModel& model, const DriftModel& drift,
                                int year_start, int year_end, int terminal_age,
                                ClosureMethod closure, double sigma_eff, bool corrected,
                                RngStream surface_stream);

} // namespace longrisk
