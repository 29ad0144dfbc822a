#pragma once

#include "longrisk/mortality_data.hpp"

#include <Eigen/Dense>

namespace longrisk {

/// Controls for the rank-1 fit iteration.
struct FitOptions {
    double convergence_tol = 1e-12; // angle tolerance between successive singular vectors
    int max_iterations = 10000;
};

/// Log-bilinear decomposition ln mu(x,t) = alpha_x + beta_x * k_t.
///
/// Identifiability: sum(beta) == 1 (within 1e-10) and sum(k) == 0 (within
/// 1e-8 * n_years). `degenerate` marks surfaces with no temporal signal, for
/// which k == 0 and beta is uniform.
struct LeeCarterModel {
    int age_min = 0;
    int age_max = 0;
    int year_min = 0;
    int year_max = 0;
    Eigen::VectorXd alpha; // per age
    Eigen::VectorXd beta;  // per age
    Eigen::VectorXd k;     // per year
    double explained_variance = 0.0;
    double residual_sd = 0.0;
    bool degenerate = false;
    FitOptions fit_options;

    int n_ages() const { return age_max - age_min + 1; }
    int n_years() const { return year_max - year_min + 1; }
};

struct LeeCarterParams {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    Eigen::VectorXd k;
};

/// ln mu(x,t) for every cell of a validated surface.
Eigen::MatrixXd log_hazard(const MortalitySurface& surface);

/// Least-squares Lee-Carter fit: alpha at row means of ln mu, then the
/// dominant singular triplet of the row-centered matrix by power iteration,
/// then constraint normalization. Attains the global minimum of the summed
/// squared residuals under the identifiability constraints.
LeeCarterModel fit(const MortalitySurface& surface, const FitOptions& options = {});

/// Apply the invariance transformations so that sum(beta) == 1 and
/// sum(k) == 0 while every fitted value alpha_x + beta_x * k_t is unchanged.
/// Throws DegeneracyError when sum(beta) == 0.
LeeCarterParams normalize_constraints(const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta,
                                      const Eigen::VectorXd& k);

/// Residuals ln mu(x,t) - alpha_x - beta_x * k_t over the fit grid.
Eigen::MatrixXd residual_matrix(const LeeCarterModel& model, const MortalitySurface& surface);

} // namespace longrisk
