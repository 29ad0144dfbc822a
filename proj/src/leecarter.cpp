#include "longrisk/leecarter.hpp"

#include "longrisk/errors.hpp"

#include <cmath>

namespace longrisk {

namespace {

// Dominant singular triplet of Z by power iteration on the right side.
// Returns false when Z has no usable signal (all candidate starts collapse).
bool dominant_triplet(const Eigen::MatrixXd& z, const FitOptions& options,
                      Eigen::VectorXd& u, Eigen::VectorXd& v, double& sigma) {
    const Eigen::Index n_years = z.cols();

    // Deterministic start with a strong overlap with a temporal trend: a
    // centered ramp. Falls back to basis vectors if the ramp is orthogonal
    // to the dominant subspace.
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd ramp(n_years);
    for (Eigen::Index t = 0; t < n_years; ++t) {
        ramp(t) = static_cast<double>(t) - 0.5 * static_cast<double>(n_years - 1);
    }
    if (ramp.norm() > 0) {
        starts.push_back(ramp.normalized());
    }
    for (Eigen::Index t = 0; t < n_years; ++t) {
        starts.push_back(Eigen::VectorXd::Unit(n_years, t));
    }

    for (const auto& start : starts) {
        Eigen::VectorXd vk = start;
        bool collapsed = false;
        for (int iter = 0; iter < options.max_iterations; ++iter) {
            Eigen::VectorXd zu = z * vk;
            const double zu_norm = zu.norm();
            if (zu_norm == 0.0) {
                collapsed = true;
                break;
            }
            zu /= zu_norm;
            Eigen::VectorXd zv = z.transpose() * zu;
            const double zv_norm = zv.norm();
            if (zv_norm == 0.0) {
                collapsed = true;
                break;
            }
            Eigen::VectorXd v_next = zv / zv_norm;
            const double angle = 1.0 - std::fabs(v_next.dot(vk));
            vk = v_next;
            if (angle < options.convergence_tol) {
                u = zu;
                v = vk;
                sigma = zv_norm;
                return true;
            }
        }
        if (!collapsed) {
            throw ConvergenceError("power iteration did not converge within " +
                                   std::to_string(options.max_iterations) + " iterations");
        }
    }
    return false;
}

} // namespace

Eigen::MatrixXd log_hazard(const MortalitySurface& surface) {
    validate_surface(surface);
    Eigen::MatrixXd l(surface.q.rows(), surface.q.cols());
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        for (Eigen::Index j = 0; j < l.cols(); ++j) {
            l(i, j) = std::log(q_to_mu(surface.q(i, j)));
        }
    }
    return l;
}

LeeCarterParams normalize_constraints(const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta,
                                      const Eigen::VectorXd& k) {
    if (alpha.size() != beta.size()) {
        throw ArgumentError("alpha and beta must have equal length");
    }
    const double c = beta.sum();
    if (std::fabs(c) < 1e-12) {
        throw DegeneracyError("sum(beta) == 0; constraints cannot be imposed");
    }
    const double k_mean = k.size() > 0 ? k.mean() : 0.0;
    LeeCarterParams out;
    out.alpha = alpha + beta * k_mean;
    out.beta = beta / c;
    out.k = c * (k.array() - k_mean).matrix();
    return out;
}

LeeCarterModel fit(const MortalitySurface& surface, const FitOptions& options) {
    if (surface.n_ages() < 2 || surface.n_years() < 2) {
        throw ArgumentError("fit requires at least 2 ages and 2 years");
    }
    const Eigen::MatrixXd l = log_hazard(surface); // validates cells

    const Eigen::Index n_ages = l.rows();
    const Eigen::Index n_years = l.cols();
    const double n_cells = static_cast<double>(n_ages) * static_cast<double>(n_years);

    LeeCarterModel model;
    model.age_min = surface.age_min;
    model.age_max = surface.age_max;
    model.year_min = surface.year_min;
    model.year_max = surface.year_max;
    model.fit_options = options;
    model.alpha = l.rowwise().mean();

    Eigen::MatrixXd z = l.colwise() - model.alpha;
    const double total_centered = z.squaredNorm();

    // No temporal signal: report the constant-surface limit explicitly.
    const double degeneracy_floor = 1e-20 * n_cells * std::max(1.0, l.squaredNorm() / n_cells);
    Eigen::VectorXd u, v;
    double sigma = 0.0;
    bool found = false;
    if (total_centered > degeneracy_floor) {
        found = dominant_triplet(z, options, u, v, sigma);
    }
    if (!found) {
        model.beta = Eigen::VectorXd::Constant(n_ages, 1.0 / static_cast<double>(n_ages));
        model.k = Eigen::VectorXd::Zero(n_years);
        model.degenerate = true;
        model.explained_variance = 0.0;
        model.residual_sd = std::sqrt(z.squaredNorm() / (n_cells - 1.0));
        return model;
    }

    // Canonical orientation before normalization; the constraint sum(beta)=1
    // pins the final signs either way.
    if (u.sum() < 0.0) {
        u = -u;
        v = -v;
    }
    const LeeCarterParams params = normalize_constraints(model.alpha, u, sigma * v);
    model.alpha = params.alpha;
    model.beta = params.beta;
    model.k = params.k;

    const Eigen::MatrixXd residuals = l - (model.alpha.replicate(1, n_years) +
                                           model.beta * model.k.transpose());
    const double ssr = residuals.squaredNorm();
    model.explained_variance = std::clamp(1.0 - ssr / total_centered, 0.0, 1.0);
    model.residual_sd = std::sqrt(ssr / (n_cells - 1.0));
    return model;
}

Eigen::MatrixXd residual_matrix(const LeeCarterModel& model, const MortalitySurface& surface) {
    if (model.age_min != surface.age_min || model.age_max != surface.age_max ||
        model.year_min != surface.year_min || model.year_max != surface.year_max) {
        throw ArgumentError("model and surface ranges do not match");
    }
    const Eigen::MatrixXd l = log_hazard(surface);
    return l - (model.alpha.replicate(1, l.cols()) + model.beta * model.k.transpose());
}

} // namespace longrisk
