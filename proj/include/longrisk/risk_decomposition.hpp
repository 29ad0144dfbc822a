#pragma once

#include "longrisk/annuity_engine.hpp"
#include "longrisk/errors.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace longrisk {

struct DecompositionConfig {
    int n_outer = 100;  // surface draws
    int m_inner = 200;  // portfolio simulations per surface
    double sigma_scale = 1.0;
    double convergence_threshold = 1e-3;
    int max_rounds = 8;
    uint64_t seed = 0;
    int threads = 1;
    bool drift_uncertainty = false; // adds (a, b) redraws per outer scenario
    int terminal_age = 120;
    ClosureMethod closure = ClosureMethod::kLogisticBlend;
};

struct DecompositionRound {
    int round = 0;
    int n_outer = 0;
    int m_inner = 0;
    double within = 0.0;
    double between_raw = 0.0;
    double between = 0.0; // raw minus within/M, floored at 0
    double total = 0.0;
    double omega = 0.0;
    double grand_mean = 0.0;
};

struct DecompositionResult {
    double within = 0.0;
    double between_raw = 0.0;
    double between = 0.0;
    double total = 0.0;
    double omega = 0.0;
    double grand_mean = 0.0;
    int n_outer = 0;
    int m_inner = 0;
    int rounds = 0;
    bool converged = false;
    std::vector<DecompositionRound> trace;
};

class DecompositionConvergenceError : public ConvergenceError {
  public:
    DecompositionConvergenceError(const std::string& message,
                                  std::vector<DecompositionRound> trace)
        : ConvergenceError(message), trace_(std::move(trace)) {}
    const std::vector<DecompositionRound>& trace() const { return trace_; }

  private:
    std::vector<DecompositionRound> trace_;
};

/// Within component: mean over rows of the row sample variance
/// (columns are inner draws, M-1 denominator).
double estimate_within(const Eigen::MatrixXd& lambdas);

/// Between component, raw: sample variance of the row means (N-1 denominator).
/// The raw statistic carries a sampling-noise term of order within/M.
double estimate_between(const Eigen::MatrixXd& lambdas);

/// max(0, raw - within/m_inner): removes the finite-M inflation of the raw
/// between statistic.
double adjusted_between(double between_raw, double within, int m_inner);

/// between / (within + between), clamped to [0,1]. Zero total variance is an
/// error (nothing to decompose).
double omega(double within, double between);

/// Inner sampler for one outer row; m is the global inner-draw index, stable
/// across rounds.
using InnerSampler = std::function<double(uint64_t m)>;
/// Builds row n's sampler (draws the row's surface). Must be deterministic in
/// n: re-invoking for the same row reproduces the same surface.
using RowFactory = std::function<InnerSampler(uint64_t n)>;

/// Single pass at the configured (N, M).
DecompositionResult nested_simulate_rows(const RowFactory& factory,
                                         const DecompositionConfig& config,
                                         bool force_zero_between);

/// Doubling controller: N and M double each round, draws accumulate. Stops
/// once both the absolute change of omega and the relative change of the
/// total variance fall below the threshold (so at least 2 rounds run).
DecompositionResult converge_rows(const RowFactory& factory, const DecompositionConfig& config,
                                  bool force_zero_between);

DecompositionResult nested_simulate(const Portfolio& portfolio, const LeeCarterModel& model,
                                    const DriftModel& drift, double discount_rate,
                                    const DecompositionConfig& config);

DecompositionResult converge(const Portfolio& portfolio, const LeeCarterModel& model,
                             const DriftModel& drift, double discount_rate,
                             const DecompositionConfig& config);

struct OmegaCurvePoint {
    double sigma_scale = 0.0;
    int size_scale = 1;
    double omega = 0.0;
    double within = 0.0;
    double between = 0.0;
    double total = 0.0;
    int rounds = 0;
};

/// One converged decomposition per (sigma_scale, size_scale) cell; the
/// portfolio is replicated size_scale times with fresh ids. The shared seed
/// gives common random numbers across cells.
std::vector<OmegaCurvePoint> omega_curve(const Portfolio& portfolio,
                                         const LeeCarterModel& model, const DriftModel& drift,
                                         double discount_rate, const DecompositionConfig& config,
                                         const std::vector<double>& sigma_scales,
                                         const std::vector<int>& size_scales);

} // namespace longrisk
